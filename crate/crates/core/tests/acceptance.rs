//! End-to-end acceptance run. Prints one line per criterion and exits with a
//! failure status if any criterion misses its tolerance.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use raussendorf_purify::analysis::{
    node_error_rate, path_error_rate, required_fidelity, sweep_box_size, sweep_input_error,
    timing_scaling, ConfigRecord, ErrorModelParams, SweepSettings,
};
use raussendorf_purify::driver::renormalize_parallel;
use raussendorf_purify::dump::{write_plan, write_purified};
use raussendorf_purify::graph::reduce_by_plan;
use raussendorf_purify::lattice::{generate_faulty, spanning_check, GenModel, LatticeGeometry};
use raussendorf_purify::renormalize::{renormalize, BoxGrid};

const STANDARD_BOXES: [i32; 3] = [5, 5, 3];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn seeds(n: u64) -> SweepSettings {
    SweepSettings::independent(STANDARD_BOXES, 0..n)
}

fn fmt_record(r: &ConfigRecord) -> String {
    format!(
        "B={} p={}: {:.4} +- {:.4} over {} seeds",
        r.box_size,
        r.p_fail,
        r.mean_out,
        r.stderr_out.unwrap_or(f64::NAN),
        r.seeds.len()
    )
}

/// Shared box-size sweep at p = 0.25, enough seeds for the path statistics.
struct Standard {
    records: Vec<ConfigRecord>,
}

impl Standard {
    fn record(&self, b: u32) -> &ConfigRecord {
        self.records
            .iter()
            .find(|r| r.box_size == b)
            .expect("swept box size")
    }
}

fn standard_sweep() -> Standard {
    // 80 coarse bonds per instance; 230 seeds leave room for failures
    let report = sweep_box_size(0.25, &[16, 20, 24], &seeds(230)).expect("sweep");
    Standard {
        records: report.records,
    }
}

fn criterion_1(standard: &Standard) -> Outcome {
    let r = standard.record(20);
    outcome(
        (r.mean_out - 0.10).abs() <= 0.03,
        format!("{} (want 0.10 +- 0.03)", fmt_record(r)),
    )
}

fn criterion_2(standard: &Standard) -> Outcome {
    let extra = sweep_box_size(0.25, &[28, 32], &seeds(20)).expect("sweep");
    let mut rows: Vec<&ConfigRecord> = vec![standard.record(20), standard.record(24)];
    rows.extend(extra.records.iter());
    let below = rows[..3].iter().all(|r| r.mean_out < 0.145);
    let monotone = rows.windows(2).all(|w| {
        let se = |r: &ConfigRecord| r.stderr_out.unwrap_or(0.0);
        w[1].mean_out <= w[0].mean_out + 2.0 * (se(w[0]).powi(2) + se(w[1]).powi(2)).sqrt()
    });
    let largest = rows.last().expect("rows");
    let floor = largest.mean_out <= 0.09;
    let detail = rows
        .iter()
        .map(|r| format!("{:.4}@{}", r.mean_out, r.box_size))
        .collect::<Vec<_>>();
    outcome(
        below && monotone && floor,
        format!(
            "means {} (below 0.145: {below}, non-increasing within 2 sigma: {monotone}, largest <= 0.09: {floor})",
            detail.join(" ")
        ),
    )
}

fn criterion_3(standard: &Standard) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (b, target) in [(16, 23.48), (20, 28.42), (24, 33.54)] {
        let r = standard.record(b);
        let h = r.histogram().expect("realized paths");
        let ok = h.count >= 18_000 && (h.mean - target).abs() <= 2.0;
        pass &= ok;
        parts.push(format!(
            "B={b}: {:.2} over {} paths (want {target} +- 2)",
            h.mean, h.count
        ));
    }
    outcome(pass, parts.join(", "))
}

fn criterion_4() -> Outcome {
    let report = sweep_input_error(&[0.20, 0.25, 0.30, 0.40], 24, &seeds(10)).expect("sweep");
    let mut pass = true;
    let mut parts = Vec::new();
    for r in &report.records {
        let want_improve = r.p_fail < 0.35;
        pass &= r.improves() == want_improve;
        parts.push(format!(
            "p={}: out {:.4} ({})",
            r.p_fail,
            r.mean_out,
            if want_improve {
                "want < input"
            } else {
                "want >= input"
            }
        ));
    }
    outcome(pass, parts.join(", "))
}

fn criterion_5() -> Outcome {
    let p = |halve| ErrorModelParams::new(0.9999, 29.0, halve).expect("params");
    let path = path_error_rate(&p(false));
    let node = node_error_rate(&p(false));
    let halved = node_error_rate(&p(true));
    let f = required_fidelity(0.006, 29.0).expect("attainable");
    let pass = (path - 0.0058).abs() <= 1e-4
        && (node - 0.0115).abs() <= 1e-4
        && (halved - 0.0058).abs() <= 1e-4
        && (0.99985..=0.99995).contains(&f);
    outcome(
        pass,
        format!("path {path:.5}, node {node:.5}, halved {halved:.5}, required f {f:.6}"),
    )
}

fn criterion_6() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for b in [6u32, 8, 10] {
        for p in [0.0, 0.1, 0.25] {
            let grid = BoxGrid::from_coarse([2, 2, 2], b).expect("grid");
            let geometry = LatticeGeometry::new(grid.fine_dims(), b).expect("geometry");
            for seed in 0..100 {
                let inst =
                    generate_faulty(&geometry, &GenModel::independent(p, seed)).expect("instance");
                let (lattice, plan) = renormalize(&inst, b).expect("renormalize");
                let reduced = reduce_by_plan(inst.graph(), &plan).expect("plan");
                if reduced != lattice.center_graph() {
                    bad.push(format!("B={b} p={p} seed={seed}"));
                }
                checked += 1;
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{checked} instances, mismatches: {bad:?}"),
    )
}

fn criterion_7() -> Outcome {
    let results = [
        (
            "Z commutation",
            common::run(common::z_case(), common::z_commute),
        ),
        (
            "Y chain order",
            common::run(common::chain_case(), common::y_chain),
        ),
        (
            "star to clique",
            common::run(common::star_case(), common::star_clique),
        ),
        (
            "bipartite",
            common::run(common::lattice_case(), common::independent_bipartite),
        ),
    ];
    let failures: Vec<String> = results
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    outcome(
        failures.is_empty(),
        format!(
            "4 properties x {} cases, failures: {failures:?}",
            common::CASES
        ),
    )
}

fn criterion_8() -> Outcome {
    let grid = BoxGrid::from_coarse(STANDARD_BOXES, 20).expect("grid");
    let geometry = LatticeGeometry::new(grid.fine_dims(), 20).expect("geometry");
    let mut pass = true;
    for seed in [1, 2] {
        let inst =
            generate_faulty(&geometry, &GenModel::independent(0.25, seed)).expect("instance");
        let dumps: Vec<(String, String)> = [1, 2, 4, 8]
            .iter()
            .map(|&w| {
                let (p, plan, _) = renormalize_parallel(&inst, 20, w).expect("renormalize");
                (write_purified(&p), write_plan(&plan))
            })
            .collect();
        pass &= dumps.windows(2).all(|w| w[0] == w[1]);
    }
    outcome(pass, "B=20, 5x5x3 boxes, seeds 1-2, workers 1/2/4/8".into())
}

fn criterion_9() -> Outcome {
    let geometry = LatticeGeometry::new([40, 40, 40], 20).expect("geometry");
    let spans = |p: f64| {
        (0..20)
            .filter(|&seed| {
                let inst =
                    generate_faulty(&geometry, &GenModel::independent(p, seed)).expect("instance");
                spanning_check(&inst, 0)
            })
            .count()
    };
    let low = spans(0.25);
    let high = spans(0.60);
    outcome(
        low >= 19 && 20 - high >= 19,
        format!("40^3: spanning {low}/20 at p=0.25 (want >= 19), {high}/20 at p=0.60 (want <= 1)"),
    )
}

fn criterion_10() -> Outcome {
    let report =
        timing_scaling(&[8, 12, 16, 20, 24], STANDARD_BOXES, 0.25, &[0, 1, 2]).expect("timing");
    let points: Vec<String> = report
        .points
        .iter()
        .map(|(b, t)| format!("{b}:{t:.3}s"))
        .collect();
    outcome(
        report.fit.exponent < 5.0,
        format!(
            "exponent {:.2} ({}); reference {} s at 5x5x3",
            report.fit.exponent,
            points.join(" "),
            report.reference_seconds
        ),
    )
}

type Check<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let start = Instant::now();
    let standard = standard_sweep();
    let checks: Vec<Check> = vec![
        (
            1,
            "reference configuration error rate",
            Box::new(|| criterion_1(&standard)),
        ),
        (2, "threshold crossing", Box::new(|| criterion_2(&standard))),
        (3, "path lengths", Box::new(|| criterion_3(&standard))),
        (4, "improvement region", Box::new(criterion_4)),
        (5, "error-model arithmetic", Box::new(criterion_5)),
        (6, "oracle equivalence", Box::new(criterion_6)),
        (7, "rewrite-rule properties", Box::new(criterion_7)),
        (8, "determinism across workers", Box::new(criterion_8)),
        (9, "percolation sanity", Box::new(criterion_9)),
        (10, "timing scaling", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (n, name, check) in &checks {
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "criterion {n:>2} {}: {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.0} s",
        checks.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
