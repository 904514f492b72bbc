//! Detector-fidelity error model and Monte Carlo sweeps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Coord;
use crate::lattice::{generate_faulty, GenModel, LatticeGeometry, ModelKind};
use crate::renormalize::{renormalize, BoxGrid};

/// Loss rate a Raussendorf lattice tolerates.
pub const LOSS_THRESHOLD: f64 = 0.145;
/// Loss rate regarded as comfortably correctable.
pub const CORRECTABLE_LOSS: f64 = 0.065;
/// Reference wall time for 5x5x3 boxes, reported for comparison only.
pub const REFERENCE_SECONDS: f64 = 1.34;

/// Detector fidelity `f`, mean path length `l_bar` and whether the node error
/// is halved by random assignment of outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorModelParams {
    pub f: f64,
    pub l_bar: f64,
    pub halve: bool,
}

impl ErrorModelParams {
    pub fn new(f: f64, l_bar: f64, halve: bool) -> Result<Self> {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::Domain(format!(
                "fidelity must lie in [0, 1], got {f}"
            )));
        }
        if !(l_bar > 0.0 && l_bar.is_finite()) {
            return Err(Error::Domain(format!(
                "mean path length must be positive, got {l_bar}"
            )));
        }
        Ok(ErrorModelParams { f, l_bar, halve })
    }
}

/// Probability that some detector along one path misfires: `1 - f^(2 L)`.
pub fn path_error_rate(p: &ErrorModelParams) -> f64 {
    1.0 - p.f.powf(2.0 * p.l_bar)
}

/// Error of one purified node fed by four half paths: `1 - f^(4 L)`,
/// optionally halved.
pub fn node_error_rate(p: &ErrorModelParams) -> f64 {
    let qubits = 4.0 * (p.l_bar / 2.0);
    let e = 1.0 - p.f.powf(2.0 * qubits);
    if p.halve {
        e / 2.0
    } else {
        e
    }
}

/// Fidelity at which the halved node error equals `target`.
pub fn required_fidelity(target: f64, l_bar: f64) -> Result<f64> {
    if !(l_bar > 0.0 && l_bar.is_finite()) {
        return Err(Error::Domain(format!(
            "mean path length must be positive, got {l_bar}"
        )));
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Domain(format!(
            "target must lie in (0, 1), got {target}"
        )));
    }
    if target >= 0.5 {
        // even f = 0 only reaches a halved error of 1/2
        return Err(Error::Domain(format!(
            "halved node error cannot exceed 0.5, target {target} is unattainable"
        )));
    }
    Ok(((1.0 - 2.0 * target).ln() / (4.0 * l_bar)).exp())
}

/// Mean and standard error of the mean; the error needs two samples.
pub fn mean_stderr(xs: &[f64]) -> Option<(f64, Option<f64>)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let stderr = (xs.len() >= 2).then(|| {
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    });
    Some((mean, stderr))
}

/// Integer-binned path lengths.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LengthHistogram {
    /// `(length, count)` pairs in increasing length.
    pub bins: Vec<(usize, u64)>,
    pub count: u64,
    pub mean: f64,
    /// Standard error over individual paths.
    pub stderr: Option<f64>,
}

impl LengthHistogram {
    pub fn from_lengths(lengths: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut bins = BTreeMap::new();
        for l in lengths {
            *bins.entry(l).or_insert(0u64) += 1;
        }
        Self::from_bins(bins.into_iter().collect())
    }

    fn from_bins(bins: Vec<(usize, u64)>) -> Result<Self> {
        let count: u64 = bins.iter().map(|b| b.1).sum();
        if count == 0 {
            return Err(Error::UndefinedStatistics("no realized paths".into()));
        }
        let n = count as f64;
        let mean = bins.iter().map(|&(l, c)| l as f64 * c as f64).sum::<f64>() / n;
        let stderr = (count >= 2).then(|| {
            let ss: f64 = bins
                .iter()
                .map(|&(l, c)| c as f64 * (l as f64 - mean).powi(2))
                .sum();
            (ss / (n - 1.0) / n).sqrt()
        });
        Ok(LengthHistogram {
            bins,
            count,
            mean,
            stderr,
        })
    }

    fn merge(parts: &[Vec<(usize, u64)>]) -> Vec<(usize, u64)> {
        let mut bins = BTreeMap::new();
        for part in parts {
            for &(l, c) in part {
                *bins.entry(l).or_insert(0) += c;
            }
        }
        bins.into_iter().collect()
    }
}

/// Sweep settings other than the swept parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub kind: ModelKind,
    pub q_skip: f64,
    pub coarse_dims: Coord,
    pub seeds: Vec<u64>,
}

impl SweepSettings {
    pub fn independent(coarse_dims: Coord, seeds: impl IntoIterator<Item = u64>) -> Self {
        SweepSettings {
            kind: ModelKind::IndependentBond,
            q_skip: crate::lattice::DEFAULT_Q_SKIP,
            coarse_dims,
            seeds: seeds.into_iter().collect(),
        }
    }

    fn model(&self, p_fail: f64, seed: u64) -> GenModel {
        GenModel {
            kind: self.kind,
            p_fail,
            q_skip: self.q_skip,
            seed,
        }
    }
}

/// Aggregate over seeds for one `(p_fail, B)` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub p_fail: f64,
    pub box_size: u32,
    pub seeds: Vec<u64>,
    pub mean_out: f64,
    pub stderr_out: Option<f64>,
    /// Empirical fraction of failed lattice bonds.
    pub mean_input: f64,
    pub mean_len: Option<f64>,
    pub stderr_len: Option<f64>,
    pub histogram: Vec<(usize, u64)>,
    pub realized_paths: u64,
    /// Summed structure and path time over seeds; generation excluded.
    pub wall_s: f64,
    pub below_threshold: bool,
    pub below_correctable: bool,
}

impl ConfigRecord {
    pub fn histogram(&self) -> Result<LengthHistogram> {
        LengthHistogram::from_bins(self.histogram.clone())
    }

    pub fn improves(&self) -> bool {
        self.mean_out < self.p_fail
    }
}

/// Largest improving and smallest non-improving input rates, bracketing the
/// break-even point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImprovementRegion {
    pub last_improving: Option<f64>,
    pub first_not_improving: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub settings: SweepSettings,
    pub records: Vec<ConfigRecord>,
    pub improvement: Option<ImprovementRegion>,
}

pub const CSV_HEADER: &str = "p_fail,B,seeds,mean_out,stderr_out,mean_len,stderr_len,wall_s";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.p_fail,
                r.box_size,
                r.seeds.len(),
                r.mean_out,
                opt(r.stderr_out),
                opt(r.mean_len),
                opt(r.stderr_len),
                r.wall_s
            )
            .unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }
}

struct SeedRun {
    out: f64,
    input: f64,
    lengths: Vec<(usize, u64)>,
    seconds: f64,
}

fn run_one(settings: &SweepSettings, p_fail: f64, box_size: u32, seed: u64) -> Result<SeedRun> {
    let grid = BoxGrid::from_coarse(settings.coarse_dims, box_size)?;
    let geometry = LatticeGeometry::new(grid.fine_dims(), box_size)?;
    let instance = generate_faulty(&geometry, &settings.model(p_fail, seed))?;
    let start = Instant::now();
    let (lattice, _) = renormalize(&instance, box_size)?;
    let seconds = start.elapsed().as_secs_f64();
    let lengths = LengthHistogram::from_lengths(lattice.realized().map(|r| r.length))
        .map(|h| h.bins)
        .unwrap_or_default();
    Ok(SeedRun {
        out: lattice.output_error_rate()?,
        input: instance.failed_bonds() as f64 / instance.ideal_bonds() as f64,
        lengths,
        seconds,
    })
}

fn run_configs(settings: &SweepSettings, configs: &[(f64, u32)]) -> Result<Vec<ConfigRecord>> {
    if settings.seeds.is_empty() {
        return Err(Error::Config("a sweep needs at least one seed".into()));
    }
    let mut seeds = settings.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();
    let jobs: Vec<(usize, u64)> = (0..configs.len())
        .flat_map(|c| seeds.iter().map(move |&s| (c, s)))
        .collect();
    let runs: Vec<SeedRun> = jobs
        .par_iter()
        .map(|&(c, s)| run_one(settings, configs[c].0, configs[c].1, s))
        .collect::<Result<_>>()?;
    let per = seeds.len();
    Ok(configs
        .iter()
        .enumerate()
        .map(|(c, &(p_fail, box_size))| {
            let runs = &runs[c * per..(c + 1) * per];
            let outs: Vec<f64> = runs.iter().map(|r| r.out).collect();
            let inputs: Vec<f64> = runs.iter().map(|r| r.input).collect();
            let (mean_out, stderr_out) = mean_stderr(&outs).expect("seeds present");
            let parts: Vec<_> = runs.iter().map(|r| r.lengths.clone()).collect();
            let histogram = LengthHistogram::merge(&parts);
            let lengths = LengthHistogram::from_bins(histogram.clone()).ok();
            ConfigRecord {
                p_fail,
                box_size,
                seeds: seeds.clone(),
                mean_out,
                stderr_out,
                mean_input: mean_stderr(&inputs).expect("seeds present").0,
                mean_len: lengths.as_ref().map(|h| h.mean),
                stderr_len: lengths.as_ref().and_then(|h| h.stderr),
                realized_paths: lengths.as_ref().map_or(0, |h| h.count),
                histogram,
                wall_s: runs.iter().map(|r| r.seconds).sum(),
                below_threshold: mean_out < LOSS_THRESHOLD,
                below_correctable: mean_out < CORRECTABLE_LOSS,
            }
        })
        .collect())
}

/// Output error rate against box size at fixed input rate.
pub fn sweep_box_size(
    p_fail: f64,
    box_sizes: &[u32],
    settings: &SweepSettings,
) -> Result<SweepReport> {
    let configs: Vec<(f64, u32)> = box_sizes.iter().map(|&b| (p_fail, b)).collect();
    Ok(SweepReport {
        settings: settings.clone(),
        records: run_configs(settings, &configs)?,
        improvement: None,
    })
}

/// Output error rate against input rate at fixed box size.
pub fn sweep_input_error(
    p_fails: &[f64],
    box_size: u32,
    settings: &SweepSettings,
) -> Result<SweepReport> {
    let mut sorted = p_fails.to_vec();
    sorted.sort_by(f64::total_cmp);
    let configs: Vec<(f64, u32)> = sorted.iter().map(|&p| (p, box_size)).collect();
    let records = run_configs(settings, &configs)?;
    let last_improving = records
        .iter()
        .rev()
        .find(|r| r.improves())
        .map(|r| r.p_fail);
    let first_not_improving = records
        .iter()
        .filter(|r| !r.improves() && last_improving.is_none_or(|l| r.p_fail > l))
        .map(|r| r.p_fail)
        .next();
    Ok(SweepReport {
        settings: settings.clone(),
        records,
        improvement: Some(ImprovementRegion {
            last_improving,
            first_not_improving,
        }),
    })
}

/// Path lengths pooled over every record of a report.
pub fn path_length_histogram(report: &SweepReport) -> Result<LengthHistogram> {
    let parts: Vec<_> = report.records.iter().map(|r| r.histogram.clone()).collect();
    LengthHistogram::from_bins(LengthHistogram::merge(&parts))
}

/// Power law `t = a * B^k` fitted in log-log space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub prefactor: f64,
    pub exponent: f64,
}

impl PowerFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.prefactor * x.powf(self.exponent)
    }

    /// Largest relative deviation of the fit from the points.
    pub fn max_relative_residual(&self, points: &[(f64, f64)]) -> f64 {
        points
            .iter()
            .map(|&(x, y)| ((self.eval(x) - y) / y).abs())
            .fold(0.0, f64::max)
    }
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return Err(Error::UndefinedStatistics(
            "a power-law fit needs two positive points".into(),
        ));
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::UndefinedStatistics("all box sizes are equal".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    Ok(PowerFit {
        prefactor: (my - exponent * mx).exp(),
        exponent,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub coarse_dims: Coord,
    pub p_fail: f64,
    /// `(B, mean seconds per instance)`.
    pub points: Vec<(u32, f64)>,
    pub fit: PowerFit,
    pub max_relative_residual: f64,
    pub reference_seconds: f64,
}

/// Time the structure and path phase against box size.
pub fn timing_scaling(
    box_sizes: &[u32],
    coarse_dims: Coord,
    p_fail: f64,
    seeds: &[u64],
) -> Result<TimingReport> {
    if seeds.is_empty() {
        return Err(Error::Config("timing needs at least one seed".into()));
    }
    let mut points = Vec::new();
    for &b in box_sizes {
        let grid = BoxGrid::from_coarse(coarse_dims, b)?;
        let geometry = LatticeGeometry::new(grid.fine_dims(), b)?;
        let mut total = 0.0;
        for &seed in seeds {
            let instance = generate_faulty(&geometry, &GenModel::independent(p_fail, seed))?;
            let start = Instant::now();
            let result = renormalize(&instance, b)?;
            total += start.elapsed().as_secs_f64();
            drop(result);
        }
        points.push((b, total / seeds.len() as f64));
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|&(b, t)| (b as f64, t)).collect();
    let fit = fit_power_law(&xy)?;
    Ok(TimingReport {
        coarse_dims,
        p_fail,
        max_relative_residual: fit.max_relative_residual(&xy),
        points,
        fit,
        reference_seconds: REFERENCE_SECONDS,
    })
}
