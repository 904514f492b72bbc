//! The `purify` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{sweep_box_size, sweep_input_error, timing_scaling, SweepSettings};
use crate::driver::renormalize_parallel;
use crate::dump::{
    compare_reduced, parse_lattice, parse_plan, write_lattice, write_plan, PurifiedDump,
};
use crate::error::{Error, Result};
use crate::graph::{reduce_by_plan, Coord};
use crate::lattice::{
    generate_faulty, GenModel, LatticeGeometry, ModelKind, DEFAULT_P_FAIL, DEFAULT_Q_SKIP,
};
use crate::renormalize::BoxGrid;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PURIFY_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "purify",
    version,
    about = "Renormalize faulty Raussendorf lattices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a faulty lattice and write its dump.
    Generate(GenerateArgs),
    /// Purify a lattice dump into a purified lattice and a measurement plan.
    Renormalize(RenormalizeArgs),
    /// Check that a plan reduces a lattice to the given purified lattice.
    Verify(VerifyArgs),
    /// Monte Carlo sweeps over box size, input error rate or run time.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Independent,
    Skip,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Independent => ModelKind::IndependentBond,
            ModelArg::Skip => ModelKind::SkipBond,
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::Independent)]
    pub model: ModelArg,
    #[arg(long, default_value_t = DEFAULT_P_FAIL)]
    pub p_fail: f64,
    #[arg(long, default_value_t = DEFAULT_Q_SKIP)]
    pub q_skip: f64,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Fine lattice extent.
    #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"], conflicts_with = "coarse")]
    pub dims: Option<Vec<i32>>,
    /// Extent in boxes; the fine extent is this times the box size.
    #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"])]
    pub coarse: Option<Vec<i32>>,
    #[arg(long, default_value_t = 20)]
    pub box_size: u32,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; defaults to lattice.txt in the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenormalizeArgs {
    #[arg(long)]
    pub lattice: PathBuf,
    /// Box size; defaults to the one in the lattice header.
    #[arg(long)]
    pub box_size: Option<u32>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Directory for purified.txt and plan.txt.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub lattice: PathBuf,
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long)]
    pub purified: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Vary {
    BoxSize,
    PFail,
    Timing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value_t = Vary::BoxSize)]
    pub vary: Vary,
    #[arg(long, value_delimiter = ',', default_values_t = [12u32, 16, 20, 24])]
    pub box_sizes: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_values_t = [DEFAULT_P_FAIL])]
    pub p_fail: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ModelArg::Independent)]
    pub model: ModelArg,
    #[arg(long, default_value_t = DEFAULT_Q_SKIP)]
    pub q_skip: f64,
    #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"], default_values_t = [5, 5, 3])]
    pub coarse: Vec<i32>,
    /// Number of seeds, used as 0..N unless --seed-list is given.
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    #[arg(long, value_delimiter = ',')]
    pub seed_list: Option<Vec<u64>>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Report file; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Fully resolved settings of one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dims: Coord,
    pub box_size: u32,
    pub model: GenModel,
    pub workers: usize,
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn for_generate(args: &GenerateArgs, out_dir: PathBuf) -> Result<Self> {
        let dims = match (&args.dims, &args.coarse) {
            (Some(d), _) => coord(d)?,
            (None, Some(c)) => BoxGrid::from_coarse(coord(c)?, args.box_size)?.fine_dims(),
            (None, None) => return Err(Error::Config("give --dims or --coarse".into())),
        };
        let model = GenModel {
            kind: args.model.model.into(),
            p_fail: args.model.p_fail,
            q_skip: args.model.q_skip,
            seed: args.seed,
        };
        model.validate()?;
        LatticeGeometry::new(dims, args.box_size)?;
        Ok(RunConfig {
            dims,
            box_size: args.box_size,
            model,
            workers: 1,
            out_dir,
        })
    }
}

fn coord(v: &[i32]) -> Result<Coord> {
    v.try_into()
        .map_err(|_| Error::Config(format!("expected three extents, got {}", v.len())))
}

fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    }
}

pub fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<PathBuf> {
    let config = RunConfig::for_generate(args, default_out_dir())?;
    let geometry = LatticeGeometry::new(config.dims, config.box_size)?;
    let instance = generate_faulty(&geometry, &config.model)?;
    let path = args
        .out
        .clone()
        .unwrap_or_else(|| config.out_dir.join("lattice.txt"));
    write(&path, &write_lattice(&instance))?;
    writeln!(
        out,
        "realized {} failed {} nonlocal {} -> {}",
        instance.realized_bonds(),
        instance.failed_bonds(),
        instance.nonlocal_bonds(),
        path.display()
    )?;
    Ok(path)
}

pub fn cmd_renormalize(args: &RenormalizeArgs, out: &mut dyn Write) -> Result<()> {
    let instance = parse_lattice(&read(&args.lattice)?).map_err(|e| in_file(&args.lattice, e))?;
    let box_size = args.box_size.unwrap_or(instance.geometry().box_size());
    let (lattice, plan, stats) = renormalize_parallel(&instance, box_size, args.workers)?;
    let dir = args.out_dir.clone().unwrap_or_else(default_out_dir);
    write(
        &dir.join("purified.txt"),
        &PurifiedDump::from_lattice(&lattice).write(),
    )?;
    write(&dir.join("plan.txt"), &write_plan(&plan))?;
    let rate = lattice
        .output_error_rate()
        .map(|r| format!("{r:.6}"))
        .unwrap_or_else(|_| "undefined".into());
    let lengths: Vec<usize> = lattice.realized().map(|r| r.length).collect();
    let mean_len = if lengths.is_empty() {
        "undefined".into()
    } else {
        format!(
            "{:.3}",
            lengths.iter().sum::<usize>() as f64 / lengths.len() as f64
        )
    };
    writeln!(
        out,
        "output_error_rate {rate} realized {} failed {} mean_length {mean_len} workers {} exchanged_bytes {}",
        lattice.realized_count(),
        lattice.failed_count(),
        stats.workers,
        stats.bytes_received.iter().sum::<usize>()
    )?;
    Ok(())
}

/// Returns whether the files agree; differences are written to `out`.
pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<bool> {
    let instance = parse_lattice(&read(&args.lattice)?).map_err(|e| in_file(&args.lattice, e))?;
    let plan = parse_plan(
        &read(&args.plan)?,
        instance.graph(),
        instance.geometry().box_size(),
    )
    .map_err(|e| in_file(&args.plan, e))?;
    let purified =
        PurifiedDump::parse(&read(&args.purified)?).map_err(|e| in_file(&args.purified, e))?;
    let reduced = reduce_by_plan(instance.graph(), &plan)?;
    let report = compare_reduced(&reduced, &purified);
    if report.passed() {
        writeln!(
            out,
            "ok: {} nodes, {} bonds",
            purified.nodes.len(),
            purified.realized_edges().len()
        )?;
    } else {
        write!(out, "{}", report.describe())?;
    }
    Ok(report.passed())
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    let coarse = coord(&args.coarse)?;
    let seeds: Vec<u64> = args
        .seed_list
        .clone()
        .unwrap_or_else(|| (0..args.seeds).collect());
    let settings = SweepSettings {
        kind: args.model.into(),
        q_skip: args.q_skip,
        coarse_dims: coarse,
        seeds: seeds.clone(),
    };
    let text = match args.vary {
        Vary::BoxSize => {
            let [p] = args.p_fail[..] else {
                return Err(Error::Config("a box-size sweep takes one --p-fail".into()));
            };
            let report = sweep_box_size(p, &args.box_sizes, &settings)?;
            match args.format {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json(),
            }
        }
        Vary::PFail => {
            let [b] = args.box_sizes[..] else {
                return Err(Error::Config(
                    "an input-rate sweep takes one --box-sizes".into(),
                ));
            };
            let report = sweep_input_error(&args.p_fail, b, &settings)?;
            match args.format {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json(),
            }
        }
        Vary::Timing => {
            let [p] = args.p_fail[..] else {
                return Err(Error::Config("a timing sweep takes one --p-fail".into()));
            };
            let report = timing_scaling(&args.box_sizes, coarse, p, &seeds)?;
            match args.format {
                Format::Csv => {
                    let mut s = String::from("B,seconds\n");
                    for (b, t) in &report.points {
                        s.push_str(&format!("{b},{t}\n"));
                    }
                    s
                }
                Format::Json => serde_json::to_string_pretty(&report).expect("serializable"),
            }
        }
    };
    match &args.out {
        Some(path) => write(path, &text),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Parse { .. } => EXIT_PARSE,
        _ => EXIT_CONFIG,
    }
}

/// Run the command line and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a, &mut out).map(|_| EXIT_OK),
        Command::Renormalize(a) => cmd_renormalize(a, &mut out).map(|_| EXIT_OK),
        Command::Verify(a) => {
            cmd_verify(a, &mut out).map(|ok| if ok { EXIT_OK } else { EXIT_MISMATCH })
        }
        Command::Sweep(a) => cmd_sweep(a, &mut out).map(|_| EXIT_OK),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("purify: {e}");
            exit_code(&e)
        }
    }
}
