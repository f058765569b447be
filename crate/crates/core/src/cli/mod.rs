//! The `lvhsgp` command line: `simulate`, `fit`, `sbc`, `ingest`, `report`.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors.
//! `LVHSGP_WORKERS` bounds the worker pool used for chains and trials.

mod commands;
pub mod pipeline;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::io::{KeyValues, MANIFEST};
use crate::kernels::KernelFamily;
use crate::priors::PriorPreset;
use crate::sampler::SamplerConfig;
use crate::simgen::ScenarioKind;

pub use pipeline::{fit_dataset, FitOptions, FitOutcome};

/// Environment variable holding the worker-pool size.
pub const WORKERS_ENV: &str = "LVHSGP_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "lvhsgp", version, about = "Latent-input multi-output Hilbert-space GPs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a dataset from a simulation scenario.
    Simulate(SimulateArgs),
    /// Fit a model to a dataset with adaptive HMC.
    Fit(FitArgs),
    /// Run simulation-based calibration.
    Sbc(SbcArgs),
    /// Convert an external CSV into the dataset format.
    Ingest(IngestArgs),
    /// Tabulate bias, SD and RMSE across fit runs.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: ScenarioKind,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub d: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Measurement SD of the noisy inputs.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Hsgp,
    Exact,
}

#[derive(Debug, Clone, Args)]
pub struct SamplerArgs {
    #[arg(long, default_value_t = 2000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 1000)]
    pub warmup: usize,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long, default_value_t = 0.8)]
    pub target_accept: f64,
    #[arg(long, default_value_t = 10)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl SamplerArgs {
    pub fn config(&self) -> SamplerConfig {
        SamplerConfig {
            iterations: self.iterations,
            warmup: self.warmup,
            chains: self.chains,
            target_accept: self.target_accept,
            max_depth: self.max_depth,
            seed: self.seed,
            ..SamplerConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset directory or CSV file.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "se")]
    pub family: KernelFamily,
    #[arg(long, value_enum, default_value_t = VariantArg::Hsgp)]
    pub variant: VariantArg,
    /// Number of basis functions (defaults to the minimum for the prior).
    #[arg(long)]
    pub m: Option<usize>,
    /// Accept an M below the minimum basis size.
    #[arg(long)]
    pub force_m: bool,
    /// Boundary factor c in L = c * half-range.
    #[arg(long, default_value_t = 1.25)]
    pub c: f64,
    /// Prior preset: scenario, wide or case-study.
    #[arg(long)]
    pub priors: Option<PriorPreset>,
    /// Override the measurement SD stored with the dataset.
    #[arg(long)]
    pub s: Option<f64>,
    /// Allow the exact GP above 200 observations.
    #[arg(long)]
    pub allow_large_exact: bool,
    /// Exit with status 1 when any R-hat exceeds 1.1.
    #[arg(long)]
    pub strict_rhat: bool,
    #[command(flatten)]
    pub sampler: SamplerArgs,
}

#[derive(Debug, Args)]
pub struct SbcArgs {
    #[arg(long, default_value = "gp-se")]
    pub scenario: ScenarioKind,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub d: usize,
    /// Number of calibration trials J.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Thinned posterior draws per trial.
    #[arg(long, default_value_t = 99)]
    pub h: usize,
    #[arg(long)]
    pub family: Option<KernelFamily>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Fit the exact GP instead of the HSGP.
    #[arg(long)]
    pub exact: bool,
    /// Run the conjugate normal-mean self-test instead of a GP scenario.
    #[arg(long)]
    pub conjugate: bool,
    /// Posterior SD multiplier for the conjugate self-test.
    #[arg(long, default_value_t = 1.0)]
    pub conjugate_sd_scale: f64,
    #[arg(long, default_value_t = 0.95)]
    pub coverage: f64,
    #[arg(long, default_value_t = 10_000)]
    pub null_sims: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub sampler: SamplerArgs,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Column holding the prior time of each observation.
    #[arg(long, default_value = "time")]
    pub time_column: String,
    /// Comma-separated output columns (default: every other column).
    #[arg(long, value_delimiter = ',')]
    pub columns: Option<Vec<String>>,
    /// Measurement SD of the prior time.
    #[arg(long, default_value_t = 0.03)]
    pub s: f64,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Fit output directories.
    #[arg(long = "run", required = true, num_args = 1..)]
    pub runs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write per-observation prior/posterior deviations.
    #[arg(long)]
    pub case_study: bool,
}

/// Seconds since the Unix epoch.
pub(crate) fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Run manifest written into every output directory.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub kv: KeyValues,
}

impl Manifest {
    pub fn start(command: &str, argv: &[String]) -> Self {
        let mut kv = KeyValues::new();
        kv.set("command", command);
        kv.set("version", env!("CARGO_PKG_VERSION"));
        kv.set("argv", argv.join(" "));
        kv.set("started_unix", unix_now());
        Self { kv }
    }

    pub fn config(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.kv.set(format!("config.{key}"), value);
        self
    }

    pub fn output(&mut self, key: &str, path: &Path) -> &mut Self {
        self.kv.set(format!("output.{key}"), path.display());
        self
    }

    pub fn finish(mut self, dir: &Path) -> Result<()> {
        self.kv.set("finished_unix", unix_now());
        self.kv.write(&dir.join(MANIFEST))
    }
}

fn configure_workers() -> Result<()> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(Error::Usage(format!("{WORKERS_ENV} must be positive")));
        }
        // A second initialization (e.g. repeated calls in one process) keeps
        // the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs a parsed command.
pub fn run(cli: Cli, argv: &[String]) -> Result<()> {
    configure_workers()?;
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a, argv),
        Command::Fit(a) => commands::fit(&a, argv),
        Command::Sbc(a) => commands::sbc(&a, argv),
        Command::Ingest(a) => commands::ingest(&a, argv),
        Command::Report(a) => commands::report(&a, argv),
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let argv: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for usage errors, 1 otherwise.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Usage(_) => 2,
        _ => 1,
    }
}
