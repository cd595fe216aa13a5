//! Command-line driver: generation, validation, spectra, IDS tables,
//! eigenfunction search, walks and metric queries.

mod commands;
pub mod config;
mod files;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{run_config, ExperimentConfig, Manifest};

pub const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (target ",
    env!("TRISPEC_BUILD_TARGET"),
    ", profile ",
    env!("TRISPEC_BUILD_PROFILE"),
    ")"
);

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "TRISPEC_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("{path}: {reason}")]
    File { path: String, reason: String },
    #[error("{context}: {message}")]
    Compute { context: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Config { .. } => 2,
            Self::File { .. } | Self::Compute { .. } => 1,
        }
    }

    pub(crate) fn config(field: &str, reason: impl Into<String>) -> Self {
        Self::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

/// Attach a location to a library error.
pub(crate) trait Context<T> {
    fn context(self, what: impl Into<String>) -> Result<T, CliError>;
}

impl<T, E: std::fmt::Display> Context<T> for Result<T, E> {
    fn context(self, what: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|e| CliError::Compute {
            context: what.into(),
            message: e.to_string(),
        })
    }
}

#[derive(Parser, Debug)]
#[command(name = "trispec", version = VERSION, about = "Decorated sphere triangulations and their spectra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a triangulation or patch.
    Gen(GenArgs),
    /// Check a triangulation or patch file.
    Validate(ValidateArgs),
    /// Eigenvalues of an operator on one triangulation.
    Spectrum(SpectrumArgs),
    /// Integrated density of states over a sequence of measures.
    Ids(IdsArgs),
    /// Compactly supported eigenfunctions on a patch.
    Css(CssArgs),
    /// Random-walk distributions, patch densities and Reiter defects.
    Walk(WalkArgs),
    /// Distance between two pointed triangulations.
    Metric(MetricArgs),
    /// Counts and degree statistics.
    Stats(StatsArgs),
    /// Run an experiment described by a TOML config.
    Run(RunArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    DoubleGrid,
    Hyperbolic,
    Substitution,
    Theta,
    TriangularBall,
    Tube,
    RingPatch,
    Tetrahedron,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemaArg {
    Natural,
    Decorated,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum WeightingArg {
    DartUniform,
    VertexUniform,
}

#[derive(Args, Debug, Clone)]
pub struct OperatorArgs {
    /// `laplacian`, `magnetic`, or `rule:PATH` for a local rule file.
    #[arg(long, default_value = "laplacian")]
    pub operator: String,
    #[arg(long, value_enum, default_value = "natural")]
    pub schema: SchemaArg,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub generator: Generator,
    /// Radius or stage.
    #[arg(long)]
    pub k: Option<usize>,
    /// Substitution rounds or theta stage.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub rings: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Substitution rule file; the shipped 4-subdivision rule if absent.
    #[arg(long)]
    pub rule: Option<PathBuf>,
    /// Starting triangulation for substitution; a tetrahedron if absent.
    #[arg(long)]
    pub base: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub operator: OperatorArgs,
    /// Only the eigenvalues nearest this value (sparse solver).
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IdsArgs {
    /// `grid`, `hyperbolic` or `substitution`.
    #[arg(long)]
    pub measure: Option<String>,
    /// One sphere file per stage, instead of a generated family.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub input: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub stages: Vec<usize>,
    /// `step` (uses --t) or any test function spec such as `poly:0,1`.
    #[arg(long, default_value = "step")]
    pub phi: String,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1.0")]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub rule: Option<PathBuf>,
    #[command(flatten)]
    pub operator: OperatorArgs,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CssArgs {
    #[arg(long)]
    pub patch: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Hopping range; that of the operator if absent.
    #[arg(long)]
    pub r: Option<usize>,
    /// Singular values below this propose a refined eigenvalue.
    #[arg(long, default_value_t = 1e-6)]
    pub window: f64,
    /// Verify each eigenfunction inside this triangulation.
    #[arg(long)]
    pub host: Option<PathBuf>,
    #[command(flatten)]
    pub operator: OperatorArgs,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct WalkArgs {
    pub input: PathBuf,
    /// Label of the start vertex.
    #[arg(long, allow_hyphen_values = true)]
    pub start: i64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub cesaro: bool,
    /// Report the density of this patch instead of the distribution.
    #[arg(long)]
    pub probe: Option<PathBuf>,
    /// Report the Reiter defect against this neighbour.
    #[arg(long, allow_hyphen_values = true)]
    pub reiter_to: Option<i64>,
    /// Sample this many walks instead of exact propagation.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MetricArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Root of the first input as `u->v`; the marked dart for patches.
    #[arg(long)]
    pub a_dart: Option<String>,
    #[arg(long)]
    pub b_dart: Option<String>,
    #[arg(long, default_value_t = 8)]
    pub r_max: usize,
    /// Probe patches for a frequency distance between the two spheres.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub probe: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Override the output directory of the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Size the global worker pool from the environment. Returns the count used.
pub fn configure_workers() -> Result<usize, CliError> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?;
        // a second call in one process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}

/// Parse `args` and run. Returns the process exit code.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    let result = configure_workers().and_then(|_| commands::dispatch(cli.command, stdout, stderr));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
