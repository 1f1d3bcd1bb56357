//! Command-line front end for `rdkit_core`.
//!
//! Every command reads a scenario file, runs one computation and emits a
//! human-readable summary plus a JSON [`record::RunRecord`]. Exit codes:
//! `0` success, `1` verification checks failed, `2` input error, `3`
//! mathematical or domain error.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rdkit_core::waterfill::CurveMode;

mod commands;
pub mod record;
pub mod scenario;

pub use scenario::{parse_scenario, Scenario, Units};

#[derive(Debug)]
pub enum CliError {
    /// Malformed input: bad flags, unreadable or invalid scenario file.
    Input(String),
    /// A named error from the numerical core.
    Math(rdkit_core::Error),
    /// The computation ran but a verification check did not pass.
    ChecksFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Input(_) => 2,
            CliError::Math(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "error[input]: {m}"),
            CliError::Math(e) => write!(f, "error[{}]: {e}", e.kind()),
            CliError::ChecksFailed(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<rdkit_core::Error> for CliError {
    fn from(e: rdkit_core::Error) -> Self {
        CliError::Math(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Conditional,
    Marginal,
    DecoderOnly,
    Csi,
}

impl Mode {
    pub fn curve_mode(self) -> CurveMode {
        match self {
            Mode::Conditional => CurveMode::Conditional,
            Mode::Marginal => CurveMode::Marginal,
            Mode::DecoderOnly => CurveMode::DecoderOnly,
            Mode::Csi => CurveMode::Csi,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Conditional => "conditional",
            Mode::Marginal => "marginal",
            Mode::DecoderOnly => "decoder-only",
            Mode::Csi => "csi",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rdkit", version, about = "Gaussian rate-distortion with side information")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Units for printed rates; defaults to the scenario's `units`.
    #[arg(long, value_enum)]
    pub units: Option<Units>,
    /// Output file; the JSON record (or CSV for `sweep`) goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rate at one distortion.
    Rdf {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        distortion: f64,
        #[arg(long, value_enum, default_value = "conditional")]
        mode: Mode,
    },
    /// Optimal test channel (H, G, Q_W) and its parallel form.
    Realize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        distortion: f64,
    },
    /// Rate-distortion curve as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dmin: f64,
        #[arg(long)]
        dmax: f64,
        #[arg(long, default_value_t = 21)]
        points: usize,
        #[arg(long, value_enum, default_value = "conditional")]
        mode: Mode,
    },
    /// Monte Carlo, Gray-bound and information-identity checks.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        distortion: f64,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare the optimal channel with two prior-work channels.
    Audit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        distortion: f64,
    },
}

/// Parse `args` (including the program name) and run; errors go to stderr.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut stdout = std::io::stdout().lock();
    match commands::dispatch(cli.command, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
