//! `sideband-tomo`: coefficient curves, scan synthesis, fitting and state
//! checks for homodyne and resonator detection of sideband modes.
//!
//! Exit codes: 0 success, 1 usage, 2 invalid data or configuration (or a
//! state that fails the physicality check), 3 numerical failure.

mod check;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "sideband-tomo", version, about = "Sideband-mode tomography by homodyne and resonator detection")]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Resonator noise coefficients against detuning, as CSV.
    Coeffs(CoeffsArgs),
    /// Synthetic scan files from an experiment configuration.
    Simulate(SimulateArgs),
    /// Weighted least-squares fit of scan files, with identifiability and
    /// a comparison against the model without hidden moments.
    Fit(FitArgs),
    /// Physicality and entanglement report for a state.
    Check(CheckArgs),
    /// Writes the embedded six-mode matrix and its covariance as CSV.
    ExportFixture(ExportArgs),
    /// Prints the default experiment configuration.
    DefaultConfig,
}

#[derive(Debug, Args)]
struct CoeffsArgs {
    /// Impedance matching parameter.
    #[arg(long, default_value_t = 0.9)]
    d: f64,
    /// Analysis frequency over cavity bandwidth.
    #[arg(long, default_value_t = 5.0)]
    omega_ratio: f64,
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    dmin: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    dmax: f64,
    #[arg(long, default_value_t = 401)]
    count: usize,
    /// Output file; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Experiment configuration (JSON); the built-in default if absent.
    #[arg(long, env = "SIDEBAND_TOMO_CONFIG")]
    config: Option<PathBuf>,
    /// Directory for the scan files.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Full,
    NoHidden,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Scan files; records of several files are fitted jointly.
    #[arg(long = "scan", required = true, num_args = 1..)]
    scans: Vec<PathBuf>,
    /// Configuration providing the cavities of RD beams.
    #[arg(long, env = "SIDEBAND_TOMO_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModelKind::Full)]
    model: ModelKind,
    /// Also write the text report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write `parameter,estimate,stderr` rows here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Δχ² per removed parameter needed to prefer the full model.
    #[arg(long, default_value_t = sideband_core::reconstruction::DEFAULT_COMPARE_THRESHOLD)]
    threshold: f64,
    /// Also report the nearest physical state.
    #[arg(long)]
    project: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["matrix", "fixture", "moments"])))]
struct CheckArgs {
    /// Covariance or spectral matrix CSV.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// The embedded six-mode matrix.
    #[arg(long)]
    fixture: bool,
    /// Single-beam moments `alpha,beta,gamma,delta`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_name = "A,B,G,D")]
    moments: Option<Vec<f64>>,
    /// Slack below 1 for the smallest symplectic eigenvalue.
    #[arg(long, default_value_t = sideband_core::modal::DEFAULT_PHYSICALITY_TOL)]
    tol: f64,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    out: PathBuf,
}

/// Why a command stopped.
#[derive(Debug)]
pub enum Failure {
    Core(sideband_core::Error),
    /// Input was read but failed a check; the report is already printed.
    Rejected(String),
}

impl From<sideband_core::Error> for Failure {
    fn from(e: sideband_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) if !e.is_validation() => 3,
            _ => 2,
        }
    }
}

/// Writes to standard output; a closed pipe (as with `| head`) is not an error.
pub fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Coeffs(a) => commands::coeffs(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Check(a) => check::run(&a),
        Command::ExportFixture(a) => commands::export_fixture(&a),
        Command::DefaultConfig => {
            emit(&format!("{}\n", sideband_core::io::ExperimentConfig::reference_default().to_json()));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::Rejected(why) => eprintln!("error: {why}"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
