//! `bellbound`: evaluate, attain and audit CHSH bounds for unsharp and biased
//! qubit observables.
//!
//! Exit codes: 0 success, 1 internal or i/o error, 2 invalid input or unmet
//! precondition, 3 unphysical state, 4 construction failure, 5 audit failure.

mod commands;
mod error;
mod output;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bellbound::bounds::CriterionId;
use bellbound::model::singlet;
use bellbound::oracle::{AuditCriterion, DEFAULT_TOLERANCE};
use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::scan::{parse_range, Family};
use error::{CliError, CliResult, EXIT_OK};
use scenario::{read_json, ScenarioFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct IoArgs {
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

impl IoArgs {
    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

#[derive(Debug, Parser)]
#[command(name = "bellbound", version, about = "Tight CHSH bounds for unsharp and biased qubit observables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate every applicable bound for a scenario file.
    Bound {
        #[arg(long)]
        input: PathBuf,
        /// Report only this criterion; fails if it does not apply.
        #[arg(long, value_parser = parse_criterion)]
        criterion: Option<CriterionId>,
    },
    /// Construct observables attaining a bound; the output is itself a
    /// scenario file.
    Achieve {
        #[arg(long)]
        input: PathBuf,
        /// One of thm1, thm2, cor1, cor4, thm3, thm4.
        #[arg(long, value_parser = parse_criterion, default_value = "thm1")]
        criterion: CriterionId,
    },
    /// Compare a bound with the numerical optimizer over seeded random trials.
    Verify {
        #[arg(long, value_parser = parse_audit)]
        criterion: AuditCriterion,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest accepted undershoot for attainable bounds.
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Sweep one parameter and tabulate the unbiased and biased bounds.
    Scan {
        #[arg(long, value_enum)]
        family: Family,
        /// START:END of the swept parameter.
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        range: (f64, f64),
        #[arg(long, default_value_t = 61)]
        steps: usize,
        /// Common strength of all four observables (werner and angle sweeps).
        #[arg(long, default_value_t = 1.0)]
        strength: f64,
        /// Scenario file supplying the state (strength and angle sweeps;
        /// singlet by default).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Joint-measurability verdicts for a pair of observables.
    Compat {
        /// JSON object with keys `x` and `xp`.
        #[arg(long)]
        input: PathBuf,
    },
}

fn parse_criterion(s: &str) -> Result<CriterionId, String> {
    s.parse().map_err(|e: bellbound::Error| e.to_string())
}

fn parse_audit(s: &str) -> Result<AuditCriterion, String> {
    s.parse().map_err(|e: bellbound::Error| e.to_string())
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("BELLBOUND_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::parse(format!("BELLBOUND_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::new(error::EXIT_INTERNAL, format!("thread pool: {e}")))
}

fn load(path: &Path) -> CliResult<(ScenarioFile, scenario::Resolved)> {
    let file: ScenarioFile = read_json(path)?;
    let resolved = file.resolve()?;
    Ok((file, resolved))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let io = &cli.io;
    match cli.command {
        Command::Bound { input, criterion } => {
            let (_, r) = load(&input)?;
            commands::bound::run(&r, criterion, io)
        }
        Command::Achieve { input, criterion } => {
            let (file, r) = load(&input)?;
            commands::achieve::run(&file, &r, criterion, io)
        }
        Command::Verify {
            criterion,
            trials,
            seed,
            tolerance,
        } => commands::verify::run(criterion, trials, seed, tolerance, io),
        Command::Scan {
            family,
            range,
            steps,
            strength,
            input,
        } => {
            let state = match (&input, family) {
                (Some(_), Family::WernerSweep) => {
                    return Err(CliError::parse("--input does not apply to werner-sweep"));
                }
                (Some(p), _) => load(p)?.1.state,
                (None, _) => singlet(),
            };
            commands::scan::run(family, range, steps, strength, &state, io)
        }
        Command::Compat { input } => commands::compat::run(&input, io),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
