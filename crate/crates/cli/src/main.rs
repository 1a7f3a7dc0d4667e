//! `hdx`: build coset-complex instances, run verification suites and
//! Monte Carlo experiments, and emit versioned JSON reports.
//!
//! The report goes to stdout; a human-readable summary goes to stderr.
//! Exit codes: 0 ok, 1 a check failed, 2 usage or invalid configuration,
//! 3 a size budget was exceeded.

mod commands;
mod config;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use hdx_core::report::Report;
use hdx_core::HdxError;

use config::{Args, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "hdx",
    version,
    about = "Coset complexes, their Tanner codes and local decoders"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    args: Args,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Construct an instance and write it to --out (JSON header + .bin sidecar).
    Build,
    /// Face counts and the spectral report.
    Stats,
    /// Assemble the Tanner code, compute its dimension and run the membership suite.
    Code,
    /// Dimension sweep of the vertex codes C_{dx,dy} over F_p.
    Localrate,
    /// Walk identities, binomial rank sweep and expander-mixing sampling.
    Identities,
    /// Monte Carlo of the agreement decoder on corrupted line ensembles.
    AgreeLocal,
    /// Monte Carlo of corruption followed by local correction.
    Correct,
    /// Products and translates of codewords.
    Multcheck,
    /// Merge the JSON reports given by --in.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Build => "build",
            Command::Stats => "stats",
            Command::Code => "code",
            Command::Localrate => "localrate",
            Command::Identities => "identities",
            Command::AgreeLocal => "agree-local",
            Command::Correct => "correct",
            Command::Multcheck => "multcheck",
            Command::Report => "report",
        }
    }
}

fn init_threads() -> Result<(), HdxError> {
    let Ok(v) = std::env::var("HDX_THREADS") else {
        return Ok(());
    };
    let n: usize =
        v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            HdxError::Parameter(format!("HDX_THREADS must be a positive integer, got {v:?}"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| HdxError::Parameter(format!("thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<Report, HdxError> {
    init_threads()?;
    let cfg = RunConfig::resolve(cli.command.name(), &cli.args)?;
    let start = Instant::now();
    let mut report = match cli.command {
        Command::Build => commands::build(&cfg)?,
        Command::Stats => commands::stats(&cfg)?,
        Command::Code => commands::code(&cfg)?,
        Command::Localrate => commands::localrate(&cfg)?,
        Command::Identities => commands::identities(&cfg)?,
        Command::AgreeLocal => commands::agree_local(&cfg)?,
        Command::Correct => commands::correct(&cfg)?,
        Command::Multcheck => commands::multcheck(&cfg)?,
        Command::Report => commands::merge(&cfg)?,
    };
    if cli.command != Command::Report {
        report.timing = Some(start.elapsed().as_secs_f64());
    }
    // build and code use --out for the instance and the parity export
    if let (Some(out), false) = (&cfg.out, matches!(cli.command, Command::Build | Command::Code)) {
        std::fs::write(out, report.to_json()? + "\n")?;
    }
    Ok(report)
}

fn error_exit(err: &HdxError) -> ExitCode {
    match err {
        HdxError::Budget { what, needed, limit } => {
            let msg = serde_json::json!({
                "error": "budget",
                "what": what,
                "needed": needed.to_string(),
                "limit": limit.to_string(),
            });
            eprintln!("{msg}");
            ExitCode::from(3)
        }
        HdxError::Parameter(_)
        | HdxError::Validation(_)
        | HdxError::Shape { .. }
        | HdxError::Io(_)
        | HdxError::Json(_) => {
            eprintln!("error: {err}");
            eprintln!("run `hdx --help` for usage");
            ExitCode::from(2)
        }
        HdxError::DivisionByZero(_) | HdxError::Inconsistent(_) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            for c in &report.checks {
                let status = serde_json::to_string(&c.status).unwrap_or_default();
                eprintln!("{:<32} {}", c.name, status.trim_matches('"'));
            }
            match report.to_json() {
                Ok(s) => println!("{s}"),
                Err(e) => return error_exit(&e),
            }
            if report.failed() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => error_exit(&e),
    }
}
