//! `dbar <command> <config.json> [--output-dir PATH]`
//!
//! Exit codes: 0 success, 1 invalid config, 2 numerical non-convergence,
//! 3 geometry failure, 4 verification failure.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dbar_core::Error;

use config::{Command, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "dbar", version, about = "Planar orthogonal polynomial and dbar-problem experiments")]
struct Args {
    /// One of solve-domain, orthopoly, verify, gfunction-scan.
    command: String,
    /// Path to the JSON run configuration.
    config: PathBuf,
    /// Overrides `output_dir` from the configuration.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(msg: impl Into<String>) -> Self {
        Failure { code: 1, message: msg.into() }
    }

    pub fn verification(msg: impl Into<String>) -> Self {
        Failure { code: 4, message: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::IndexOutOfRange { .. } | Error::OnBoundary(..) | Error::OnBranchCut(_) => 1,
            Error::CholeskyBreakdown { .. } | Error::NonConvergence { .. } | Error::Overflow(_) => 2,
            Error::SelfIntersection(..) | Error::NotStarShaped(_) | Error::OriginOutside => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

fn init_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("DBAR_THREADS") {
        let n: usize = v.parse().map_err(|_| Failure::config(format!("DBAR_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(Failure::config("DBAR_THREADS must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(args: Args) -> Result<(), Failure> {
    let command = Command::parse(&args.command).ok_or_else(|| {
        Failure::config(format!(
            "unknown command {:?}; expected solve-domain, orthopoly, verify or gfunction-scan",
            args.command
        ))
    })?;
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(c) = cfg.command {
        if c != command {
            eprintln!("note: config names command {}, running {}", c.name(), command.name());
        }
    }
    cfg.command = Some(command);
    if let Some(dir) = args.output_dir {
        cfg.output_dir = Some(dir);
    }
    if cfg.output_dir.is_none() {
        cfg.output_dir = Some(PathBuf::from("dbar-out"));
    }
    init_threads()?;
    commands::dispatch(command, &cfg)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
