//! `curl-lambda`: batch front end for the right-inverse, conjugate, Maxwell
//! and Neumann solvers, plus the verification suites.
//!
//! Exit codes: 0 success, 2 bad input (flags, config, files), 3 numerical
//! precondition failure or a failed verification check.

mod commands;
mod config;
mod output;
mod sources;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use curl_lambda::verify::{Suite, SuiteConfig};
use curl_lambda::{ToleranceProfile, Tolerances};

use crate::commands::{Ctx, Direction};
use crate::config::Config;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] curl_lambda::Error),
    #[error("{0}")]
    ChecksFailed(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("io: {e}"))
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
            CliError::ChecksFailed(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "curl-lambda", version, about = "Solvers built on the right inverse of curl + lambda")]
struct Cli {
    /// JSON run configuration (required by every command except verify).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files; config output paths are relative to it.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (0 = all cores); falls back to CURL_LAMBDA_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value = "default", value_parser = ["strict", "default", "relaxed"])]
    tolerance_profile: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve curl w + lambda w = g with w = R_lambda[g].
    SolveCurl,
    /// Complete a Helmholtz scalar or vector field to a lambda-monogenic one.
    Conjugate {
        #[arg(long, value_enum)]
        direction: Direction,
    },
    /// Time-harmonic Maxwell system in an achiral medium.
    Maxwell {
        /// Solve the chiral system with this chirality measure instead.
        #[arg(long, value_name = "BETA")]
        chiral: Option<f64>,
    },
    /// Time-harmonic Maxwell system in a chiral medium (beta from the config).
    Chiral,
    /// Neumann problem for curl w + lambda w = g in a ball.
    Neumann,
    /// Run the named verification checks.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Resolution preset: desk or reference.
        #[arg(long, default_value = "desk")]
        preset: String,
        /// Report file name, relative to --out.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn thread_count(flag: Option<usize>) -> Result<usize, CliError> {
    match flag {
        Some(k) => Ok(k),
        None => match std::env::var("CURL_LAMBDA_THREADS") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("CURL_LAMBDA_THREADS must be a count, got `{v}`"))),
            Err(_) => Ok(0),
        },
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let threads = thread_count(cli.threads)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    let profile: ToleranceProfile = cli.tolerance_profile.parse().map_err(CliError::Input)?;
    let profile_name = match profile {
        ToleranceProfile::Strict => "strict",
        ToleranceProfile::Default => "default",
        ToleranceProfile::Relaxed => "relaxed",
    };
    let ctx = Ctx {
        out: cli.out,
        tol: Tolerances::new(profile),
        profile: profile_name,
        threads: rayon::current_num_threads(),
    };
    let load = || -> Result<Config, CliError> {
        let path = cli
            .config
            .as_ref()
            .ok_or_else(|| CliError::Input("this command needs --config <path>".into()))?;
        Config::load(path)
    };
    match cli.command {
        Command::SolveCurl => commands::solve_curl(&load()?, &ctx),
        Command::Conjugate { direction } => commands::conjugate(&load()?, &ctx, direction),
        Command::Maxwell { chiral } => commands::maxwell(&load()?, &ctx, chiral, "maxwell"),
        Command::Chiral => commands::maxwell(&load()?, &ctx, None, "chiral"),
        Command::Neumann => commands::neumann(&load()?, &ctx),
        Command::Verify { suite, preset, report } => {
            let suite: Suite = suite.parse().map_err(|e: curl_lambda::Error| CliError::Input(e.to_string()))?;
            let preset: SuiteConfig = preset.parse().map_err(|e: curl_lambda::Error| CliError::Input(e.to_string()))?;
            if commands::verify(&ctx, suite, preset, report.as_deref())? {
                Ok(())
            } else {
                Err(CliError::ChecksFailed("some verification checks failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
