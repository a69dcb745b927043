//! `rydberg`: threshold scans, trajectory dumps, analytic comparisons and
//! scaling checks for driven one-dimensional hydrogen.
//!
//! Exit codes: 0 success, 1 property violation, 2 configuration error,
//! 3 numerical failure.

// `!(x > 0.0)` is used throughout on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{Outcome, Report};
use crate::config::{Command, Format, Overrides};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Maps a library error raised while handling config section `section`.
    pub fn core(section: &str, err: rydberg_core::Error) -> Self {
        match err {
            e if e.is_numerical() => CliError::Numerical(e.to_string()),
            rydberg_core::Error::Domain { what, detail } => CliError::config(format!("{section}.{what}"), detail),
            e => CliError::config(section, e.to_string()),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rydberg", version, about = "Ionisation thresholds of driven Rydberg atoms")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// JSON config file merged over the built-in defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one config key by dotted path; the value is parsed as JSON, else taken as a string.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Ensemble and pair-sampling seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for ensemble members. Never changes results.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Integrate one trajectory and dump every accepted step.
    Trajectory,
    /// Simulated threshold field at each s0 of the grid, with a power-law fit.
    Scan,
    /// Closed-form thresholds of every mechanism over the grid.
    Compare,
    /// Check that scaled trajectories depend only on (s0, F_s).
    ScalingCheck,
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let command = match cli.command {
        Sub::Trajectory => Command::Trajectory,
        Sub::Scan => Command::Scan,
        Sub::Compare => Command::Compare,
        Sub::ScalingCheck => Command::ScalingCheck,
    };
    let overrides = Overrides {
        config_file: cli.config,
        set: cli.set,
        output: cli.output,
        format: cli.format,
        seed: cli.seed,
    };
    let config = config::resolve(command, &overrides)?;
    if cli.jobs == 0 {
        return Err(CliError::config("--jobs", "must be at least 1"));
    }
    let Report { main, summary, outcome } = match command {
        Command::Trajectory => commands::trajectory(&config)?,
        Command::Scan => commands::scan(&config, cli.jobs)?,
        Command::Compare => commands::compare(&config)?,
        Command::ScalingCheck => commands::scaling_check(&config)?,
    };
    match &config.output_path {
        Some(path) => {
            output::write_atomic(path, &main)?;
            if let Some(summary) = summary {
                let mut side = path.clone().into_os_string();
                side.push(".summary.json");
                output::write_atomic(&PathBuf::from(side), &summary)?;
            }
        }
        None => print!("{main}"),
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .format_target(false)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::PropertyViolated) => ExitCode::from(1),
        Ok(Outcome::NumericalFailure) => ExitCode::from(3),
        Err(e) => {
            eprintln!("rydberg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
