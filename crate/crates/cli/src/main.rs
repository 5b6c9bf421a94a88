use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

mod commands;
mod config;
mod csv;
mod validate;

use config::{ConfigError, RunConfig};

const COMMANDS: [&str; 6] = ["spectrum", "heterodyne", "optimize", "map", "bound", "validate"];

/// Quantum-mixer Rydberg sensor simulations with CSV output.
#[derive(Debug, Parser)]
#[command(name = "rydmix", version)]
struct Args {
    /// One of spectrum, heterodyne, optimize, map, bound, validate.
    command: Option<String>,
    /// Same as the positional command.
    #[arg(long = "command", value_name = "NAME")]
    command_flag: Option<String>,
    /// Configuration file of `dotted.key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config {path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error("io: {0}")]
    Io(String),
    #[error("{0}")]
    Core(#[from] rydmix_core::Error),
    #[error("validate: {0} check(s) failed")]
    Validation(usize),
}

fn thread_pool() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("RYDMIX_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("RYDMIX_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig, CliError> {
    let (label, text) = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            (p.display().to_string(), text)
        }
        None => ("<defaults>".to_string(), String::new()),
    };
    RunConfig::from_text(&text).map_err(|source| CliError::Config { path: label, source })
}

fn run(args: Args) -> Result<(), CliError> {
    let command = match (args.command, args.command_flag) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Usage(format!("conflicting commands `{a}` and `{b}`")))
        }
        (Some(c), _) | (None, Some(c)) => c,
        (None, None) => {
            return Err(CliError::Usage(format!("missing command; expected one of {}", COMMANDS.join(", "))))
        }
    };
    if !COMMANDS.contains(&command.as_str()) {
        return Err(CliError::Usage(format!(
            "unknown command `{command}`; expected one of {}",
            COMMANDS.join(", ")
        )));
    }
    thread_pool()?;
    let cfg = load_config(args.config.as_ref())?;

    let csv = match command.as_str() {
        "spectrum" => commands::spectrum(&cfg)?,
        "heterodyne" => commands::heterodyne(&cfg)?,
        "optimize" => commands::optimize_one(&cfg)?,
        "map" => commands::map(&cfg)?,
        "bound" => commands::bound(&cfg)?,
        _ => {
            let checks = validate::run(&cfg)?;
            let failed = checks.iter().filter(|c| !c.pass).count();
            for c in &checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            return if failed == 0 {
                Ok(())
            } else {
                Err(CliError::Validation(failed))
            };
        }
    };
    match &args.out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rydmix: error: {e}");
            ExitCode::FAILURE
        }
    }
}
