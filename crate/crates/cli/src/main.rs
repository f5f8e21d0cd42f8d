mod args;
mod commands;
mod config;

use std::fmt;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use crate::args::{Cli, Command};

/// Marks an error as a problem with the invocation rather than the run.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl fmt::Display) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.to_string()))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<bvsel::Error>() {
            return match e {
                bvsel::Error::Config(_)
                | bvsel::Error::OutOfRange { .. }
                | bvsel::Error::EnumerationCap { .. }
                | bvsel::Error::Parse { .. }
                | bvsel::Error::Dimension { .. }
                | bvsel::Error::Data(_) => 2,
                _ => 1,
            };
        }
    }
    1
}

fn dispatch(cli: Cli) -> Result<()> {
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()?;
    }
    match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Run(a) => commands::run(a),
        Command::Compare(a) => commands::compare(a),
        Command::Enumerate(a) => commands::enumerate(a),
        Command::IdealizedCheck(a) => commands::idealized_check(a),
    }
}

fn main() -> ExitCode {
    let parsed = config::merge_config(std::env::args_os().collect())
        .and_then(|args| Cli::try_parse_from(args).map_err(anyhow::Error::from));
    let cli = match parsed {
        Ok(cli) => cli,
        Err(err) => {
            if let Some(e) = err.downcast_ref::<clap::Error>() {
                let _ = e.print();
                return ExitCode::from(e.exit_code() as u8);
            }
            eprintln!("error: {err:#}");
            return ExitCode::from(exit_code(&err));
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
