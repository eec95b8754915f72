mod args;
mod commands;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

/// Environment variable fixing the worker thread count of sweeps.
const THREADS_ENV: &str = "BENDSTA_THREADS";

fn configure_threads() -> Result<(), error::CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| error::CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    // a pool already set up by the environment is fine
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let outcome = configure_threads().and_then(|()| commands::run(cli.command, argv));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(error::code::CHECKS_FAILED as u8),
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("{}", e.record(name));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
