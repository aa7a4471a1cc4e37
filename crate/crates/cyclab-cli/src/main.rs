//! `cyclab`: umbrella CLI for the cyclab numerical suite.
//!
//! Exit codes: 0 success, 2 tolerance-verdict failure, 3 config or runtime
//! error. The environment variable CYCLAB_THREADS caps internal parallelism.

mod args;
mod commands;
mod pipeline;
mod presets;
mod report;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("CYCLAB_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                cyclab_core::par::configure_thread_cap(n);
            }
            _ => {
                eprintln!("error: CYCLAB_THREADS must be a positive integer, got '{v}'");
                return ExitCode::from(3);
            }
        }
    }

    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    let _ = e.print();
                    ExitCode::from(3)
                }
            };
        }
    };

    match commands::dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
