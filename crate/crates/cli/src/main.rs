//! Command-line driver: builds a problem, runs one of the solver or
//! diagnostic pipelines, and emits plot-ready CSV.
//!
//! Exit codes: 0 success, 1 bad configuration, 2 solver did not converge
//! for at least one parameter value, 3 file I/O failure.

mod commands;
mod config;

use clap::Parser;

use config::Cli;

fn main() {
    // INFGMRES_THREADS caps the per-parameter evaluation parallelism
    if let Ok(value) = std::env::var("INFGMRES_THREADS") {
        match value.parse::<usize>() {
            Ok(threads) if threads >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
            _ => {
                eprintln!("error: INFGMRES_THREADS must be a positive integer, got '{value}'");
                std::process::exit(1);
            }
        }
    }

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not configuration errors
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                std::process::exit(0);
            }
            let _ = e.print();
            std::process::exit(1);
        }
    };

    std::process::exit(commands::run(cli));
}
