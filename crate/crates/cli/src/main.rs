//! `p3tau`: single-point evaluations, the verification suite and parameter
//! sweeps, with JSON or CSV output.

mod args;
mod commands;
mod output;
mod sweep;

use args::Cli;
use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            // help and version requests are not failures
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    ExitCode::from(commands::run(&cli))
}
