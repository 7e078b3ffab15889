// SPDX-License-Identifier: MIT OR Apache-2.0

#![forbid(unsafe_code)]

mod args;
mod commands;
mod error;
mod plot;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let (text, output) = match &cli.command {
        Command::Fit(a) => (commands::fit(a)?, &a.output),
        Command::Simulate(a) => (commands::simulate(a)?, &a.output),
        Command::Predict(a) => (commands::predict(a)?, &a.output),
        Command::Demo(a) => (commands::demo(a)?, &a.output),
    };
    emit(&text, output.as_deref())
}

/// Writes the finished document in one go, so failures never leave partial
/// output behind.
fn emit(text: &str, path: Option<&Path>) -> CliResult<()> {
    let result = match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    result.map_err(|e| CliError::Data(format!("writing output: {e}")))
}
