//! `qfin` command-line front end.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::{CommandFactory, FromArgMatches};

use crate::cli::Cli;
use crate::error::{CliError, CliResult, EXIT_USAGE};
use crate::report::{emit_report, RunReport};

/// Parses argv (config file first, flags on top). Help and version requests
/// come back as `Err` carrying clap's own error so the caller can print them.
fn parse(args: Vec<OsString>) -> CliResult<Result<Cli, clap::Error>> {
    let args = config::expand_args(args)?;
    let cmd = Cli::command().mut_subcommands(|s| s.args_override_self(true).allow_negative_numbers(true));
    Ok(cmd
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m)))
}

fn execute(cli: &Cli) -> CliResult<()> {
    let start = Instant::now();
    let command = &cli.command;
    let common = command.common();
    let outcome = commands::run_command(command)?;
    let config = match command {
        cli::Command::Portfolio(a) => serde_json::to_value(a),
        cli::Command::Arbitrage(a) => serde_json::to_value(a),
        cli::Command::Features(a) => serde_json::to_value(a),
        cli::Command::Price(a) => serde_json::to_value(a),
        cli::Command::Var(a) => serde_json::to_value(a),
        cli::Command::QaeDemo(a) => serde_json::to_value(a),
        cli::Command::Anneal(a) => serde_json::to_value(a),
    }
    .expect("arguments serialise");
    let report = RunReport {
        command: command.name().to_string(),
        seed: common.seed,
        config,
        results: outcome.results,
        wall_time_seconds: common.record_timing.then(|| start.elapsed().as_secs_f64()),
    };
    let text = emit_report(&report);
    for (path, body) in &outcome.side_files {
        std::fs::write(path, body).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))?;
    }
    match &common.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Output(format!("cannot write to stdout: {e}"))),
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run(args: impl IntoIterator<Item = OsString>) -> i32 {
    let parsed = parse(args.into_iter().collect());
    let cli = match parsed {
        Ok(Ok(cli)) => cli,
        Ok(Err(e)) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
