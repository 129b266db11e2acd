//! `logitboot` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 degenerate data, 3 numerical
//! failure, 4 I/O or parse error.

mod args;
mod commands;
mod manifest;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;

use args::{Cli, Command};
use commands::Failure;
use manifest::RunManifest;

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    exit_code: u8,
    message: String,
}

#[derive(Serialize)]
struct ErrorOutput<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    manifest: Option<&'a RunManifest>,
    error: ErrorBody<'a>,
}

fn report(failure: &Failure, manifest: Option<&RunManifest>, echo: bool) -> ExitCode {
    let code = failure.exit_code();
    let message = failure.message();
    if echo {
        eprintln!("error: {message}");
    }
    let body = ErrorOutput {
        manifest,
        error: ErrorBody {
            kind: failure.kind(),
            exit_code: code,
            message,
        },
    };
    let mut text = serde_json::to_string_pretty(&body).expect("error is serializable");
    text.push('\n');
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => report(
                    &Failure::Usage("a subcommand is required".into()),
                    None,
                    false,
                ),
                _ => {
                    let rendered = e.render().to_string();
                    let first = rendered.lines().next().unwrap_or_default();
                    let message = first.strip_prefix("error: ").unwrap_or(first).to_string();
                    report(&Failure::Usage(message), None, false)
                }
            };
        }
    };
    let outcome = match &cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Bootstrap(a) => commands::bootstrap(a),
        Command::Split(a) => commands::split(a),
        Command::Validate(a) => commands::validate(a),
        Command::Curves(a) => commands::curves(a),
        Command::Simulate(a) => commands::simulate_cmd(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (failure, manifest) = *err;
            report(&failure, manifest.as_ref(), true)
        }
    }
}
