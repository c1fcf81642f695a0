mod args;
mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::error::CliError;

fn metadata() -> serde_json::Value {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "args": std::env::args().skip(1).collect::<Vec<_>>(),
        "unix_time": secs,
    })
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = config::resolve(&cli.global)?;
    let report = commands::run(&cli.command, &cfg)?;
    let meta = cfg.with_metadata.then(metadata);
    let text = report.render(cfg.format, meta.as_ref());
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Output(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kaonlab: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
