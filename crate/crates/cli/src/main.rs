use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use kgroute_cli::cli::{run, Cli, InvalidSchema, UsageError};

fn error_line(kind: &str, message: &str) {
    eprintln!("{}", serde_json::json!({"error": {"kind": kind, "message": message}}));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            error_line("usage", e.render().to_string().trim());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(u) = e.downcast_ref::<UsageError>() {
                error_line("usage", &u.0);
                return ExitCode::from(2);
            }
            let kind = if e.is::<InvalidSchema>() {
                "invalid_schema"
            } else {
                e.chain().find_map(|c| c.downcast_ref::<kgroute::Error>()).map_or("error", |k| k.kind())
            };
            error_line(kind, &format!("{e:#}"));
            ExitCode::FAILURE
        }
    }
}
