use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use truncent_cli::{run, Cli, CliError, Output};

fn emit(output: &Output) -> Result<(), CliError> {
    match &output.out {
        Some(path) => std::fs::write(path, &output.text)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(output.text.as_bytes())
            .map_err(|e| CliError::io(format!("cannot write to stdout: {e}"))),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {}", e.message);
    if let Some(detail) = &e.detail {
        eprintln!("{}", serde_json::to_string_pretty(detail).unwrap_or_default());
    }
    ExitCode::from(e.code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(output) => {
            if let Err(e) = emit(&output) {
                return fail(&e);
            }
            if let Some(msg) = &output.message {
                eprintln!("error: {msg}");
            }
            ExitCode::from(output.code as u8)
        }
        Err(e) => fail(&e),
    }
}
