use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use fairdiv::format::to_pretty;
use fairdiv_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(to_pretty(&outcome.document).as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(failure) => {
            eprintln!("error: {}", failure.error);
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
