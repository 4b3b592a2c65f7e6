use std::process::ExitCode;

use clap::Parser;
use structag_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match structag_cli::run(cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
