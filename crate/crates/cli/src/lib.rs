//! Command implementations behind the `structag` binary.

pub mod args;
pub mod bench;
pub mod cluster;
mod error;
pub mod evaluate;
pub mod format;
pub mod generate;
pub mod manifest;

pub use error::{CliError, CliResult};

use args::{Cli, Command};

/// Process exit status of a finished command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// The command ran but its quality gate failed.
    GateFailed,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::GateFailed => 1,
        }
    }
}

pub fn run(cli: Cli) -> CliResult<Outcome> {
    match cli.command {
        Command::GenerateElman(a) => generate::run(&a).map(|_| Outcome::Success),
        Command::Cluster(a) => cluster::run(&a).map(|_| Outcome::Success),
        Command::Evaluate(a) => evaluate::run(&a),
        Command::Bench(a) => bench::run(&a).map(|_| Outcome::Success),
        Command::ExportGold(a) => evaluate::export_gold(&a).map(|_| Outcome::Success),
    }
}
