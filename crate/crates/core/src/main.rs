use std::process::ExitCode;

use clap::Parser;
use igei::cli::{execute, Cli};

fn main() -> ExitCode {
    execute(&Cli::parse())
}
