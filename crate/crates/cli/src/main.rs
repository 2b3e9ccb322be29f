use std::process::ExitCode;

use clap::Parser;
use stpz_cli::{run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(value) => {
            println!("{value}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("stpz: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
