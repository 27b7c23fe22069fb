use std::io;
use std::process::ExitCode;

use clap::Parser;
use fairalloc_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli, &mut io::stdout()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fairalloc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
