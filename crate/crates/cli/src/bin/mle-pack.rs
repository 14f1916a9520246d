use std::process::ExitCode;

use clap::Parser;
use mle_cli::pack::{run, Args};

fn main() -> ExitCode {
    let args = Args::parse();
    mle_cli::exit_with(run(&args, &mut std::io::stdout().lock()))
}
