//! Implementations behind the `mle-*` binaries. Each command writes its
//! report to the given writer so it can be exercised without a process.

pub mod analytics;
pub mod pack;
pub mod sim;
pub mod store;

pub type CliResult = Result<(), Box<dyn std::error::Error>>;

/// Runs a command and turns failures into an `error:` line and exit code 1.
pub fn exit_with(result: CliResult) -> std::process::ExitCode {
    match result {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::FAILURE
        }
    }
}
