use std::process::ExitCode;

use fcc_fold::cli::{dispatch, Cli, CliError};

fn main() -> ExitCode {
    let cli = <Cli as clap::Parser>::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::RunsFailed { .. }) => {
            eprintln!("fccfold: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("fccfold: {e}");
            ExitCode::FAILURE
        }
    }
}
