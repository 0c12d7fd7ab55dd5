//! `noisemt` command line front end.

pub mod args;
mod commands;
pub mod exec;
mod output;
pub mod overlay;

use std::ffi::OsString;

use clap::{CommandFactory, FromArgMatches};
use thiserror::Error;

pub use args::Cli;
pub use exec::{exec_translate, ExecError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] noisemt_core::Error),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Data(noisemt_core::Error::InvalidParam(_)) => EXIT_USAGE,
            _ => EXIT_DATA,
        }
    }
}

fn clap_exit(e: clap::Error) -> i32 {
    use clap::error::ErrorKind;
    let _ = e.print();
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
        _ => EXIT_USAGE,
    }
}

/// Parses `argv` (including the program name), applies environment and
/// config overrides, and runs the subcommand. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_env(argv, |k| std::env::var(k).ok())
}

pub fn run_with_env<I, T, F>(argv: I, env: F) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    F: Fn(&str) -> Option<String>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let mut cmd = Cli::command();
    let first = match cmd.try_get_matches_from_mut(argv.clone()) {
        Ok(m) => m,
        Err(e) => return clap_exit(e),
    };
    let extra = match overlay::extra_args(&cmd, &first, env) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let matches = if extra.is_empty() {
        first
    } else {
        match Cli::command().try_get_matches_from(argv.into_iter().chain(extra)) {
            Ok(m) => m,
            Err(e) => return clap_exit(e),
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => return clap_exit(e),
    };
    match commands::dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
