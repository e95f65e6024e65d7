mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use exmart_core::Error;

use crate::args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Output(String),
    Internal(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    /// 1 configuration, 2 input or parse, 3 internal failure.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::InvalidConfig(_) | Error::InvalidPValue(_) | Error::InvalidTheta(_) => 1,
                Error::Parse { .. }
                | Error::Io { .. }
                | Error::UnknownPool(_)
                | Error::PoolExhausted { .. }
                | Error::UnknownLabel(_)
                | Error::DimensionMismatch { .. }
                | Error::SampleOutOfRange(_)
                | Error::TooFewSamples { .. }
                | Error::EmptyBag => 2,
                _ => 3,
            },
            CliError::Output(_) | CliError::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Output(m) => write!(f, "cannot write output {m}"),
            CliError::Internal(m) => write!(f, "{m}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(a) => commands::run(a),
        Command::Generate(a) => commands::generate(a),
        Command::Design(a) => commands::design(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
