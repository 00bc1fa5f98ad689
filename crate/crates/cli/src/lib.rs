//! Command-line front end for `taylorcheck-core`: problem-file IO, the
//! `solve`, `verify`, `compare` and `report` commands, and JSON/CSV output.
//!
//! Exit codes: 0 success or `Satisfied`, 1 error, 2 `Violated`,
//! 3 `Inconclusive`, 4 numeric blow-up or stability violation.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use sha2::{Digest, Sha256};
use taylorcheck_core::numeric::NumericError;
use taylorcheck_core::parse::{parse_problem, ParseError, ProblemSpec};
use taylorcheck_core::series::SeriesError;
use taylorcheck_core::verify::{Status, VerifyError};
use taylorcheck_core::ExprError;

pub mod commands;
pub mod config;
pub mod export;
pub mod report;

pub use config::Cli;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATED: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {message}", path.display())]
    Write { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(NumericError::BlowUp { .. } | NumericError::StabilityViolation { .. }) => EXIT_NUMERIC,
            _ => EXIT_ERROR,
        }
    }
}

pub fn status_exit_code(status: Status) -> i32 {
    match status {
        Status::Satisfied => EXIT_OK,
        Status::Violated => EXIT_VIOLATED,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Outcome { code: EXIT_OK, stdout: text, stderr: String::new() }
                }
                // usage errors share the generic error code so that 2 keeps meaning Violated
                _ => Outcome { code: EXIT_ERROR, stdout: String::new(), stderr: text },
            }
        }
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    match commands::dispatch(cli) {
        Ok((code, stdout)) => Outcome { code, stdout, stderr: String::new() },
        Err(e) => Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

/// A parsed problem file with its content hash.
pub struct Loaded {
    pub spec: ProblemSpec,
    pub sha256: String,
}

pub fn load_problem(path: &Path) -> Result<Loaded, CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    let sha256 = format!("{:x}", Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|_| CliError::Config(format!("{}: not valid UTF-8", path.display())))?;
    let spec = parse_problem(&text).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })?;
    Ok(Loaded { spec, sha256 })
}
