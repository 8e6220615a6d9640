//! The `afhe` command line. [`run_cli`] is the whole program; `main` only
//! wires it to the process streams.
//!
//! Exit codes: 0 success, 1 when a gate check flags HISOAI or monitoring
//! triggers re-engineering, 2 for usage, input and runtime errors. Errors are
//! one JSON line on stderr: `{"error":"<code>","message":"..."}`.

mod args;
mod commands;

use std::ffi::OsString;
use std::io::{Read, Write};

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::{json, Value};

pub use args::Cli;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FLAGGED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub(crate) enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] afhe_core::Error),
}

impl From<afhe_core::ingest::ParseError> for CliError {
    fn from(e: afhe_core::ingest::ParseError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(afhe_core::Error::Io(e))
    }
}

impl CliError {
    fn diagnostic(&self) -> Value {
        match self {
            CliError::Usage(msg) => json!({"error": "usage", "message": msg}),
            CliError::Core(afhe_core::Error::Parse(p)) => json!({
                "error": p.kind.code(),
                "message": self.to_string(),
                "line": p.line,
                "key": p.kind.key(),
            }),
            CliError::Core(e) => json!({"error": e.code(), "message": e.to_string()}),
        }
    }
}

/// Runs one invocation. `argv[0]` is the program name.
pub fn run_cli<I, T>(
    argv: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
        Err(e) => {
            let message = e.render().to_string();
            let first = message
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            let _ = writeln!(stderr, "{}", json!({"error": "usage", "message": first}));
            return EXIT_ERROR;
        }
    };
    match commands::dispatch(cli, stdin, stdout) {
        Ok(code) => code,
        // A closed downstream pipe (`afhe simulate | head`) is not an error.
        Err(CliError::Core(afhe_core::Error::Io(e)))
            if e.kind() == std::io::ErrorKind::BrokenPipe =>
        {
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(
                stderr,
                "{}",
                afhe_core::ingest::canonical_line(&e.diagnostic())
            );
            EXIT_ERROR
        }
    }
}
