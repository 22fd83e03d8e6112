//! JSON front end for `mroot`: strict input documents, subcommands as
//! functions, and reproducible result documents.

pub mod commands;
pub mod document;
pub mod output;

pub use commands::{Options, Outcome, VerifySource};
pub use document::{Component, FieldDocument, JacobianDocument, TensorDocument};
pub use output::{Field, ResultDocument};

pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_PARITY: i32 = 3;
pub const EXIT_CAP: i32 = 4;

/// A failure that produces no result document, only a message and exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn schema(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_SCHEMA,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<mroot::Error> for CliError {
    fn from(e: mroot::Error) -> Self {
        let code = match e {
            mroot::Error::UnsupportedParity { .. } => EXIT_PARITY,
            mroot::Error::CapExceeded { .. } => EXIT_CAP,
            _ => EXIT_SCHEMA,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}
