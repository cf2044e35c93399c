//! Configuration, dispatch and output for the `mhdrt` command.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, RunConfig};
pub use output::{emit, to_csv, to_json, to_json_value, Format, Metadata, ResultBundle};
pub use run::{run, Payload, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("{context}: {source}")]
    Run {
        context: String,
        #[source]
        source: mhdrt::Error,
    },

    #[error("{0}")]
    Unsupported(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Run { .. } => "run",
            CliError::Unsupported(_) => "unsupported",
            CliError::Io { .. } => "io",
            CliError::Serialize(_) => "serialize",
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Unsupported(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn run(context: impl Into<String>) -> impl FnOnce(mhdrt::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Run { context, source }
    }
}
