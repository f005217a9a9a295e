//! Exit-code discipline: 0 success, 1 input error, 2 I/O failure, 3
//! leakage/validation failure, 4 query error. Malformed input never crashes.

use std::fmt;

use causallp_core::{
    BuildError, EmbedError, EvalError, IngestError, ModelError, SplitError, SynthError,
};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Io(String),
    Validation(String),
    Query(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Io(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Query(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg)
            | CliError::Io(msg)
            | CliError::Validation(msg)
            | CliError::Query(msg) => f.write_str(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<BuildError> for CliError {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SplitError> for CliError {
    fn from(e: SplitError) -> Self {
        match e {
            SplitError::Build(BuildError::Io(io)) => CliError::Io(io.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<EmbedError> for CliError {
    fn from(e: EmbedError) -> Self {
        match e {
            EmbedError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Io(io) => CliError::Io(io.to_string()),
            EvalError::Embed(inner) => inner.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Input(e.to_string())
    }
}
