use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

/// Process exit status for bad input: malformed files, invalid configs,
/// out-of-range indices.
pub const EXIT_INPUT: i32 = 2;
/// Process exit status for failures while computing or writing results.
pub const EXIT_RUNTIME: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("reading {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("config {path}, line {line}, column {column}: {message}")]
    ConfigParse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{context}: {source}")]
    Core {
        context: String,
        source: optpred::Error,
    },

    #[error("writing output: {0}")]
    Write(String),
}

impl CliError {
    pub fn core(context: impl Into<String>) -> impl FnOnce(optpred::Error) -> Self {
        let context = context.into();
        move |source| CliError::Core { context, source }
    }

    pub fn exit_code(&self) -> i32 {
        use optpred::Error as E;
        match self {
            CliError::Usage(_) | CliError::Read { .. } | CliError::ConfigParse { .. } => EXIT_INPUT,
            CliError::Write(_) => EXIT_RUNTIME,
            CliError::Core { source, .. } => match source {
                E::DimensionMismatch { .. }
                | E::InvalidDistribution(_)
                | E::NotInterior { .. }
                | E::InvalidDelta { .. }
                | E::InvalidArgument(_)
                | E::IndexOutOfRange { .. }
                | E::InvalidLoss(_)
                | E::ScheduleUndefined(_)
                | E::SupportViolation { .. }
                | E::Parse { .. }
                | E::Validation(_)
                | E::Io(_) => EXIT_INPUT,
                E::LatticeCapExceeded { .. }
                | E::NoConvergence { .. }
                | E::ConditionViolated { .. }
                | E::SingularMatrix
                | E::Imprecise { .. } => EXIT_RUNTIME,
            },
        }
    }

    fn kind(&self) -> &'static str {
        use optpred::Error as E;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Read { .. } => "io",
            CliError::ConfigParse { .. } => "parse",
            CliError::Write(_) => "output",
            CliError::Core { source, .. } => match source {
                E::Parse { .. } => "parse",
                E::Io(_) => "io",
                E::LatticeCapExceeded { .. } => "cap_exceeded",
                E::Imprecise { .. } => "imprecise",
                E::Validation(_) => "validation",
                _ if self.exit_code() == EXIT_INPUT => "invalid_input",
                _ => "runtime",
            },
        }
    }

    /// One-line JSON error record for stderr.
    pub fn record(&self) -> String {
        let mut rec = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        let (line, column) = match self {
            CliError::ConfigParse { line, column, .. } => (Some(*line), Some(*column)),
            CliError::Core {
                source: optpred::Error::Parse { line, column, .. },
                ..
            } => (Some(*line), Some(*column)),
            _ => (None, None),
        };
        if let (Some(line), Some(column)) = (line, column) {
            rec["line"] = json!(line);
            rec["column"] = json!(column);
        }
        if let CliError::Core {
            source: optpred::Error::LatticeCapExceeded { .. },
            ..
        } = self
        {
            rec["suggestion"] = json!("rerun with --method importance (or mc), or raise --cap");
        }
        rec.to_string()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
