use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of the operation (non-positive
    /// difficulty, negative price, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no price for hour starting {hour} (epoch {epoch})")]
    MissingHour { epoch: i64, hour: String },

    #[error("demand exceeds offered supply by {deficit} MW")]
    Shortage { deficit: f64 },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("network series does not cover {missing} hour(s), first missing hour starts {hour} (epoch {epoch})")]
    Coverage {
        epoch: i64,
        hour: String,
        missing: usize,
    },

    #[error("comparison undefined: {0}")]
    UndefinedComparison(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}:{line}: cadence error: {message}")]
    Cadence {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("scenario '{scenario}': {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_scenario(self, scenario: &str) -> Self {
        Error::Scenario {
            scenario: scenario.to_string(),
            source: Box::new(self),
        }
    }

    /// True for failures to read or write a file, as opposed to bad content.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Scenario { source, .. } => source.is_io(),
            _ => false,
        }
    }
}

pub(crate) fn hour_label(epoch: i64) -> String {
    chrono::DateTime::from_timestamp(epoch, 0)
        .map(|t| t.to_rfc3339())
        .unwrap_or_else(|| epoch.to_string())
}
