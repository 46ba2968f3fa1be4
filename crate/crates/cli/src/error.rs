use std::fmt;

use popscore::graph::GraphError;
use popscore::ingest::{FetchError, IngestError};
use popscore::scoring::ScoringError;
use popscore::stats::StatsError;
use serde::Serialize;

/// Error categories and their process exit codes.
///
/// | code | kind        |
/// |------|-------------|
/// | 0    | success     |
/// | 2    | config      |
/// | 3    | ingest      |
/// | 4    | data        |
/// | 5    | fetch       |
/// | 6    | computation |
/// | 7    | write       |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Config,
    Ingest,
    Data,
    Fetch,
    Computation,
    Write,
}

impl ErrorKind {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Ingest => 3,
            ErrorKind::Data => 4,
            ErrorKind::Fetch => 5,
            ErrorKind::Computation => 6,
            ErrorKind::Write => 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Config, message)
    }

    /// The single JSON line written to stderr.
    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: ErrorKind,
            exit_code: u8,
            message: &'a str,
        }
        serde_json::to_string(&Line {
            error: self.kind,
            exit_code: self.kind.exit_code(),
            message: &self.message,
        })
        .expect("error line serializes")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        let kind = match e {
            IngestError::Model(_) => ErrorKind::Data,
            _ => ErrorKind::Ingest,
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<FetchError> for CliError {
    fn from(e: FetchError) -> Self {
        let kind = match e {
            FetchError::Config(_) => ErrorKind::Config,
            _ => ErrorKind::Fetch,
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<popscore::model::ModelError> for CliError {
    fn from(e: popscore::model::ModelError) -> Self {
        CliError::new(ErrorKind::Data, e.to_string())
    }
}

impl From<ScoringError> for CliError {
    fn from(e: ScoringError) -> Self {
        CliError::new(ErrorKind::Computation, e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::new(ErrorKind::Computation, e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        let kind = match e {
            GraphError::StepsExceedRepoCount { .. } => ErrorKind::Config,
            _ => ErrorKind::Computation,
        };
        CliError::new(kind, e.to_string())
    }
}
