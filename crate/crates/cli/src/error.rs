use serde::Serialize;
use thiserror::Error;

/// Process exit codes.
pub mod code {
    pub const CHECKS_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const VALIDATION: i32 = 3;
    pub const NUMERICAL: i32 = 4;
    pub const IO: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] bendsta_core::Error),

    #[error("cannot write the run manifest {path}: {source}")]
    Manifest {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(bendsta_core::Error::Io { .. }) | CliError::Manifest { .. } => "io",
            CliError::Core(e) if e.is_validation() => "validation",
            CliError::Core(_) => "numerical",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "usage" => code::USAGE,
            "io" => code::IO,
            "validation" => code::VALIDATION,
            _ => code::NUMERICAL,
        }
    }

    /// One-line JSON record for stderr.
    pub fn record(&self, command: &str) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            status: &'static str,
            command: &'a str,
            kind: &'static str,
            exit_code: i32,
            message: String,
        }
        let record = Record {
            status: "error",
            command,
            kind: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        };
        serde_json::to_string(&record).expect("error record serializes")
    }
}

pub type CliResult<T> = Result<T, CliError>;
