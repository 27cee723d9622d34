use std::io;
use std::path::PathBuf;

use thiserror::Error;

use gls::analysis::AnalysisError;
use gls::format::FormatError;
use gls::sampling::SamplingError;
use gls::toggles::ToggleError;
use gls::{EngineError, GraphError, WorldError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: FormatError,
    },
    #[error(transparent)]
    Toggle(#[from] ToggleError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl BenchError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 usage, 2 I/O, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) | BenchError::Toggle(_) => 1,
            BenchError::MissingInput(_) | BenchError::Io { .. } | BenchError::Parse { .. } | BenchError::Csv(_) => 2,
            _ => 3,
        }
    }
}
