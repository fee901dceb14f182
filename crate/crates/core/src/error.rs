use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("requested {k} lines from a corpus of {available}")]
    SubsetTooLarge { k: u64, available: u64 },
    #[error("vocabulary is empty")]
    EmptyVocab,
    #[error("{0}")]
    InvalidQuery(String),
    #[error("evaluation set contains no tokens")]
    EmptyEvalSet,
    #[error("event with zero probability: {0}")]
    ZeroProbabilityEvent(String),
    #[error("no trainable tokens after vocabulary filtering")]
    EmptyTrainingStream,
    #[error("zero-norm vector")]
    ZeroVector,
    #[error("no question has all four words in the vocabulary")]
    NoApplicableQuestions,
    #[error("{0}")]
    DegenerateSample(String),
    #[error("{0}")]
    InvalidStatistic(String),
    #[error("{0} bins requested, at least 4 required")]
    TooFewBins(usize),
    #[error("{0}")]
    NumericalUnderflow(String),
    #[error("{0}")]
    ShapeMismatch(String),
    #[error("{0}")]
    InvalidParams(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Config(String),
    #[error("every replicate failed for metric {metric} at size {size}")]
    CellFailed { metric: String, size: u64 },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "IoError",
            Error::SubsetTooLarge { .. } => "SubsetTooLarge",
            Error::EmptyVocab => "EmptyVocab",
            Error::InvalidQuery(_) => "InvalidQuery",
            Error::EmptyEvalSet => "EmptyEvalSet",
            Error::ZeroProbabilityEvent(_) => "ZeroProbabilityEvent",
            Error::EmptyTrainingStream => "EmptyTrainingStream",
            Error::ZeroVector => "ZeroVector",
            Error::NoApplicableQuestions => "NoApplicableQuestions",
            Error::DegenerateSample(_) => "DegenerateSample",
            Error::InvalidStatistic(_) => "InvalidStatistic",
            Error::TooFewBins(_) => "TooFewBins",
            Error::NumericalUnderflow(_) => "NumericalUnderflow",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::InvalidParams(_) => "InvalidParams",
            Error::Parse(_) => "ParseError",
            Error::Config(_) => "ConfigError",
            Error::CellFailed { .. } => "CellFailed",
        }
    }
}
