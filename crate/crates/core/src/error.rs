use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the reconstruction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}: unrecognized file extension")]
    UnknownFormat(PathBuf),

    #[error("{0}: no points")]
    EmptyCloud(String),

    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot connect component containing node {component} ({size} nodes): no candidate bridge of positive length")]
    Unconnectable { component: usize, size: usize },

    #[error("node {0} is unreachable from the root")]
    Unreachable(usize),

    #[error("invalid skeleton: {0}")]
    InvalidSkeleton(String),

    #[error("frequency threshold {f_min} exceeds root frequency {root_freq}")]
    ThresholdTooHigh { f_min: u64, root_freq: u64 },

    #[error("missing trunk: {found} points in breast-height slab, need {required}")]
    MissingTrunk { found: usize, required: usize },

    #[error("implausible stem fit: radius {radius:.4} m")]
    ImplausibleFit { radius: f64 },

    #[error("no DBH available for tree {0}")]
    MissingDbh(i64),

    #[error("empty evaluation series")]
    EmptySeries,

    #[error("reference biomass must be positive (record {0})")]
    NonPositiveReference(usize),

    #[error("degenerate regression: reference values have zero variance or n < 2")]
    DegenerateRegression,

    #[error("group size {size} exceeds series length {n}")]
    GroupTooLarge { size: usize, n: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
