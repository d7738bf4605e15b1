use std::path::PathBuf;

use thiserror::Error;

/// Failures while reading or assembling trip data.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("required file `{0}` is missing from the feed")]
    MissingFile(String),
    #[error("failed to parse `{file}`: {source}")]
    Csv {
        file: String,
        #[source]
        source: csv::Error,
    },
    #[error("`{file}`: {message}")]
    Invalid { file: String, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("stop `{id}` has invalid coordinates ({lat}, {lon})")]
    InvalidCoordinate { id: String, lat: f64, lon: f64 },
    #[error("trip `{id}` ends at {end} s which is not after its start {start} s")]
    InvalidTripTimes { id: String, start: i64, end: i64 },
    #[error("route `{route}` is mapped to unknown depot `{depot}`")]
    UnknownDepot { route: String, depot: String },
    #[error("at least one depot is required")]
    NoDepots,
}

impl DataError {
    pub(crate) fn invalid(file: impl Into<String>, message: impl Into<String>) -> Self {
        DataError::Invalid {
            file: file.into(),
            message: message.into(),
        }
    }
}

/// Failures raised while building or solving block chaining instances.
#[derive(Debug, Error)]
pub enum BcpError {
    #[error("invalid energy parameters: {0}")]
    InvalidParams(String),
    #[error("block {block} consumes {consumption} s but the battery holds only {capacity} s")]
    BlockOutOfRange {
        block: u32,
        consumption: f64,
        capacity: f64,
    },
    #[error("duplicate block id {0}")]
    DuplicateBlock(u32),
    #[error("instance has {blocks} blocks, above the exact-solve limit of {limit}")]
    TooLarge { blocks: usize, limit: usize },
    #[error("no feasible chaining with next-day operability; block {block} cannot be served")]
    Infeasible { block: u32 },
    #[error("time limit reached before any feasible chaining was found")]
    TimeLimitWithoutIncumbent,
    #[error("subproblem {index} failed: {source}")]
    Subproblem {
        index: usize,
        #[source]
        source: Box<BcpError>,
    },
    #[error("graph bisection needs at least two vertices, got {0}")]
    TooFewVertices(usize),
    #[error("subproblem cap must be at least 2, got {0}")]
    InvalidCap(usize),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl BcpError {
    /// Innermost error, looking through subproblem wrappers.
    pub fn root(&self) -> &BcpError {
        match self {
            BcpError::Subproblem { source, .. } => source.root(),
            other => other,
        }
    }
}

/// Failures raised by the evaluation metrics.
#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{0} requires at least one element")]
    Empty(&'static str),
    #[error("no diesel vehicles were replaced ({dv_only} in baseline, {dv_scenario} in scenario)")]
    NoReplacement { dv_only: usize, dv_scenario: usize },
    #[error("reference objective must be positive, got {0}")]
    NonPositiveReference(f64),
}
