use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("schema error: missing column `{0}`")]
    MissingColumn(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("cardinality error: column `{column}` has {found} observed levels, expected 2")]
    Cardinality { column: String, found: usize },
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("data error at row {row}: {message}")]
    Data { row: usize, message: String },
    #[error("estimation error: {0}")]
    Estimation(String),
    #[error("bootstrap instability: {undefined} of {replicates} replicates undefined")]
    Instability { undefined: usize, replicates: usize },
    #[error("simulation error: variable `{variable}` is non-finite for unit {unit}")]
    Simulation { variable: String, unit: usize },
    #[error("not enumerable: {0}")]
    NotEnumerable(String),
    #[error("capacity error: exogenous state space has {size} configurations (limit {limit})")]
    Capacity { size: u128, limit: u128 },
    #[error("contract error: {0}")]
    Contract(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of the estimation machinery itself (as opposed to
    /// malformed inputs or configuration).
    pub fn is_estimation(&self) -> bool {
        matches!(
            self,
            Error::Estimation(_)
                | Error::Instability { .. }
                | Error::Simulation { .. }
                | Error::NotEnumerable(_)
                | Error::Capacity { .. }
                | Error::Contract(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
