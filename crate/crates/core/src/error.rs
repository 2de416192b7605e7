use thiserror::Error;

use crate::colgen::ConvergenceTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("failed to parse instance: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("column violates allocation invariants: {0}")]
    InvalidColumn(String),

    #[error("problem size {size} exceeds limit {limit}")]
    Size { size: usize, limit: usize },

    #[error("lp solver failure: {0}")]
    Solver(String),

    #[error("objective failed in generation {generation}: {source}")]
    Objective {
        generation: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("column generation hit the iteration cap of {limit}")]
    IterationLimit {
        limit: usize,
        trace: Box<ConvergenceTrace>,
    },

    #[error("empty convergence trace")]
    EmptyTrace,
}
