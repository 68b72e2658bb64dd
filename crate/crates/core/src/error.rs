use thiserror::Error;

use crate::instance::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid instance: {0}")]
    Invalid(ValidationReport),

    #[error("expansion {0:?} is not in the feasible set")]
    InfeasibleExpansion(Vec<u32>),

    #[error("budget {budget} exceeds the total expansion limit {limit_sum}")]
    InfeasibleBudget { budget: u32, limit_sum: u64 },

    #[error("instance already contains a dummy hospital")]
    DummyPresent,

    #[error("enumeration guard exceeded: {what} needs {size} items, limit is {limit}")]
    GuardExceeded {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error("no feasible flow of value {required} (max {achieved})")]
    InfeasibleFlow { required: i64, achieved: i64 },

    #[error("baseline cost must be positive")]
    ZeroBaseline,

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("rejection sampling gave up after {0} draws")]
    RejectionLimit(usize),
}
