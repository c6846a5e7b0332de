use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A field of an instance breaks one of the model invariants.
    #[error("invalid field `{field}`: {message}")]
    InvalidInstance { field: &'static str, message: String },

    #[error("x = {x} is outside the domain of f_{index}")]
    Domain { index: usize, x: f64 },

    #[error("objective has no derivative; continuous mode needs one")]
    MissingDerivative,

    #[error("continuous mode requires an accuracy epsilon > 0")]
    MissingEpsilon,

    #[error("{0}")]
    ModeMismatch(String),

    #[error("non-integer value {value} in `{field}` for integer mode")]
    NonInteger { field: &'static str, value: f64 },

    #[error("infeasible subproblem: target {target} outside [{min}, {max}]")]
    InfeasibleSubproblem { target: f64, min: f64, max: f64 },

    #[error("objective returned NaN for variable {index}")]
    NotANumber { index: usize },

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("family not hull-eligible")]
    NotHullEligible,

    #[error("hull solution not applicable: bound binding at variable {index}")]
    HullNotApplicable { index: usize },

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("m > n ({m} > {n})")]
    TooManyConstraints { n: usize, m: usize },

    #[error("time limit exceeded")]
    TimeLimit,

    #[error("custom objectives cannot be serialized")]
    NotSerializable,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidInstance {
            field,
            message: message.into(),
        }
    }

    /// The instance field an [`Error::InvalidInstance`] refers to.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            Error::InvalidInstance { field, .. } | Error::NonInteger { field, .. } => Some(field),
            _ => None,
        }
    }
}
