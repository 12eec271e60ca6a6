use thiserror::Error;

pub type Result<T, E = NavError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NavError {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("bearing undefined between coincident points")]
    UndefinedBearing,

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("covariance lost positive semidefiniteness (min eigenvalue {min_eigenvalue:e})")]
    CovarianceNotPsd { min_eigenvalue: f64 },

    #[error("innovation covariance is singular or ill-conditioned (condition number {condition:e})")]
    IllConditionedInnovation { condition: f64 },

    #[error("unknown landmark id {0}")]
    UnknownLandmark(u32),

    #[error("measurement channel {0} requires a landmark")]
    MissingLandmark(&'static str),

    #[error("navigation dynamics are singular at rho = {rho:e} m")]
    SingularDynamics { rho: f64 },
}

impl NavError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        NavError::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
