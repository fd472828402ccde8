use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid control level c = {0}: must be finite and >= 0")]
    InvalidControl(f64),

    #[error("state lies outside the biological region: {bound}")]
    OutsideOmega { bound: String },

    #[error("mosquito population collapses (viability M = {viability}); only the trivial equilibrium exists")]
    MosquitoCollapse { viability: f64 },

    #[error("division by zero in {what}")]
    DivisionDomain { what: &'static str },

    #[error("no endemic equilibrium in the biological region: {reason}")]
    NoEndemic { reason: String },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("Newton refinement did not converge after {iterations} iterations (residual {residual:e})")]
    RefinementFailed { iterations: usize, residual: f64 },

    #[error("singular Jacobian during Newton refinement")]
    SingularJacobian,

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    EigenNoConvergence { iterations: usize },

    #[error("invalid tolerance {0}: must be finite and > 0")]
    InvalidTolerance(f64),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFinite { .. }
            | Error::InvalidParameter { .. }
            | Error::InvalidControl(_)
            | Error::OutsideOmega { .. }
            | Error::InvalidConfig(_)
            | Error::InvalidTolerance(_) => 2,
            Error::StepSizeUnderflow { .. }
            | Error::RefinementFailed { .. }
            | Error::SingularJacobian
            | Error::EigenNoConvergence { .. }
            | Error::DivisionDomain { .. } => 3,
            Error::MosquitoCollapse { .. } | Error::NoEndemic { .. } => 4,
        }
    }
}
