use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("contraction index {r} out of range for orders {n} and {m}")]
    ContractionOutOfRange { r: usize, n: usize, m: usize },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("chaos vector has a non-zero expectation; (-L)^-1 needs a centred input")]
    NotCentered,

    #[error("moment oracle guard exceeded: {factors} factors (limit {limit})")]
    GuardExceeded { factors: usize, limit: usize },

    #[error("alpha = {0} is excluded (alpha must avoid 1, 2 and 2/3)")]
    ExcludedAlpha(f64),

    #[error("kernel order {0} is odd; this quantity needs an even order")]
    OddOrder(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("density is not normalised: integral = {0}")]
    NotNormalized(f64),

    #[error("drift is not centred under the density: integral of b*p = {0}")]
    DriftNotCentered(f64),

    #[error("diffusion coefficient is not positive at x = {x} (a = {value})")]
    SignViolation { x: f64, value: f64 },

    #[error("test function is not integrable against the target: {0}")]
    NonIntegrable(String),

    #[error("moment of order {order} is infinite for this coefficient")]
    InfiniteMoment { order: usize },

    #[error("leading coefficient of the moment recursion vanishes at order {order}")]
    VanishingCoefficient { order: usize },

    #[error("simulation diverged at step {step} (state {state})")]
    SimulationOverflow { step: u64, state: f64 },

    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    /// Validation errors are caused by bad input rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Quadrature(_)
                | Error::GuardExceeded { .. }
                | Error::SimulationOverflow { .. }
                | Error::NotNormalized(_)
                | Error::DriftNotCentered(_)
                | Error::SignViolation { .. }
        )
    }

    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
