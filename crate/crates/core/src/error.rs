use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },

    #[error("field contains a non-finite value at node {index}")]
    NonFinite { index: usize },

    #[error("operation requires {expected} geometry")]
    Geometry { expected: &'static str },

    #[error("{what} did not converge: last residual {residual:.3e} (tolerance {tol:.3e})")]
    Unconverged {
        what: &'static str,
        residual: f64,
        tol: f64,
        history: Vec<f64>,
    },

    #[error("monotonicity lost at node {index}; refine the grid")]
    MonotonicityLost { index: usize },

    #[error("comparison bound violated at step {step} (value {value:.3e}, bound {bound:.3e}); time step too large")]
    CflViolation { step: usize, value: f64, bound: f64 },

    #[error("step budget {budget} exceeded (needed {needed}); use a larger epsilon or shorter horizon")]
    StepBudget { budget: usize, needed: usize },

    #[error("value {value:.6} lies outside the tabulated range [{lo:.6}, {hi:.6}]")]
    Extrapolation { value: f64, lo: f64, hi: f64 },

    #[error("degenerate {what}: {detail}")]
    Degenerate { what: &'static str, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        field,
        reason: reason.into(),
    }
}
