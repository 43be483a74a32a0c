use thiserror::Error;

use crate::numerics::QuadratureResult;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    #[error("quadrature did not converge on [{a}, {b}] (partial value {}, error estimate {})", partial.value, partial.error_estimate)]
    QuadratureNonConvergence { a: f64, b: f64, partial: QuadratureResult },

    #[error("unknown kernel id `{0}` (expected bspline:n, fejer, bochner-riesz:g or avg:m:<base>)")]
    UnknownKernel(String),

    #[error("unknown signal id `{0}`")]
    UnknownSignal(String),

    #[error("signal `{0}` is not absolutely continuous or has no closed-form derivative")]
    NotAbsolutelyContinuous(String),

    #[error("window [{a}, {b}] too small: need at least [{required_a}, {required_b}]")]
    WindowTooSmall {
        a: f64,
        b: f64,
        required_a: f64,
        required_b: f64,
    },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn param(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            detail: detail.into(),
        }
    }

    /// True for failures caused by a numerical routine running out of budget.
    pub fn is_non_convergence(&self) -> bool {
        matches!(self, Error::QuadratureNonConvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
