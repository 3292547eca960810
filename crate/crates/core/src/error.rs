use thiserror::Error;

/// Errors raised by the geometry, quadrature and integration routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` must be {requirement}, got {value}")]
    Domain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("finite-difference step {step} at coordinate {coordinate} leaves the parameter domain (theta = {value})")]
    StepLeavesDomain {
        coordinate: usize,
        value: f64,
        step: f64,
    },

    #[error("metric is not symmetric: |g[{i}][{j}] - g[{j}][{i}]| = {asymmetry}")]
    NotSymmetric { i: usize, j: usize, asymmetry: f64 },

    #[error("metric is not positive definite: leading principal minor {order} = {minor}")]
    NotPositiveDefinite { order: usize, minor: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("quadrature did not converge: max entry change {delta:e} exceeds {tolerance:e} when the node count was doubled")]
    QuadratureNonconvergence { delta: f64, tolerance: f64 },

    #[error("integration aborted at tau = {tau}: {reason}")]
    IntegrationAborted { tau: f64, reason: String },

    #[error("fit window [{start}, {end}] {problem}")]
    FitWindow {
        start: f64,
        end: f64,
        problem: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            requirement: "finite and > 0",
            value,
        })
    }
}

pub(crate) fn require_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            requirement: "finite",
            value,
        })
    }
}
