use thiserror::Error;

use crate::integrate::Refinement;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("variable index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not orthogonal (max deviation of RᵀR from I is {deviation:e})")]
    NotOrthogonal { deviation: f64 },

    #[error("functional is not contained in chaos {order}: found a coefficient of total degree {found}")]
    NotChaosPure { order: u32, found: u32 },

    #[error("tensor has order {got}, expected {expected}")]
    OrderMismatch { expected: usize, got: usize },

    #[error("no derivative oracle of order {order} (declared up to {declared})")]
    MissingOracle { order: usize, declared: usize },

    #[error(
        "expected-derivative bound refused at q = {q}: the estimate necessarily fails for q = 1 \
         (the chaos projection does not extend continuously to L¹)"
    )]
    ExpectedDerivativeAtQOne { q: f64 },

    #[error("integration did not converge after {} refinements (last value {:?})", history.len(), history.last().map(|r| r.value))]
    NotConverged { history: Vec<Refinement> },

    #[error("integrand evaluated to NaN at {point:?}")]
    NanIntegrand { point: Vec<f64> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical integration layer.
    pub fn is_integration_failure(&self) -> bool {
        matches!(self, Error::NotConverged { .. } | Error::NanIntegrand { .. })
    }
}
