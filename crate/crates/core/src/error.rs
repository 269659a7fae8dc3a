use num_complex::Complex64;
use thiserror::Error;

use crate::coeffs::ValidationReport;
use crate::spectrum::ComplexBox;

#[derive(Debug, Error)]
pub enum FloquetError {
    #[error("coefficient set is invalid: {0}")]
    InvalidCoefficients(ValidationReport),

    #[error("malformed coefficient document at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("w changes sign strictly inside segment {segment} (re-segment the data)")]
    UnresolvableSign { segment: usize },

    #[error("integrator failed on segment {segment} over [{x_lo}, {x_hi}]: {reason}")]
    IntegratorFailure {
        segment: usize,
        x_lo: f64,
        x_hi: f64,
        reason: String,
    },

    #[error("argument-principle counts disagree on box {bbox:?}")]
    BoxCountUnstable { bbox: ComplexBox },

    #[error("more than {max} roots in the search box")]
    MaxRootsExceeded { max: usize },

    #[error("verification grid found uncovered spectrum at {uncovered:?}")]
    SeedExhaustion { uncovered: Vec<Complex64> },

    #[error("lambda = {lambda} is not a spectral point (D = {d})")]
    NotSpectral { lambda: f64, d: f64 },

    #[error("lambda = {lambda} is too close to a critical point (|Ddot| = {ddot_abs})")]
    NearCritical { lambda: f64, ddot_abs: f64 },

    #[error("no regular spectral curve adjacent to {lambda0}")]
    CurveMissing { lambda0: Complex64 },

    #[error("resolvent does not exist: |2 cos z - D(lambda)| = {distance}")]
    ResolventPole { distance: f64 },

    #[error("monodromy eigenvector is numerically ambiguous at {lambda}")]
    DegenerateEigenvector { lambda: Complex64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, FloquetError>;
