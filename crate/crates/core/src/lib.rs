//! Spectral analysis of periodic Sturm–Liouville expressions
//! `(1/w)(-(p f')' + q f)` whose weight `w` may change sign.
//!
//! The engine works through the Floquet discriminant `D(lambda)`, the trace
//! of the monodromy matrix: the spectrum is `{lambda : D(lambda) in [-2, 2]}`.
//!
//! * [`coeffs`]: piecewise coefficient data, validation, turning points.
//! * [`transfer`]: monodromy matrix and period-cell quadratures.
//! * [`discriminant`]: `D`, its derivatives and cross-checks.
//! * [`spectrum`]: eigenvalues of the fiber problems, real bands, spectral curves.
//! * [`classify`]: sign types, critical points, negative squares, radii.
//! * [`greens`]: resolvent kernel of the fiber operators.

pub mod classify;
pub mod coeffs;
pub mod discriminant;
pub mod error;
pub mod greens;
mod problem;
pub mod quadrature;
pub mod spectrum;
pub mod transfer;

pub use coeffs::CoefficientSet;
pub use error::{FloquetError, Result};
pub use num_complex::Complex64;
pub use problem::{Problem, DEFAULT_TOL, MAX_TOL, MIN_TOL};
