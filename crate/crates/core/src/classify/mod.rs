//! Classification of the spectrum: sign types of real spectral points,
//! critical points (zeros of `Ddot` on the spectrum) and their regularity,
//! negative squares of the definite companion, and definiteness radii.

mod critical;
mod diagnostic;
mod identity;
mod kappa;
mod radius;
mod sign;

pub use critical::{critical_point_report, critical_points, CriticalPointReport, CriticalVerdict};
pub use diagnostic::{singularity_diagnostic, EPS_MAX, EPS_MIN};
pub use identity::{verify_eigen_identity, IdentityCheck};
pub use kappa::{negative_squares, NegativeSquares};
pub use radius::{definiteness_radius, DefinitenessRadius};
pub use sign::{
    interval_partition, sign_type, sign_type_both_routes, IntervalType, SignRoute, SignType, SignTypeVerdict,
    TypedInterval,
};
