//! The Floquet discriminant `D = tr L` and its `lambda`-derivatives.
//!
//! `Ddot` comes from the exact quadrature identity
//! `Ddot = -int_0^a w (psi(a) phi^2 + (p psi'(a) - phi(a)) phi psi - (p phi')(a) psi^2)`.
//! In the basis `(phi, psi)` its terms cancel badly when solutions grow
//! strongly across the cell. The integrand is then rewritten through the
//! Floquet solutions `u+-` (`L v+- = mu+- v+-`),
//!
//! ```text
//! Ddot = (mu+ - mu-) / det[v+ v-] * int_0^a w u+ u- dx,
//! ```
//!
//! with `u-` integrated backwards (on the mirrored cell), where it is
//! dominant. Close to `mu+ = mu-` a Cauchy-integral derivative of `D` is
//! the last resort; finite differences only cross-check.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::problem::Problem;
use crate::quadrature::composite_rule;
use crate::transfer::{solve_at, transfer, Mat2, TransferResult};

/// Cross-check residuals above this are flagged.
pub const CROSS_CHECK_FLAG: f64 = 1e-5;

/// Largest tolerated cancellation factor in the quadrature identity.
const MAX_CONDITION: f64 = 1e6;
/// Smallest `|mu+ - mu-| / |mu+|` for the Floquet-basis form.
const MIN_SPLIT: f64 = 1e-3;
const FLOQUET_PANELS: usize = 32;
const FLOQUET_ORDER: usize = 10;
const CONTOUR_RADIUS: f64 = 0.5;
const CONTOUR_POINTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DdotRoute {
    QuadratureFormula,
    NumericalDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantSample {
    pub lambda: Complex64,
    pub d: Complex64,
    pub ddot: Complex64,
    pub ddotdot: Complex64,
    pub ddot_route: DdotRoute,
    /// `|Ddot_quad - Ddot_diff| / (1 + |Ddot|)`.
    pub residual_cross_check: f64,
    pub flagged: bool,
}

pub fn eval_d(pr: &Problem, lambda: Complex64) -> Result<Complex64> {
    Ok(transfer(pr, lambda)?.trace())
}

/// `d/dlambda` of the four monodromy entries, from one transfer pass.
pub fn entry_derivatives_of(r: &TransferResult) -> Mat2 {
    let (f, fp, s, sp) = (r.phi_a, r.pphi_prime_a, r.psi_a, r.ppsi_prime_a);
    let (qff, qfs, qss) = (r.q_phiphi, r.q_phipsi, r.q_psipsi);
    [
        [f * qfs - s * qff, f * qss - s * qfs],
        [fp * qfs - sp * qff, fp * qss - sp * qfs],
    ]
}

pub fn ddot_of(r: &TransferResult) -> Complex64 {
    -r.psi_a * r.q_phiphi + (r.phi_a - r.ppsi_prime_a) * r.q_phipsi + r.pphi_prime_a * r.q_psipsi
}

/// Size of the terms of the quadrature identity relative to their sum.
pub fn ddot_condition(r: &TransferResult) -> f64 {
    let terms = (r.psi_a * r.q_phiphi).norm()
        + ((r.phi_a - r.ppsi_prime_a) * r.q_phipsi).norm()
        + (r.pphi_prime_a * r.q_psipsi).norm();
    let v = ddot_of(r).norm();
    if terms == 0.0 {
        1.0
    } else {
        terms / v
    }
}

/// Unit eigenvector of `l` for `mu` from the larger adjugate column of `l - mu`.
fn eigenvector(l: &Mat2, mu: Complex64) -> Option<[Complex64; 2]> {
    let c1 = [l[1][1] - mu, -l[1][0]];
    let c2 = [-l[0][1], l[0][0] - mu];
    let n = |c: &[Complex64; 2]| (c[0].norm_sqr() + c[1].norm_sqr()).sqrt();
    let c = if n(&c1) >= n(&c2) { c1 } else { c2 };
    let s = n(&c);
    (s > 0.0 && s.is_finite()).then(|| [c[0] / s, c[1] / s])
}

/// The quadrature identity in the Floquet basis, or `None` when the two
/// multipliers are too close for the basis to be well conditioned.
pub fn ddot_floquet(pr: &Problem, lambda: Complex64, r: &TransferResult) -> Result<Option<Complex64>> {
    let half = r.trace() * 0.5;
    let root = (half * half - 1.0).sqrt();
    let (m1, m2) = (half + root, half - root);
    let mu_p = if m1.norm() >= m2.norm() { m1 } else { m2 };
    let mu_m = 1.0 / mu_p;
    if (mu_p - mu_m).norm() < MIN_SPLIT * mu_p.norm() {
        return Ok(None);
    }
    let (Some(vp), Some(vm)) = (eigenvector(&r.l, mu_p), eigenvector(&r.l, mu_m)) else {
        return Ok(None);
    };
    let det = vp[0] * vm[1] - vm[0] * vp[1];
    if det.norm() < MIN_SPLIT {
        return Ok(None);
    }
    let a = pr.period();
    let rule = composite_rule(pr, 0.0, a, FLOQUET_PANELS, FLOQUET_ORDER);
    let xs: Vec<f64> = rule.iter().map(|&(x, _)| x).collect();
    let fwd = solve_at(pr, lambda, &xs)?;
    // u-(a - y) = mu- (v-0 phi~(y) - v-1 psi~(y)) on the mirrored cell
    let mirrored: Vec<f64> = xs.iter().rev().map(|&x| (a - x).clamp(0.0, a)).collect();
    let bwd = solve_at(&*pr.reflected()?, lambda, &mirrored)?;
    let n = xs.len();
    let mut integral = Complex64::new(0.0, 0.0);
    for (k, &(x, qw)) in rule.iter().enumerate() {
        let u = &fwd.values[k];
        let ub = &bwd.values[n - 1 - k];
        let up = vp[0] * u[0] + vp[1] * u[2];
        let um = mu_m * (vm[0] * ub[0] - vm[1] * ub[2]);
        integral += up * um * pr.cs().segments[pr.cs().segment_index(x)].w(x) * qw;
    }
    Ok(Some((mu_p - mu_m) / det * integral))
}

/// `Ddot` by the trapezoidal rule for `(1 / 2 pi i) oint D(z) / (z - lambda)^2 dz`.
pub fn ddot_contour(pr: &Problem, lambda: Complex64) -> Result<Complex64> {
    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..CONTOUR_POINTS {
        let e = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / CONTOUR_POINTS as f64);
        s += eval_d(pr, lambda + e * CONTOUR_RADIUS)? / e;
    }
    Ok(s / (CONTOUR_POINTS as f64 * CONTOUR_RADIUS))
}

/// `Ddot` for a computed transfer result, with the route used.
pub fn ddot_routed(pr: &Problem, lambda: Complex64, r: &TransferResult) -> Result<(Complex64, DdotRoute)> {
    if ddot_condition(r) <= MAX_CONDITION {
        return Ok((ddot_of(r), DdotRoute::QuadratureFormula));
    }
    if let Some(v) = ddot_floquet(pr, lambda, r)? {
        return Ok((v, DdotRoute::QuadratureFormula));
    }
    Ok((ddot_contour(pr, lambda)?, DdotRoute::NumericalDifference))
}

pub fn eval_ddot(pr: &Problem, lambda: Complex64) -> Result<Complex64> {
    Ok(d_and_ddot(pr, lambda)?.1)
}

pub fn entry_derivatives(pr: &Problem, lambda: Complex64) -> Result<Mat2> {
    Ok(entry_derivatives_of(&transfer(pr, lambda)?))
}

/// The quadrature identity, in the Floquet basis when the direct form is
/// ill-conditioned and the basis is available.
pub fn eval_ddot_quadrature(pr: &Problem, lambda: Complex64) -> Result<Complex64> {
    let r = transfer(pr, lambda)?;
    if ddot_condition(&r) > MAX_CONDITION {
        if let Some(v) = ddot_floquet(pr, lambda, &r)? {
            return Ok(v);
        }
    }
    Ok(ddot_of(&r))
}

/// `(D, Ddot)`, from a single pass unless the identity is ill-conditioned.
pub fn d_and_ddot(pr: &Problem, lambda: Complex64) -> Result<(Complex64, Complex64)> {
    let r = transfer(pr, lambda)?;
    Ok((r.trace(), ddot_routed(pr, lambda, &r)?.0))
}

/// Central difference `(D(lambda + h) - D(lambda - h)) / 2h`.
pub fn ddot_central_difference(pr: &Problem, lambda: Complex64, h: f64) -> Result<Complex64> {
    let hp = eval_d(pr, lambda + h)?;
    let hm = eval_d(pr, lambda - h)?;
    Ok((hp - hm) / (2.0 * h))
}

/// `Ddotdot` by Richardson extrapolation (two levels) of central differences
/// of `Ddot`, base step `1e-4 (1 + |lambda|)`.
pub fn eval_ddotdot(pr: &Problem, lambda: Complex64) -> Result<Complex64> {
    let h = 1e-4 * (1.0 + lambda.norm());
    let diff = |h: f64| -> Result<Complex64> {
        Ok((eval_ddot(pr, lambda + h)? - eval_ddot(pr, lambda - h)?) / (2.0 * h))
    };
    let (d0, d1, d2) = (diff(h)?, diff(h / 2.0)?, diff(h / 4.0)?);
    let r0 = (d1 * 4.0 - d0) / 3.0;
    let r1 = (d2 * 4.0 - d1) / 3.0;
    Ok((r1 * 16.0 - r0) / 15.0)
}

/// Full sample with the finite-difference cross-check at `h = 1e-5 (1 + |lambda|)`.
pub fn sample(pr: &Problem, lambda: Complex64) -> Result<DiscriminantSample> {
    let r = transfer(pr, lambda)?;
    let (d, (ddot, route)) = (r.trace(), ddot_routed(pr, lambda, &r)?);
    let fd = ddot_central_difference(pr, lambda, 1e-5 * (1.0 + lambda.norm()))?;
    let residual = (ddot - fd).norm() / (1.0 + ddot.norm());
    Ok(DiscriminantSample {
        lambda,
        d,
        ddot,
        ddotdot: eval_ddotdot(pr, lambda)?,
        ddot_route: route,
        residual_cross_check: residual,
        flagged: residual > CROSS_CHECK_FLAG,
    })
}
