use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::sign::{sign_type, SignType};
use crate::coeffs::WeightSign;
use crate::error::{FloquetError, Result};
use crate::problem::Problem;
use crate::spectrum::{eigenvalues_in_box, real_bands, trace_curves, ComplexBox};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefinitenessRadius {
    /// `sqrt(2)` times the largest modulus of a non-real periodic or
    /// antiperiodic eigenvalue.
    pub r0: f64,
    /// Radius outside which every sampled real spectral point has the sign
    /// type of its half-line and no traced non-real spectrum lies.
    pub r_effective: f64,
}

const FIRST_HALF_WIDTH: f64 = 10.0;
const MAX_HALF_WIDTH: f64 = 640.0;
const MAX_ROOTS: usize = 100_000;
const SAMPLES_PER_BAND: usize = 16;
const CURVE_SEEDS: usize = 12;

fn is_non_real(z: Complex64) -> bool {
    z.im.abs() > 1e-8 * (1.0 + z.norm())
}

/// Largest modulus of a non-real root of `D = 2 cos t`, `t in {0, pi}`, in
/// the square of half-width `h`.
fn max_non_real(pr: &Problem, h: f64) -> Result<f64> {
    let bbox = ComplexBox::new(-h, h, -h, h)?;
    let mut m: f64 = 0.0;
    for t in [0.0, std::f64::consts::PI] {
        for r in eigenvalues_in_box(pr, t, bbox, MAX_ROOTS)?.roots {
            if is_non_real(r.lambda) {
                m = m.max(r.lambda.norm());
            }
        }
    }
    Ok(m)
}

/// `R0`, from boxes doubled until the non-real periodic and antiperiodic
/// eigenvalues stop changing, and the empirical radius `R_effective` from
/// sign types and traced curves in `[-W, W]`, `W = max(2 R0 + 10, 40)`.
pub fn definiteness_radius(pr: &Problem) -> Result<DefinitenessRadius> {
    let mut h = FIRST_HALF_WIDTH;
    let mut m = max_non_real(pr, h)?;
    loop {
        if h >= MAX_HALF_WIDTH {
            return Err(FloquetError::BoxCountUnstable {
                bbox: ComplexBox::new(-h, h, -h, h)?,
            });
        }
        let m2 = max_non_real(pr, 2.0 * h)?;
        h *= 2.0;
        if (m2 - m).abs() <= 1e-8 * (1.0 + m) {
            break;
        }
        m = m2;
    }
    let r0 = std::f64::consts::SQRT_2 * m;

    let w = (2.0 * r0 + 10.0).max(40.0);
    let signs = pr.cs().weight_signs()?;
    let definite = signs.iter().all(|&s| s == signs[0]);
    let expected = |x: f64| {
        if definite {
            if signs[0] == WeightSign::Positive {
                SignType::PositiveType
            } else {
                SignType::NegativeType
            }
        } else if x > 0.0 {
            SignType::PositiveType
        } else {
            SignType::NegativeType
        }
    };
    let mut r_eff: f64 = 0.0;
    for band in real_bands(pr, -w, w)? {
        for k in 0..SAMPLES_PER_BAND {
            let x = band.lo + (band.hi - band.lo) * (k as f64 + 0.5) / SAMPLES_PER_BAND as f64;
            match sign_type(pr, x) {
                Ok(v) if v.verdict == SignType::Undecided => {}
                Ok(v) if v.verdict != expected(x) => r_eff = r_eff.max(x.abs()),
                Ok(_) | Err(FloquetError::NotSpectral { .. }) | Err(FloquetError::NearCritical { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let bbox = ComplexBox::new(-w, w, -w, w)?;
    for curve in trace_curves(pr, bbox, CURVE_SEEDS)? {
        for p in &curve.points {
            if is_non_real(p.lambda) {
                r_eff = r_eff.max(p.lambda.norm());
            }
        }
    }
    Ok(DefinitenessRadius {
        r0,
        r_effective: r_eff,
    })
}
