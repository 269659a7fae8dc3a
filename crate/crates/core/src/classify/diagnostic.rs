//! Integrability probe at a critical point: along an adjacent spectral curve
//! `lambda(t)`, the entries of `(L(lambda(t)) - e^{-it}) / Ddot(lambda(t))`
//! are square-integrable in `t` near `t0` exactly when the point is regular.

use num_complex::Complex64;

use super::critical::{CriticalPointReport, CriticalVerdict};
use crate::discriminant::{d_and_ddot, ddot_routed};
use crate::error::{FloquetError, Result};
use crate::problem::Problem;
use crate::transfer::transfer;

pub const EPS_MIN: f64 = 1e-4;
pub const EPS_MAX: f64 = 1e-2;
const N_EPS: usize = 16;

/// Point of the curve adjacent to `lambda0` at parameter `t`, from the local
/// expansion `D ~ D0 + Ddotdot0 (lambda - lambda0)^2 / 2` and Newton.
fn adjacent_point(pr: &Problem, rep: &CriticalPointReport, t: f64, branch: f64) -> Result<Option<Complex64>> {
    let c = 2.0 * t.cos();
    let delta = ((Complex64::new(c, 0.0) - rep.d0) * 2.0 / rep.ddotdot0).sqrt() * branch;
    if !delta.is_finite() {
        return Ok(None);
    }
    let Some(z) = newton_near_critical(pr, rep.lambda0 + delta, c)? else {
        return Ok(None);
    };
    // must stay on the branch rooted at lambda0
    let ok = (z - rep.lambda0).norm() <= 3.0 * delta.norm() + 1e-12 && (z - rep.lambda0 - delta).norm() <= 0.5 * delta.norm();
    Ok(ok.then_some(z))
}

/// Newton on `D = c` close to a critical point, where `Ddot` is small and
/// the step stalls at the rounding level of `D / Ddot`: accept on a small
/// step or on a residual at the rounding level of `D`.
fn newton_near_critical(pr: &Problem, z0: Complex64, c: f64) -> Result<Option<Complex64>> {
    let mut z = z0;
    for _ in 0..60 {
        let (d, dd) = d_and_ddot(pr, z)?;
        let res = (d - c).norm();
        let step = (d - c) / dd;
        if !step.is_finite() {
            return Ok(None);
        }
        if res <= 1e-14 * (1.0 + d.norm()) {
            return Ok(Some(z));
        }
        z -= step;
        if step.norm() <= 1e-13 * (1.0 + z.norm()) {
            return Ok(Some(z));
        }
    }
    Ok(None)
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Divergence exponent `beta`: with `|f/Ddot|^2 ~ eps^(-gamma)` along the
/// adjacent curve at `t = t0 + eps`, the integral over `[t0 + eps, ...]`
/// grows like `eps^(1 - gamma)`, so `beta = gamma - 1` (max over entries).
/// `beta <= 0` indicates integrability.
pub fn singularity_diagnostic(pr: &Problem, rep: &CriticalPointReport) -> Result<f64> {
    let missing = || FloquetError::CurveMissing { lambda0: rep.lambda0 };
    if rep.verdict == CriticalVerdict::NonSpectral {
        return Err(missing());
    }
    let t0 = rep.t0.ok_or_else(missing)?;
    let dirs: &[f64] = if t0 <= 0.0 {
        &[1.0]
    } else if t0 >= std::f64::consts::PI {
        &[-1.0]
    } else {
        &[1.0, -1.0]
    };
    let log_eps: Vec<f64> = (0..N_EPS)
        .map(|k| EPS_MIN.ln() + (EPS_MAX.ln() - EPS_MIN.ln()) * k as f64 / (N_EPS - 1) as f64)
        .collect();
    for &dir in dirs {
        'branch: for branch in [1.0, -1.0] {
            let mut logs: [Vec<f64>; 4] = Default::default();
            for &le in &log_eps {
                let t = t0 + dir * le.exp();
                let Some(z) = adjacent_point(pr, rep, t, branch)? else {
                    continue 'branch;
                };
                let r = transfer(pr, z)?;
                let dd = ddot_routed(pr, z, &r)?.0;
                let e = Complex64::from_polar(1.0, -t);
                let entries = [r.l[0][0] - e, r.l[0][1], r.l[1][0], r.l[1][1] - e];
                for (k, f) in entries.iter().enumerate() {
                    logs[k].push((f / dd).norm_sqr().ln());
                }
            }
            let peak = logs.iter().map(|l| l.iter().cloned().fold(f64::MIN, f64::max)).fold(f64::MIN, f64::max);
            let mut beta = f64::NEG_INFINITY;
            for l in &logs {
                let m = l.iter().cloned().fold(f64::MIN, f64::max);
                // skip entries that vanish identically relative to the others
                if m < peak - (1e-24f64).ln().abs() || !m.is_finite() {
                    continue;
                }
                let gamma = -slope(&log_eps, l);
                beta = beta.max(gamma - 1.0);
            }
            if beta.is_finite() {
                return Ok(beta);
            }
        }
    }
    Err(missing())
}
