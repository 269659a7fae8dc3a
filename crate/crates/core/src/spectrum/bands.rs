use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discriminant::d_and_ddot;
use crate::error::{FloquetError, Result};
use crate::problem::Problem;

/// Slack on `|D| <= 2` so that tangential touching of `+-2` (closed gaps)
/// is not split by rounding.
pub(crate) const BAND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeKind {
    /// `|D| = 2` crossing.
    BandEdge,
    /// Clipped by the scan window.
    WindowEdge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    pub d_lo: f64,
    pub d_hi: f64,
    pub lo_kind: EdgeKind,
    pub hi_kind: EdgeKind,
    /// `Ddot` keeps one strict sign on the whole band.
    pub monotone: bool,
}

fn dd(pr: &Problem, x: f64) -> Result<(f64, f64)> {
    let (d, dot) = d_and_ddot(pr, Complex64::new(x, 0.0))?;
    Ok((d.re, dot.re))
}

/// Bisection for a sign change of `g` on `[a, b]`.
fn bisect<G: Fn(f64) -> Result<f64>>(g: G, mut a: f64, mut b: f64) -> Result<f64> {
    let ga = g(a)?;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m)?;
        if gm == 0.0 {
            return Ok(m);
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Maximal real intervals of `[lam_min, lam_max]` on which `D in [-2, 2]`.
pub fn real_bands(pr: &Problem, lam_min: f64, lam_max: f64) -> Result<Vec<Band>> {
    if !(lam_min < lam_max) || !lam_min.is_finite() || !lam_max.is_finite() {
        return Err(FloquetError::InvalidInput(format!("empty window [{lam_min}, {lam_max}]")));
    }
    let width = lam_max - lam_min;
    let n = ((4000.0 + 50.0 * width) as usize).min(200_000);
    let xs: Vec<f64> = (0..=n).map(|k| lam_min + width * k as f64 / n as f64).collect();
    let vals: Vec<(f64, f64)> = xs.par_iter().map(|&x| dd(pr, x)).collect::<Result<_>>()?;

    // each entry: (x, D, Ddot); narrow bands between samples are inserted
    let mut pts: Vec<(f64, f64, f64)> = Vec::with_capacity(xs.len());
    for k in 0..=n {
        pts.push((xs[k], vals[k].0, vals[k].1));
        if k == n {
            break;
        }
        let ((d0, s0), (d1, s1)) = (vals[k], vals[k + 1]);
        let dips_above = d0 > 2.0 && d1 > 2.0 && s0 < 0.0 && s1 > 0.0;
        let dips_below = d0 < -2.0 && d1 < -2.0 && s0 > 0.0 && s1 < 0.0;
        let jumps = d0.abs() > 2.0 && d1.abs() > 2.0 && d0 * d1 < 0.0;
        if dips_above || dips_below || jumps {
            let xc = if jumps {
                bisect(|x| Ok(dd(pr, x)?.0), xs[k], xs[k + 1])?
            } else {
                bisect(|x| Ok(dd(pr, x)?.1), xs[k], xs[k + 1])?
            };
            let (dc, sc) = dd(pr, xc)?;
            if dc.abs() <= 2.0 + BAND_SLACK {
                pts.push((xc, dc, sc));
            }
        }
    }

    let inside = |d: f64| d.abs() <= 2.0 + BAND_SLACK;
    let crossing = |a: (f64, f64, f64), b: (f64, f64, f64)| -> Result<f64> {
        let out = if inside(a.1) { b.1 } else { a.1 };
        let level = 2.0 * out.signum();
        bisect(|x| Ok(dd(pr, x)?.0 - level), a.0, b.0)
    };

    let mut bands = Vec::new();
    let mut k = 0;
    while k < pts.len() {
        if !inside(pts[k].1) {
            k += 1;
            continue;
        }
        let start = k;
        while k + 1 < pts.len() && inside(pts[k + 1].1) {
            k += 1;
        }
        let end = k;
        let (lo, lo_kind) = if start == 0 {
            (lam_min, EdgeKind::WindowEdge)
        } else {
            (crossing(pts[start - 1], pts[start])?, EdgeKind::BandEdge)
        };
        let (hi, hi_kind) = if end == pts.len() - 1 {
            (lam_max, EdgeKind::WindowEdge)
        } else {
            (crossing(pts[end], pts[end + 1])?, EdgeKind::BandEdge)
        };
        k += 1;
        if hi <= lo {
            continue;
        }
        let (d_lo, s_lo) = dd(pr, lo)?;
        let (d_hi, s_hi) = dd(pr, hi)?;
        let slopes = std::iter::once((lo, s_lo))
            .chain(pts[start..=end].iter().map(|p| (p.0, p.2)))
            .chain(std::iter::once((hi, s_hi)));
        let mut sign = 0.0;
        let mut monotone = true;
        for (x, s) in slopes {
            if s.abs() <= 1e-6 * (1.0 + x.abs()) || (sign != 0.0 && s.signum() != sign) {
                monotone = false;
                break;
            }
            sign = s.signum();
        }
        bands.push(Band {
            lo,
            hi,
            d_lo,
            d_hi,
            lo_kind,
            hi_kind,
            monotone,
        });
    }
    Ok(bands)
}
