use serde::{Deserialize, Serialize};

use crate::coeffs::{CoefficientSet, SegmentForm};
use crate::error::Result;
use crate::problem::Problem;
use crate::spectrum::{eigenvalues_in_box, ComplexBox};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativeSquares {
    pub t: f64,
    pub kappa: usize,
    pub lower_bound_used: f64,
    /// `max(kappa(0), kappa(pi))`.
    pub kappa_star: usize,
}

const SAMPLES: usize = 1024;
const MAX_ROOTS: usize = 10_000;
const MAX_EXTENSIONS: usize = 8;

/// `essinf(q / |w|)` over the cell. Exact for constant segments and for
/// segments with `q >= 0`; otherwise a dense sample minimum, flagged as
/// uncertified.
fn essinf_q_over_w(cs: &CoefficientSet) -> (f64, bool) {
    let mut inf = f64::INFINITY;
    let mut certified = true;
    for seg in &cs.segments {
        if let (SegmentForm::Constant(w), SegmentForm::Constant(q)) = (&seg.w_form, &seg.q_form) {
            inf = inf.min(q / w.abs());
            continue;
        }
        let mut seg_min = f64::INFINITY;
        let mut q_nonneg = true;
        for k in 0..SAMPLES {
            let x = seg.x_lo + seg.len() * (k as f64 + 0.5) / SAMPLES as f64;
            let (w, q) = (seg.w(x), seg.q(x));
            q_nonneg &= q >= 0.0;
            let r = q / w.abs();
            if r.is_finite() {
                seg_min = seg_min.min(r);
            }
        }
        // q >= 0 makes the segment irrelevant to min(0, essinf)
        certified &= q_nonneg;
        inf = inf.min(seg_min);
    }
    (inf, certified)
}

/// Roots of `D+(lambda) = 2 cos t` strictly left of the origin and right of
/// `lower`, counted with multiplicity.
fn count_negative(pr_plus: &Problem, t: f64, lower: f64) -> Result<usize> {
    let bbox = ComplexBox::new(lower, 0.5, -1.0, 1.0)?;
    let list = eigenvalues_in_box(pr_plus, t, bbox, MAX_ROOTS)?;
    let thr = 1e-8 * (1.0 + lower.abs());
    Ok(list
        .roots
        .iter()
        .filter(|r| r.lambda.re < -thr && r.lambda.re > lower)
        .map(|r| r.multiplicity)
        .sum())
}

fn kappa_at(pr_plus: &Problem, t: f64, essinf: f64, certified: bool) -> Result<(usize, f64)> {
    let mut lower = essinf.min(0.0) - 1.0;
    let mut k = count_negative(pr_plus, t, lower)?;
    if !certified {
        // widen until the count is stable
        for _ in 0..MAX_EXTENSIONS {
            let wider = 2.0 * lower - 1.0;
            let kw = count_negative(pr_plus, t, wider)?;
            lower = wider;
            if kw == k {
                break;
            }
            k = kw;
        }
    }
    Ok((k, lower))
}

/// Number of negative eigenvalues of the definite companion `T(t)`
/// (`w` replaced by `|w|`) with quasi-periodic parameter `t`.
pub fn negative_squares(pr: &Problem, t: f64) -> Result<NegativeSquares> {
    let pr_plus = Problem::new(pr.cs().abs_weight()?, pr.tol())?;
    let (essinf, certified) = essinf_q_over_w(pr.cs());
    let (kappa, lower_bound_used) = kappa_at(&pr_plus, t, essinf, certified)?;
    let k0 = kappa_at(&pr_plus, 0.0, essinf, certified)?.0;
    let kpi = kappa_at(&pr_plus, std::f64::consts::PI, essinf, certified)?.0;
    Ok(NegativeSquares {
        t,
        kappa,
        lower_bound_used,
        kappa_star: k0.max(kpi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn nonnegative_potential_has_no_negative_squares() {
        let pr = Problem::with_default_tol(CoefficientSet::square_well(0.0)).unwrap();
        for &t in &[0.0, 1.0, PI] {
            let ns = negative_squares(&pr, t).unwrap();
            assert_eq!(ns.kappa, 0);
            assert_eq!(ns.kappa_star, 0);
            assert_eq!(ns.lower_bound_used, -1.0);
        }
    }

    #[test]
    fn negative_constant_potential() {
        // D+ = 2 cos(pi sqrt(lambda + 1)): periodic roots -1, 3, ...; antiperiodic 0, 8, ...
        let pr = Problem::with_default_tol(CoefficientSet::hill(PI, -1.0)).unwrap();
        let ns = negative_squares(&pr, 0.0).unwrap();
        assert_eq!(ns.kappa, 1);
        assert_eq!(ns.kappa_star, 1);
        assert_eq!(ns.lower_bound_used, -2.0);
        assert_eq!(negative_squares(&pr, PI).unwrap().kappa, 0);
    }
}
