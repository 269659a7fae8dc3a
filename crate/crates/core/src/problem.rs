use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::coeffs::{CoefficientSet, PowerForm, SegmentForm};
use crate::error::{FloquetError, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MIN_TOL: f64 = 1e-14;
pub const MAX_TOL: f64 = 1e-3;

/// A validated coefficient set together with the integrator tolerance and a
/// precomputed decomposition of the period cell into propagation pieces.
#[derive(Debug, Clone)]
pub struct Problem {
    cs: CoefficientSet,
    tol: f64,
    pub(crate) pieces: Vec<Piece>,
    reflected: OnceLock<Arc<Problem>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) enum End {
    Lo,
    Hi,
}

#[derive(Debug, Clone)]
pub(crate) enum PieceKind {
    Constant { w: f64, p: f64, q: f64 },
    /// Integrated numerically in `s in [0, 1]`. With a graded end the map is
    /// `x = x_end -/+ L (distance in s)^m`, otherwise affine.
    General { graded: Option<(End, f64)> },
}

#[derive(Debug, Clone)]
pub(crate) struct Piece {
    pub seg: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub kind: PieceKind,
}

impl Problem {
    pub fn new(cs: CoefficientSet, tol: f64) -> Result<Self> {
        if !(MIN_TOL..=MAX_TOL).contains(&tol) {
            return Err(FloquetError::InvalidInput(format!(
                "tolerance {tol} outside [{MIN_TOL}, {MAX_TOL}]"
            )));
        }
        let report = cs.validate();
        if !report.is_valid() {
            return Err(FloquetError::InvalidCoefficients(report));
        }
        let pieces = build_pieces(&cs);
        Ok(Problem {
            cs,
            tol,
            pieces,
            reflected: OnceLock::new(),
        })
    }

    pub fn with_default_tol(cs: CoefficientSet) -> Result<Self> {
        Problem::new(cs, DEFAULT_TOL)
    }

    pub fn cs(&self) -> &CoefficientSet {
        &self.cs
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn period(&self) -> f64 {
        self.cs.period_a
    }

    /// The problem on the mirrored cell `x -> a - x`, built once.
    pub(crate) fn reflected(&self) -> Result<Arc<Problem>> {
        if let Some(p) = self.reflected.get() {
            return Ok(p.clone());
        }
        let p = Arc::new(Problem::new(self.cs.reflect(), self.tol)?);
        Ok(self.reflected.get_or_init(|| p).clone())
    }

    /// Same coefficients, different tolerance.
    pub fn with_tol(&self, tol: f64) -> Result<Self> {
        Problem::new(self.cs.clone(), tol)
    }

    /// Points where the coefficients may be non-smooth: breakpoints and
    /// singular power anchors, sorted.
    pub fn nodes(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.pieces.iter().map(|p| p.x_lo).collect();
        v.push(self.period());
        v
    }

    /// Singular anchors (graded piece ends) with their grading exponent.
    pub(crate) fn graded_points(&self) -> Vec<(f64, f64)> {
        self.pieces
            .iter()
            .filter_map(|p| match p.kind {
                PieceKind::General { graded: Some((End::Lo, m)) } => Some((p.x_lo, m)),
                PieceKind::General { graded: Some((End::Hi, m)) } => Some((p.x_hi, m)),
                _ => None,
            })
            .collect()
    }
}

fn near(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-12 * scale.max(1.0)
}

/// Exponent of the form at `x0` that matters for smoothness of the
/// integrand: `tau` for `w`, `q`, and `-tau` for `1/p`.
fn singular_exponent(form: &SegmentForm, x0: f64, scale: f64, reciprocal: bool) -> Option<f64> {
    match form {
        SegmentForm::PowerWeighted(f @ PowerForm { tau, anchor, .. }) if f.is_singular() && near(*anchor, x0, scale) => {
            Some(if reciprocal { -tau } else { *tau })
        }
        _ => None,
    }
}

fn build_pieces(cs: &CoefficientSet) -> Vec<Piece> {
    let a = cs.period_a;
    let mut pieces = Vec::new();
    for (i, seg) in cs.segments.iter().enumerate() {
        if let (SegmentForm::Constant(w), SegmentForm::Constant(p), SegmentForm::Constant(q)) =
            (&seg.w_form, &seg.p_form, &seg.q_form)
        {
            pieces.push(Piece {
                seg: i,
                x_lo: seg.x_lo,
                x_hi: seg.x_hi,
                kind: PieceKind::Constant { w: *w, p: *p, q: *q },
            });
            continue;
        }
        let mut cuts = vec![seg.x_lo, seg.x_hi];
        for form in [&seg.w_form, &seg.p_form, &seg.q_form] {
            if let SegmentForm::PowerWeighted(f) = form {
                if f.anchor > seg.x_lo && f.anchor < seg.x_hi && !near(f.anchor, seg.x_lo, a) && !near(f.anchor, seg.x_hi, a) {
                    cuts.push(f.anchor);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for win in cuts.windows(2) {
            let (lo, hi) = (win[0], win[1]);
            let exp_at = |x0: f64| -> Option<f64> {
                [
                    singular_exponent(&seg.w_form, x0, a, false),
                    singular_exponent(&seg.q_form, x0, a, false),
                    singular_exponent(&seg.p_form, x0, a, true),
                ]
                .into_iter()
                .flatten()
                .reduce(f64::min)
            };
            let grade = |t: f64| (6.0 / (1.0 + t)).ceil().clamp(1.0, 32.0);
            match (exp_at(lo), exp_at(hi)) {
                (Some(tl), Some(th)) => {
                    let mid = 0.5 * (lo + hi);
                    pieces.push(Piece {
                        seg: i,
                        x_lo: lo,
                        x_hi: mid,
                        kind: PieceKind::General { graded: Some((End::Lo, grade(tl))) },
                    });
                    pieces.push(Piece {
                        seg: i,
                        x_lo: mid,
                        x_hi: hi,
                        kind: PieceKind::General { graded: Some((End::Hi, grade(th))) },
                    });
                }
                (tl, th) => pieces.push(Piece {
                    seg: i,
                    x_lo: lo,
                    x_hi: hi,
                    kind: PieceKind::General {
                        graded: tl.map(|t| (End::Lo, grade(t))).or(th.map(|t| (End::Hi, grade(t)))),
                    },
                }),
            }
        }
    }
    pieces
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::Segment;

    #[test]
    fn rejects_out_of_range_tolerance() {
        let cs = CoefficientSet::hill(1.0, 0.0);
        assert!(Problem::new(cs.clone(), 1e-2).is_err());
        assert!(Problem::new(cs, 1e-15).is_err());
    }

    #[test]
    fn interior_singular_anchor_splits_segment() {
        let cs = CoefficientSet::new(
            1.0,
            vec![Segment::new(
                0.0,
                1.0,
                SegmentForm::PowerWeighted(PowerForm { rho: vec![1.0], tau: -0.5, anchor: 0.25 }),
                SegmentForm::Constant(1.0),
                SegmentForm::Constant(0.0),
            )],
        );
        let pr = Problem::with_default_tol(cs).unwrap();
        assert_eq!(pr.pieces.len(), 2);
        assert_eq!(pr.nodes(), vec![0.0, 0.25, 1.0]);
        let g = pr.graded_points();
        assert_eq!(g.len(), 2);
        assert!(g.iter().all(|&(x, m)| x == 0.25 && m == 12.0));
    }
}
