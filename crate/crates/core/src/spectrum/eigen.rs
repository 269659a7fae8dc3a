use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::roots::{roots_in_box, Analytic};
use super::ComplexBox;
use crate::discriminant::{d_and_ddot, eval_ddotdot};
use crate::error::Result;
use crate::problem::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub lambda: Complex64,
    pub multiplicity: usize,
    /// `|D(lambda) - 2 cos t|` at the returned point.
    pub newton_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueList {
    pub t: f64,
    pub roots: Vec<Eigenvalue>,
    pub bbox: ComplexBox,
    /// Argument-principle count over the whole box.
    pub count: usize,
}

/// `D(lambda) - c` for a fixed level `c`.
pub(crate) struct Level<'a> {
    pub pr: &'a Problem,
    pub c: Complex64,
}

impl Analytic for Level<'_> {
    fn eval(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let (d, dd) = d_and_ddot(self.pr, z)?;
        Ok((d - self.c, dd))
    }

    fn second(&self, z: Complex64) -> Result<Complex64> {
        eval_ddotdot(self.pr, z)
    }
}

/// Eigenvalues of the fiber problem with Floquet parameter `t`, i.e. the
/// roots of `D(lambda) = 2 cos t` in `bbox`.
pub fn eigenvalues_in_box(pr: &Problem, t: f64, bbox: ComplexBox, max_roots: usize) -> Result<EigenvalueList> {
    let level = Level {
        pr,
        c: Complex64::new(2.0 * t.cos(), 0.0),
    };
    let search = roots_in_box(&level, bbox, max_roots)?;
    Ok(EigenvalueList {
        t,
        roots: search
            .roots
            .into_iter()
            .map(|r| Eigenvalue {
                lambda: r.z,
                multiplicity: r.multiplicity,
                newton_residual: r.residual,
            })
            .collect(),
        bbox: search.bbox,
        count: search.count,
    })
}
