use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::diagnostic::singularity_diagnostic;
use crate::discriminant::{d_and_ddot, ddot_routed, eval_ddotdot};
use crate::error::Result;
use crate::problem::Problem;
use crate::spectrum::roots::{roots_in_box, Analytic};
use crate::spectrum::ComplexBox;
use crate::transfer::transfer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalVerdict {
    Regular,
    Singular,
    NonSpectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointReport {
    pub lambda0: Complex64,
    /// `arccos(D0 / 2)` when `D0 in [-2, 2]`.
    pub t0: Option<f64>,
    pub d0: Complex64,
    pub ddot0: Complex64,
    pub ddotdot0: Complex64,
    pub psi_a: Complex64,
    pub pphi_prime_a: Complex64,
    pub verdict: CriticalVerdict,
    pub diagnostic_exponent: Option<f64>,
}

pub(crate) fn tolerance(lambda: Complex64) -> f64 {
    1e-8 * (1.0 + lambda.norm())
}

/// `Ddot` with `Ddotdot` from a central difference of `Ddot`.
struct DdotFn<'a>(&'a Problem);

impl Analytic for DdotFn<'_> {
    fn eval(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let h = 1e-6 * (1.0 + z.norm());
        let dd = d_and_ddot(self.0, z)?.1;
        let ddd = (d_and_ddot(self.0, z + h)?.1 - d_and_ddot(self.0, z - h)?.1) / (2.0 * h);
        Ok((dd, ddd))
    }

    fn second(&self, z: Complex64) -> Result<Complex64> {
        let h = 1e-4 * (1.0 + z.norm());
        Ok((self.eval(z + h)?.1 - self.eval(z - h)?.1) / (2.0 * h))
    }
}

/// Report for a zero `lambda0` of `Ddot`, including the non-spectral case.
pub fn critical_point_report(pr: &Problem, lambda0: Complex64) -> Result<CriticalPointReport> {
    let r = transfer(pr, lambda0)?;
    let d0 = r.trace();
    let tol = tolerance(lambda0);
    let spectral = d0.im.abs() <= tol && d0.re.abs() <= 2.0 + tol;
    let ddot0 = ddot_routed(pr, lambda0, &r)?.0;
    let ddotdot0 = eval_ddotdot(pr, lambda0)?;
    let verdict = if !spectral {
        CriticalVerdict::NonSpectral
    } else if (d0.re.abs() - 2.0).abs() <= tol
        && r.psi_a.norm() <= tol
        && r.pphi_prime_a.norm() <= tol
        && ddotdot0.norm() > tol
    {
        CriticalVerdict::Regular
    } else {
        CriticalVerdict::Singular
    };
    Ok(CriticalPointReport {
        lambda0,
        t0: spectral.then(|| (0.5 * d0.re).clamp(-1.0, 1.0).acos()),
        d0,
        ddot0,
        ddotdot0,
        psi_a: r.psi_a,
        pphi_prime_a: r.pphi_prime_a,
        verdict,
        diagnostic_exponent: None,
    })
}

/// Spectral critical points (zeros of `Ddot` with `D in [-2, 2]`) in `bbox`,
/// each classified regular or singular and probed by the integrability
/// diagnostic where an adjacent curve exists.
pub fn critical_points(pr: &Problem, bbox: ComplexBox) -> Result<Vec<CriticalPointReport>> {
    let search = roots_in_box(&DdotFn(pr), bbox, 10_000)?;
    let mut out = Vec::new();
    for root in search.roots {
        let z = snap_real(root.z);
        let mut rep = critical_point_report(pr, z)?;
        if rep.verdict == CriticalVerdict::NonSpectral {
            continue;
        }
        rep.diagnostic_exponent = singularity_diagnostic(pr, &rep).ok();
        out.push(rep);
    }
    Ok(out)
}

/// Real coefficients make the critical set conjugation symmetric; roots
/// found within rounding of the real axis are put on it.
fn snap_real(z: Complex64) -> Complex64 {
    if z.im.abs() <= 1e-12 * (1.0 + z.norm()) {
        Complex64::new(z.re, 0.0)
    } else {
        z
    }
}
