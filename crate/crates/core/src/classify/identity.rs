use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discriminant::ddot_routed;
use crate::error::{FloquetError, Result};
use crate::problem::Problem;
use crate::quadrature::composite_rule;
use crate::transfer::{solve_at, transfer, Mat2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    /// `|lhs - rhs|` relative to the natural size of the two sides.
    pub residual: f64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// Both adjugate columns vanish (`L` is the scalar `e^{it}`), so the
    /// identity holds with both sides zero.
    pub trivial: bool,
}

const PANELS: usize = 32;
const ORDER: usize = 10;

/// Unit eigenvector of `l` for the eigenvalue `mu` from the larger column
/// of `adj(l - mu)`, with the column norm relative to `|l| + 1`.
fn eigenvector(l: &Mat2, mu: Complex64) -> (Option<[Complex64; 2]>, f64) {
    let m = [[l[0][0] - mu, l[0][1]], [l[1][0], l[1][1] - mu]];
    let c1 = [m[1][1], -m[1][0]];
    let c2 = [-m[0][1], m[0][0]];
    let n = |c: &[Complex64; 2]| (c[0].norm_sqr() + c[1].norm_sqr()).sqrt();
    let (c, s) = if n(&c1) >= n(&c2) { (c1, n(&c1)) } else { (c2, n(&c2)) };
    let scale = 1.0 + l.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let rel = s / scale;
    if s == 0.0 {
        return (None, rel);
    }
    (Some([c[0] / s, c[1] / s]), rel)
}

/// Checks `psi(a) [f, g] = -f(0) conj(g(0)) Ddot(lambda)` for eigenfunctions
/// `f` of `A(t)` at `lambda` and `g` at `conj(lambda)`. With real
/// coefficients, `conj(g) = w0 phi + w1 psi` where `L w = e^{-it} w`, so
/// everything is evaluated at `lambda`.
pub fn verify_eigen_identity(pr: &Problem, t: f64, lambda: Complex64) -> Result<IdentityCheck> {
    let r = transfer(pr, lambda)?;
    let (v, sv) = eigenvector(&r.l, Complex64::from_polar(1.0, t));
    let (w, sw) = eigenvector(&r.l, Complex64::from_polar(1.0, -t));
    let (Some(v), Some(w)) = (v, w) else {
        return Ok(trivial());
    };
    if sv <= 1e-10 || sw <= 1e-10 {
        return Ok(trivial());
    }
    if sv < 1e-6 || sw < 1e-6 {
        return Err(FloquetError::DegenerateEigenvector { lambda });
    }
    let rule = composite_rule(pr, 0.0, pr.period(), PANELS, ORDER);
    let xs: Vec<f64> = rule.iter().map(|&(x, _)| x).collect();
    let tr = solve_at(pr, lambda, &xs)?;
    let (mut form, mut size) = (Complex64::new(0.0, 0.0), 0.0);
    for ((x, qw), u) in rule.iter().zip(&tr.values) {
        let ww = pr.cs().segments[pr.cs().segment_index(*x)].w(*x);
        let f = v[0] * u[0] + v[1] * u[2];
        let g = w[0] * u[0] + w[1] * u[2];
        form += f * g * ww * qw;
        size += (f.norm() * g.norm() * ww.abs()) * qw;
    }
    let ddot = ddot_routed(pr, lambda, &r)?.0;
    let lhs = r.psi_a * form;
    let rhs = -v[0] * w[0] * ddot;
    let denom = r.psi_a.norm() * size + ddot.norm();
    Ok(IdentityCheck {
        residual: (lhs - rhs).norm() / denom.max(f64::MIN_POSITIVE),
        lhs,
        rhs,
        trivial: false,
    })
}

fn trivial() -> IdentityCheck {
    IdentityCheck {
        residual: 0.0,
        lhs: Complex64::new(0.0, 0.0),
        rhs: Complex64::new(0.0, 0.0),
        trivial: true,
    }
}
