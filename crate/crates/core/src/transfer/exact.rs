//! Closed-form propagation across a segment with constant `(w, p, q)`.
//!
//! With `kappa = (q - lambda w)/p` the solutions of `u'' = kappa u` are built
//! from `C = cosh(sqrt(kappa) x)` and `S = sinh(sqrt(kappa) x)/sqrt(kappa)`,
//! both even in `sqrt(kappa)`. They are summed as power series in
//! `kappa h^2`, with the segment cut into sub-steps so that `|kappa| h^2 <= 1`.

use num_complex::Complex64;

use super::State;

const MAX_TERMS: usize = 40;

struct Block {
    c: Complex64,
    s: Complex64,
    /// Integrals over the step of `C^2`, `C S`, `S^2`.
    icc: Complex64,
    ics: Complex64,
    iss: Complex64,
}

fn block(kappa: Complex64, h: f64) -> Block {
    let z = kappa * (h * h);
    let mut c = Complex64::new(0.0, 0.0);
    let mut s = Complex64::new(0.0, 0.0);
    let mut ss = Complex64::new(0.0, 0.0);
    // term_c = z^n/(2n)!, term_s = z^n/(2n+1)!, term_ss = (4z)^n/(2n+3)!
    let mut tc = Complex64::new(1.0, 0.0);
    let mut ts = Complex64::new(1.0, 0.0);
    let mut tss = Complex64::new(1.0 / 6.0, 0.0);
    for n in 0..MAX_TERMS {
        c += tc;
        s += ts;
        ss += tss;
        if tc.norm() < 1e-18 && tss.norm() < 1e-18 && n > 1 {
            break;
        }
        let k = n as f64;
        tc *= z / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
        ts *= z / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
        tss *= 4.0 * z / ((2.0 * k + 4.0) * (2.0 * k + 5.0));
    }
    let s = s * h;
    Block {
        c,
        s,
        icc: (c * s + h) * 0.5,
        ics: s * s * 0.5,
        iss: ss * (2.0 * h * h * h),
    }
}

/// Advances `y` (fundamental pair plus quadratures) across a length `len`.
pub(crate) fn propagate(w: f64, p: f64, q: f64, lambda: Complex64, len: f64, y: &mut State) {
    if len <= 0.0 {
        return;
    }
    let kappa = (q - lambda * w) / p;
    let n = ((kappa.norm().sqrt() * len).ceil() as usize).max(1);
    let h = len / n as f64;
    let b = block(kappa, h);
    let pk_s = b.s * kappa * p;
    let s_p = b.s / p;
    for _ in 0..n {
        let [u1, v1, u2, v2, q11, q12, q22] = *y;
        let pair = |ua: Complex64, va: Complex64, ub: Complex64, vb: Complex64| {
            (ua * ub * b.icc + (ua * vb + ub * va) / p * b.ics + va * vb / (p * p) * b.iss) * w
        };
        *y = [
            b.c * u1 + s_p * v1,
            pk_s * u1 + b.c * v1,
            b.c * u2 + s_p * v2,
            pk_s * u2 + b.c * v2,
            q11 + pair(u1, v1, u1, v1),
            q12 + pair(u1, v1, u2, v2),
            q22 + pair(u2, v2, u2, v2),
        ];
    }
}
