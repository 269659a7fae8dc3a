//! Quasi-periodic eigenvalues, real bands and spectral curves.

mod bands;
pub(crate) mod curves;
mod eigen;
pub(crate) mod roots;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FloquetError, Result};

pub use bands::{real_bands, Band, EdgeKind};
pub use curves::{trace_curves, CurvePoint, EndReason, SpectralCurve};
pub use eigen::{eigenvalues_in_box, Eigenvalue, EigenvalueList};

/// Closed rectangle `[re_lo, re_hi] x [im_lo, im_hi]` in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexBox {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl ComplexBox {
    pub fn new(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> Result<Self> {
        let b = ComplexBox { re_lo, re_hi, im_lo, im_hi };
        if [re_lo, re_hi, im_lo, im_hi].iter().all(|v| v.is_finite()) && re_lo < re_hi && im_lo < im_hi {
            Ok(b)
        } else {
            Err(FloquetError::InvalidInput(format!("empty or non-finite box {b:?}")))
        }
    }

    /// Box centred at `c` with half-widths `rx`, `ry`.
    pub fn around(c: Complex64, rx: f64, ry: f64) -> Self {
        ComplexBox {
            re_lo: c.re - rx,
            re_hi: c.re + rx,
            im_lo: c.im - ry,
            im_hi: c.im + ry,
        }
    }

    pub fn width(&self) -> f64 {
        self.re_hi - self.re_lo
    }

    pub fn height(&self) -> f64 {
        self.im_hi - self.im_lo
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_lo + self.re_hi), 0.5 * (self.im_lo + self.im_hi))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_lo && z.re <= self.re_hi && z.im >= self.im_lo && z.im <= self.im_hi
    }

    /// Contains `z` with a relative margin `eps` on every side.
    pub fn contains_loose(&self, z: Complex64, eps: f64) -> bool {
        let mx = eps * (self.width() + self.re_lo.abs().max(self.re_hi.abs()));
        let my = eps * (self.height() + self.im_lo.abs().max(self.im_hi.abs()));
        z.re >= self.re_lo - mx && z.re <= self.re_hi + mx && z.im >= self.im_lo - my && z.im <= self.im_hi + my
    }

    /// Corners counter-clockwise from the lower left.
    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_lo, self.im_lo),
            Complex64::new(self.re_hi, self.im_lo),
            Complex64::new(self.re_hi, self.im_hi),
            Complex64::new(self.re_lo, self.im_hi),
        ]
    }

    pub fn grown(&self, factor: f64) -> Self {
        let c = self.center();
        ComplexBox::around(c, 0.5 * self.width() * factor, 0.5 * self.height() * factor)
    }

    pub fn expanded(&self, d: f64) -> Self {
        ComplexBox {
            re_lo: self.re_lo - d,
            re_hi: self.re_hi + d,
            im_lo: self.im_lo - d,
            im_hi: self.im_hi + d,
        }
    }

    /// Splits along the longer side at fraction `f` of it.
    pub fn split(&self, f: f64) -> (Self, Self) {
        if self.width() >= self.height() {
            let m = self.re_lo + f * self.width();
            (ComplexBox { re_hi: m, ..*self }, ComplexBox { re_lo: m, ..*self })
        } else {
            let m = self.im_lo + f * self.height();
            (ComplexBox { im_hi: m, ..*self }, ComplexBox { im_lo: m, ..*self })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_along_longer_side() {
        let b = ComplexBox::new(0.0, 4.0, -1.0, 1.0).unwrap();
        let (l, r) = b.split(0.5);
        assert_eq!(l.re_hi, 2.0);
        assert_eq!(r.re_lo, 2.0);
        assert_eq!(l.im_lo, -1.0);
        assert!(ComplexBox::new(1.0, 1.0, 0.0, 1.0).is_err());
    }
}
