//! Roots of analytic functions in rectangles: argument-principle counts on
//! box edges, recursive bisection, Newton polishing.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::ComplexBox;
use crate::error::{FloquetError, Result};

pub(crate) trait Analytic: Sync {
    /// `(f(z), f'(z))`.
    fn eval(&self, z: Complex64) -> Result<(Complex64, Complex64)>;
    /// `f''(z)`, used to polish double roots through Newton on `f'`.
    fn second(&self, z: Complex64) -> Result<Complex64>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FoundRoot {
    pub z: Complex64,
    pub multiplicity: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct RootSearch {
    pub roots: Vec<FoundRoot>,
    pub count: usize,
    /// Box actually used (possibly nudged outward off a root).
    pub bbox: ComplexBox,
}

/// Split fractions tried in turn when children counts disagree.
const FRACTIONS: [f64; 5] = [0.4937, 0.5281, 0.4613, 0.5549, 0.4189];
const EDGE_TOL: f64 = 0.05;
const MAX_PIECE_ARG: f64 = 1.5;
const MAX_EDGE_DEPTH: usize = 40;
const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

fn gl5<F: Analytic>(f: &F, a: Complex64, b: Complex64) -> Result<Complex64> {
    let mid = (a + b) * 0.5;
    let half = (b - a) * 0.5;
    let mut s = Complex64::new(0.0, 0.0);
    for (x, w) in GL5 {
        let (fz, fp) = f.eval(mid + half * x)?;
        s += fp / fz * w;
    }
    Ok(s * half)
}

fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

/// `int_a^b f'/f dz`. A piece is accepted when the rule agrees with its
/// halves, with the exact endpoint data `log|f(b)/f(a)|`, `arg(f(b)/f(a))`,
/// and turns by less than `MAX_PIECE_ARG`; the exact endpoint value on the
/// branch picked by the rule is returned, so rounding noise in `f'` (large
/// near box corners far from the origin) cannot accumulate.
fn edge<F: Analytic>(
    f: &F,
    (a, fa): (Complex64, Complex64),
    (b, fb): (Complex64, Complex64),
    whole: Complex64,
    depth: usize,
) -> Option<Complex64> {
    let m = (a + b) * 0.5;
    let fm = f.eval(m).ok()?.0;
    let left = gl5(f, a, m).ok()?;
    let right = gl5(f, m, b).ok()?;
    let halves = left + right;
    let ratio = fb / fa;
    let d_arg = wrap(halves.im - ratio.arg());
    let ok = halves.is_finite()
        && (halves - whole).norm() < EDGE_TOL
        && (halves.re - ratio.norm().ln()).abs() < EDGE_TOL
        && d_arg.abs() < EDGE_TOL
        && halves.im.abs() < MAX_PIECE_ARG;
    if ok {
        return Some(Complex64::new(ratio.norm().ln(), halves.im - d_arg));
    }
    if depth >= MAX_EDGE_DEPTH || !fm.is_finite() || fm == Complex64::new(0.0, 0.0) {
        return None;
    }
    Some(edge(f, (a, fa), (m, fm), left, depth + 1)? + edge(f, (m, fm), (b, fb), right, depth + 1)?)
}

/// Argument-principle count, or `None` if the contour integral is not
/// resolved to a clean integer.
fn try_count<F: Analytic>(f: &F, bbox: &ComplexBox) -> Option<usize> {
    let c = bbox.corners();
    let mut pts = Vec::with_capacity(17);
    for k in 0..4 {
        let (a, b) = (c[k], c[(k + 1) % 4]);
        for j in 0..4 {
            pts.push(a + (b - a) * (j as f64 / 4.0));
        }
    }
    pts.push(c[0]);
    let vals: Vec<Complex64> = pts.iter().map(|&z| f.eval(z).map(|v| v.0)).collect::<Result<_>>().ok()?;
    if vals.iter().any(|v| !v.is_finite() || *v == Complex64::new(0.0, 0.0)) {
        return None;
    }
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..pts.len() - 1 {
        let whole = gl5(f, pts[k], pts[k + 1]).ok()?;
        total += edge(f, (pts[k], vals[k]), (pts[k + 1], vals[k + 1]), whole, 0)?;
    }
    let n = total / Complex64::new(0.0, 2.0 * PI);
    let r = n.re.round();
    ((n.re - r).abs() < 0.05 && n.im.abs() < 0.05 && r >= 0.0).then_some(r as usize)
}

/// Count with automatic outward nudging of the box when the contour passes
/// too close to a root.
pub(crate) fn count_in_box<F: Analytic>(f: &F, bbox: ComplexBox) -> Result<(usize, ComplexBox)> {
    let size = bbox.width().max(bbox.height());
    for k in 0..6 {
        let b = if k == 0 {
            bbox
        } else {
            bbox.expanded(size * 1e-6 * (k as f64).powi(2) * 0.731)
        };
        if let Some(n) = try_count(f, &b) {
            return Ok((n, b));
        }
    }
    Err(FloquetError::BoxCountUnstable { bbox })
}

/// `(1/2 pi i) oint f'/f` over a circle by the trapezoidal rule.
pub(crate) fn circle_count<F: Analytic>(f: &F, c: Complex64, r: f64, npts: usize) -> Result<Complex64> {
    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..npts {
        let e = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / npts as f64);
        let (fz, fp) = f.eval(c + e * r)?;
        s += fp / fz * e * r;
    }
    Ok(s / npts as f64)
}

fn circle_multiplicity<F: Analytic>(f: &F, z: Complex64) -> Result<Option<usize>> {
    let r1 = 1e-3 * (1.0 + z.norm());
    let n1 = circle_count(f, z, r1, 64)?;
    let n2 = circle_count(f, z, r1 / 10.0, 64)?;
    let (a, b) = (n1.re.round(), n2.re.round());
    let clean = |n: Complex64, r: f64| (n.re - r).abs() < 0.05 && n.im.abs() < 0.05;
    Ok((clean(n1, a) && clean(n2, b) && a == b && a >= 1.0).then_some(a as usize))
}

/// Newton (modified by the multiplicity `m`) from `z0`.
fn newton<F: Analytic>(f: &F, z0: Complex64, m: usize) -> Option<Complex64> {
    let mut z = z0;
    let mut last = f64::INFINITY;
    for i in 0..100 {
        let (fz, fp) = f.eval(z).ok()?;
        if fz == Complex64::new(0.0, 0.0) {
            return Some(z);
        }
        let step = fz / fp * m as f64;
        if !step.is_finite() {
            return None;
        }
        z -= step;
        let s = step.norm();
        let scale = 1.0 + z.norm();
        if s <= 1e-14 * scale {
            return Some(z);
        }
        // multiple roots: stop once rounding noise dominates
        if m > 1 && i > 4 && s >= 0.5 * last && s < 1e-5 * scale {
            return Some(z);
        }
        if m == 1 && i > 4 && s >= 0.5 * last && s < 1e-12 * scale {
            return Some(z);
        }
        last = s;
    }
    None
}

/// Newton on `f'` for a double root of `f`.
fn polish_double<F: Analytic>(f: &F, z0: Complex64) -> Complex64 {
    let mut z = z0;
    for _ in 0..30 {
        let (Ok((_, fp)), Ok(fpp)) = (f.eval(z), f.second(z)) else {
            return z0;
        };
        let step = fp / fpp;
        if !step.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    if (z - z0).norm() <= 1e-5 * (1.0 + z0.norm()) {
        z
    } else {
        z0
    }
}

fn try_leaf<F: Analytic>(f: &F, bbox: &ComplexBox, n: usize) -> Result<Option<FoundRoot>> {
    let Some(mut z) = newton(f, bbox.center(), n) else {
        return Ok(None);
    };
    if n == 2 {
        z = polish_double(f, z);
    }
    if !bbox.contains_loose(z, 1e-9) {
        return Ok(None);
    }
    if n > 1 && circle_multiplicity(f, z)? != Some(n) {
        return Ok(None);
    }
    let residual = f.eval(z)?.0.norm();
    Ok(Some(FoundRoot { z, multiplicity: n, residual }))
}

fn solve<F: Analytic>(f: &F, bbox: ComplexBox, n: usize, depth: usize) -> Result<Vec<FoundRoot>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = 1.0 + bbox.center().norm();
    let diam = bbox.width().hypot(bbox.height());
    if n == 1 || diam < 1e-2 * scale {
        if let Some(r) = try_leaf(f, &bbox, n)? {
            return Ok(vec![r]);
        }
    }
    if diam < 1e-12 * scale || depth > 200 {
        return Err(FloquetError::BoxCountUnstable { bbox });
    }
    for frac in FRACTIONS {
        let (b1, b2) = bbox.split(frac);
        let (c1, c2) = rayon::join(|| try_count(f, &b1), || try_count(f, &b2));
        if let (Some(n1), Some(n2)) = (c1, c2) {
            if n1 + n2 == n {
                let (r1, r2) = rayon::join(|| solve(f, b1, n1, depth + 1), || solve(f, b2, n2, depth + 1));
                let mut out = r1?;
                out.extend(r2?);
                return Ok(out);
            }
        }
    }
    Err(FloquetError::BoxCountUnstable { bbox })
}

/// All roots of `f` in `bbox`, with multiplicities summing to the contour count.
pub(crate) fn roots_in_box<F: Analytic>(f: &F, bbox: ComplexBox, max_roots: usize) -> Result<RootSearch> {
    let (count, used) = count_in_box(f, bbox)?;
    if count > max_roots {
        return Err(FloquetError::MaxRootsExceeded { max: max_roots });
    }
    let mut roots = solve(f, used, count, 0)?;
    roots.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
    Ok(RootSearch { roots, count, bbox: used })
}
