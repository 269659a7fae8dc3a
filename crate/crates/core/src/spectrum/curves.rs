//! Continuation of the spectral curves `{lambda : D(lambda) = 2 cos t}`,
//! `t in [0, pi]`, inside a box.
//!
//! Seeds are the eigenvalues at `t = 0` and `t = pi` plus a grid projected
//! onto the spectrum; a verification grid then checks coverage and reseeds.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eigen::eigenvalues_in_box;
use super::ComplexBox;
use crate::discriminant::{d_and_ddot, eval_ddotdot};
use crate::error::{FloquetError, Result};
use crate::problem::Problem;

const DT_MIN: f64 = 1e-4;
const DT_MAX: f64 = 1e-2;
const MAX_SEED_ROOTS: usize = 100_000;
/// Largest allowed turn between consecutive chords (60 degrees).
const MAX_TURN: f64 = std::f64::consts::FRAC_PI_3;
const REAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndReason {
    CriticalPoint,
    BandEdgeDPlus2,
    BandEdgeDMinus2,
    BoxBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub lambda: Complex64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCurve {
    /// Ordered by increasing `t`.
    pub points: Vec<CurvePoint>,
    pub start_reason: EndReason,
    pub end_reason: EndReason,
    pub is_real: bool,
}

impl SpectralCurve {
    pub fn max_abs_im(&self) -> f64 {
        self.points.iter().map(|p| p.lambda.im.abs()).fold(0.0, f64::max)
    }
}

pub(crate) fn dedup_radius(z: Complex64) -> f64 {
    1e-6 * (1.0 + z.norm())
}

fn critical_threshold(z: Complex64) -> f64 {
    1e-6 * (1.0 + z.norm())
}

fn t_of(d: Complex64) -> f64 {
    (0.5 * d.re).clamp(-1.0, 1.0).acos()
}

/// Newton on `D(lambda) = c`. Returns the root and `Ddot` there.
pub(crate) fn newton_level(pr: &Problem, z0: Complex64, c: f64, iters: usize) -> Result<Option<(Complex64, Complex64)>> {
    let mut z = z0;
    for _ in 0..iters {
        let (d, dd) = d_and_ddot(pr, z)?;
        let step = (d - c) / dd;
        if !step.is_finite() {
            return Ok(None);
        }
        z -= step;
        if step.norm() <= 1e-13 * (1.0 + z.norm()) {
            let (_, dd) = d_and_ddot(pr, z)?;
            return Ok(Some((z, dd)));
        }
    }
    Ok(None)
}

/// Newton on `Ddot` (with `Ddotdot` by a central difference of `Ddot`).
pub(crate) fn locate_critical(pr: &Problem, z0: Complex64) -> Result<Option<Complex64>> {
    let mut z = z0;
    for _ in 0..50 {
        let h = 1e-6 * (1.0 + z.norm());
        let (_, dd) = d_and_ddot(pr, z)?;
        let ddd = (d_and_ddot(pr, z + h)?.1 - d_and_ddot(pr, z - h)?.1) / (2.0 * h);
        let step = dd / ddd;
        if !step.is_finite() {
            return Ok(None);
        }
        z -= step;
        if step.norm() <= 1e-13 * (1.0 + z.norm()) {
            return Ok(Some(z));
        }
    }
    Ok(None)
}

struct Branch {
    points: Vec<CurvePoint>,
    end: EndReason,
}

/// Follows the curve from `(z, t)` with `t` moving in direction `dir`.
fn continue_branch(pr: &Problem, bbox: &ComplexBox, z0: Complex64, t0: f64, dir: f64) -> Result<Branch> {
    let mut pts = vec![CurvePoint { lambda: z0, t: t0 }];
    let (mut z, mut t) = (z0, t0);
    let mut dd = d_and_ddot(pr, z)?.1;
    let mut dt = DT_MAX;
    let boundary = if dir > 0.0 { std::f64::consts::PI } else { 0.0 };
    loop {
        if (t - boundary).abs() <= 0.0 {
            let end = if boundary == 0.0 { EndReason::BandEdgeDPlus2 } else { EndReason::BandEdgeDMinus2 };
            return Ok(Branch { points: pts, end });
        }
        if dd.norm() < critical_threshold(z) {
            return Ok(Branch { points: pts, end: EndReason::CriticalPoint });
        }
        let step_t = dt.min((boundary - t).abs());
        let t_new = if step_t == (boundary - t).abs() { boundary } else { t + dir * step_t };
        let c = 2.0 * t_new.cos();
        let pred = z + (c - 2.0 * t.cos()) / dd;
        let accepted = match newton_level(pr, pred, c, 12)? {
            Some((zn, ddn)) => {
                let chord = zn - z;
                let drift_ok = (zn - pred).norm() <= 0.5 * (pred - z).norm() + 1e-10 * (1.0 + z.norm());
                let turn_ok = pts.len() < 2 || {
                    let prev = z - pts[pts.len() - 2].lambda;
                    prev.norm() == 0.0 || chord.norm() == 0.0 || (chord / prev).arg().abs() < MAX_TURN
                };
                (drift_ok && turn_ok).then_some((zn, ddn))
            }
            None => None,
        };
        match accepted {
            Some((zn, ddn)) => {
                if !bbox.contains(zn) {
                    return Ok(Branch { points: pts, end: EndReason::BoxBoundary });
                }
                z = zn;
                t = t_new;
                dd = ddn;
                pts.push(CurvePoint { lambda: z, t });
                dt = (dt * 1.5).min(DT_MAX);
            }
            None => {
                dt *= 0.5;
                if dt < DT_MIN {
                    if let Some(zc) = locate_critical(pr, z)? {
                        let near = (zc - z).norm() <= 0.1 * (1.0 + z.norm());
                        let tc = t_of(d_and_ddot(pr, zc)?.0);
                        if near && bbox.contains(zc) && (tc - t) * dir > 0.0 {
                            pts.push(CurvePoint { lambda: zc, t: tc });
                        }
                    }
                    return Ok(Branch { points: pts, end: EndReason::CriticalPoint });
                }
            }
        }
    }
}

/// Joins a backward and a forward branch through their shared seed into a
/// curve ordered by increasing `t`.
fn join(backward: Branch, forward: Branch, dir_forward: f64, seed_reason: Option<EndReason>) -> SpectralCurve {
    let (mut inc, dec) = if dir_forward > 0.0 { (forward, backward) } else { (backward, forward) };
    // `dec` runs towards smaller t; reverse it and drop the duplicated seed
    let mut points: Vec<CurvePoint> = dec.points.into_iter().rev().collect();
    let start_reason = if points.len() > 1 || seed_reason.is_none() { dec.end } else { seed_reason.unwrap() };
    if !points.is_empty() {
        points.pop();
    }
    let end_reason = if inc.points.len() > 1 || seed_reason.is_none() { inc.end } else { seed_reason.unwrap() };
    points.append(&mut inc.points);
    finish(points, start_reason, end_reason)
}

fn finish(points: Vec<CurvePoint>, start_reason: EndReason, end_reason: EndReason) -> SpectralCurve {
    let is_real = points.iter().all(|p| p.lambda.im.abs() <= REAL_TOL);
    SpectralCurve {
        points,
        start_reason,
        end_reason,
        is_real,
    }
}

/// One-directional curve starting at a band-edge seed.
fn from_edge(branch: Branch, dir: f64, start: EndReason) -> SpectralCurve {
    if dir > 0.0 {
        finish(branch.points, start, branch.end)
    } else {
        let points = branch.points.into_iter().rev().collect();
        finish(points, branch.end, start)
    }
}

fn point_segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sqr();
    if l2 == 0.0 {
        return (z - a).norm();
    }
    let s = ((z - a) * ab.conj()).re / l2;
    (z - (a + ab * s.clamp(0.0, 1.0))).norm()
}

/// Whether `(z, t)` lies on `curve`: the curve point at level `t` is
/// interpolated and polished by Newton, or `z` is within a quarter chord of
/// the polyline.
fn covered_by(pr: &Problem, curve: &SpectralCurve, z: Complex64, t: f64) -> Result<bool> {
    let r = dedup_radius(z);
    let pts = &curve.points;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let chord = (b.lambda - a.lambda).norm();
        if point_segment_distance(z, a.lambda, b.lambda) <= r.max(0.25 * chord) {
            return Ok(true);
        }
        if t >= a.t && t <= b.t && b.t > a.t {
            let s = (t - a.t) / (b.t - a.t);
            let guess = a.lambda + (b.lambda - a.lambda) * s;
            if let Some((zp, _)) = newton_level(pr, guess, 2.0 * t.cos(), 20)? {
                if (zp - z).norm() <= r {
                    return Ok(true);
                }
            }
        }
    }
    Ok(pts.len() == 1 && (pts[0].lambda - z).norm() <= r)
}

fn covered(pr: &Problem, curves: &[SpectralCurve], z: Complex64, t: f64) -> Result<bool> {
    for c in curves {
        if covered_by(pr, c, z, t)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Starting points at `t = 0` or `t = pi`: simple roots start one branch,
/// double roots two (`lambda0 +- sqrt(2 (2 cos t - D0) / Ddotdot)`).
fn edge_seeds(pr: &Problem, bbox: &ComplexBox) -> Result<Vec<(Complex64, f64, f64, EndReason)>> {
    let mut seeds = Vec::new();
    for (t0, dir) in [(0.0, 1.0), (std::f64::consts::PI, -1.0)] {
        let list = eigenvalues_in_box(pr, t0, *bbox, MAX_SEED_ROOTS)?;
        let reason = if t0 == 0.0 { EndReason::BandEdgeDPlus2 } else { EndReason::BandEdgeDMinus2 };
        for root in list.roots {
            let z0 = root.lambda;
            if root.multiplicity == 1 {
                seeds.push((z0, t0, dir, reason));
                continue;
            }
            // start the branches a small t-step away from the double root
            let ddd = eval_ddotdot(pr, z0)?;
            let dt = 1e-3;
            let t1 = t0 + dir * dt;
            let c = 2.0 * t1.cos();
            let d0 = d_and_ddot(pr, z0)?.0;
            let delta = ((c - d0) * 2.0 / ddd).sqrt();
            for s in [1.0, -1.0] {
                if let Some((z1, _)) = newton_level(pr, z0 + delta * s, c, 30)? {
                    if bbox.contains(z1) && (z1 - z0).norm() > dedup_radius(z0) {
                        seeds.push((z1, t1, dir, EndReason::CriticalPoint));
                    }
                }
            }
            // the double root itself is the common start point
            seeds.push((z0, t0, 0.0, EndReason::CriticalPoint));
        }
    }
    Ok(seeds)
}

/// Projects a grid point onto the spectrum by Newton on
/// `D = clamp(Re D(lambda_g), -2, 2)`.
fn project(pr: &Problem, bbox: &ComplexBox, zg: Complex64, reach: f64) -> Result<Option<(Complex64, f64)>> {
    let d = d_and_ddot(pr, zg)?.0;
    let c = d.re.clamp(-2.0, 2.0);
    let Some((z, _)) = newton_level(pr, zg, c, 30)? else {
        return Ok(None);
    };
    if !bbox.contains(z) || (z - zg).norm() > reach {
        return Ok(None);
    }
    let z = if z.im.abs() <= 1e-14 * (1.0 + z.norm()) { Complex64::new(z.re, 0.0) } else { z };
    Ok(Some((z, t_of(Complex64::new(c, 0.0)))))
}

/// Traces both directions from an interior point.
fn trace_through(pr: &Problem, bbox: &ComplexBox, z: Complex64, t: f64) -> Result<SpectralCurve> {
    let pi = std::f64::consts::PI;
    if t <= 0.0 {
        return Ok(from_edge(continue_branch(pr, bbox, z, 0.0, 1.0)?, 1.0, EndReason::BandEdgeDPlus2));
    }
    if t >= pi {
        return Ok(from_edge(continue_branch(pr, bbox, z, pi, -1.0)?, -1.0, EndReason::BandEdgeDMinus2));
    }
    let (fwd, bwd) = rayon::join(
        || continue_branch(pr, bbox, z, t, 1.0),
        || continue_branch(pr, bbox, z, t, -1.0),
    );
    Ok(join(bwd?, fwd?, 1.0, None))
}

fn sort_curves(curves: &mut [SpectralCurve]) {
    curves.sort_by(|a, b| {
        let (pa, pb) = (a.points[0], b.points[0]);
        pa.t.total_cmp(&pb.t)
            .then(pa.lambda.re.total_cmp(&pb.lambda.re))
            .then(pa.lambda.im.total_cmp(&pb.lambda.im))
    });
}

/// Keeps the first of any two curves whose interior points coincide.
fn dedup(pr: &Problem, curves: Vec<SpectralCurve>) -> Result<Vec<SpectralCurve>> {
    let mut kept: Vec<SpectralCurve> = Vec::new();
    for c in curves {
        let probe = [c.points.len() / 4, c.points.len() / 2, 3 * c.points.len() / 4];
        let mut dup = true;
        for &i in &probe {
            let p = c.points[i];
            if !covered(pr, &kept, p.lambda, p.t)? {
                dup = false;
                break;
            }
        }
        if !dup {
            kept.push(c);
        }
    }
    Ok(kept)
}

/// Spectral curves inside `bbox`. `seed_density` is the number of grid
/// seeds per box side (also used, offset by half a cell, for verification).
pub fn trace_curves(pr: &Problem, bbox: ComplexBox, seed_density: usize) -> Result<Vec<SpectralCurve>> {
    let n = seed_density.max(2);
    // phase 1: band-edge seeds, traced independently then deduplicated
    let seeds = edge_seeds(pr, &bbox)?;
    let mut traced: Vec<SpectralCurve> = seeds
        .par_iter()
        .filter(|s| s.2 != 0.0)
        .map(|&(z, t, dir, reason)| -> Result<SpectralCurve> {
            let branch = continue_branch(pr, &bbox, z, t, dir)?;
            let mut curve = from_edge(branch, dir, reason);
            if reason == EndReason::CriticalPoint {
                // prepend the double root this branch emanates from
                if let Some(&(z0, t0, _, _)) = seeds
                    .iter()
                    .filter(|s| s.2 == 0.0)
                    .min_by(|a, b| (a.0 - z).norm().total_cmp(&(b.0 - z).norm()))
                {
                    let p = CurvePoint { lambda: z0, t: t0 };
                    if dir > 0.0 {
                        curve.points.insert(0, p);
                    } else {
                        curve.points.push(p);
                    }
                }
            }
            Ok(curve)
        })
        .collect::<Result<_>>()?;
    traced.retain(|c| c.points.len() >= 2);
    sort_curves(&mut traced);
    let mut curves = dedup(pr, traced)?;

    // phase 2: grid seeds
    let cell = Complex64::new(bbox.width() / n as f64, bbox.height() / n as f64).norm();
    let grid = |offset: f64| -> Vec<Complex64> {
        let mut g = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..=n {
            for j in 0..=n {
                let re = bbox.re_lo + bbox.width() * ((i as f64 + offset) / n as f64).min(1.0);
                let im = bbox.im_lo + bbox.height() * ((j as f64 + offset) / n as f64).min(1.0);
                g.push(Complex64::new(re, im));
            }
        }
        g
    };
    let project_all = |pts: Vec<Complex64>| -> Result<Vec<(Complex64, f64)>> {
        let v: Vec<Option<(Complex64, f64)>> =
            pts.par_iter().map(|&z| project(pr, &bbox, z, 2.0 * cell)).collect::<Result<_>>()?;
        Ok(v.into_iter().flatten().collect())
    };
    let add_uncovered = |curves: &mut Vec<SpectralCurve>, cands: &[(Complex64, f64)]| -> Result<Vec<Complex64>> {
        let mut missed = Vec::new();
        for &(z, t) in cands {
            if covered(pr, curves, z, t)? {
                continue;
            }
            let c = trace_through(pr, &bbox, z, t)?;
            if c.points.len() >= 2 {
                curves.push(c);
            } else {
                missed.push(z);
            }
        }
        Ok(missed)
    };
    add_uncovered(&mut curves, &project_all(grid(0.0))?)?;

    // phase 3: verification on an offset grid plus real-axis samples
    let mut check = grid(0.5);
    if bbox.im_lo <= 0.0 && bbox.im_hi >= 0.0 {
        let m = 8 * n;
        check.extend((0..=m).map(|k| Complex64::new(bbox.re_lo + bbox.width() * k as f64 / m as f64, 0.0)));
    }
    let cands = project_all(check)?;
    let missed = add_uncovered(&mut curves, &cands)?;
    let mut uncovered = missed;
    for &(z, t) in &cands {
        if !covered(pr, &curves, z, t)? && !uncovered.contains(&z) {
            uncovered.push(z);
        }
    }
    if !uncovered.is_empty() {
        return Err(FloquetError::SeedExhaustion { uncovered });
    }
    curves.retain(|c| c.points.len() >= 2);
    sort_curves(&mut curves);
    Ok(curves)
}
