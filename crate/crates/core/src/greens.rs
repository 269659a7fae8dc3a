//! Resolvent of the fiber operator `A(z)`, the realization of
//! `(1/w)(-(p f')' + q f)` with `f(a) = e^{iz} f(0)`, `(p f')(a) = e^{iz} (p f')(0)`.
//!
//! With `Psi = (phi, psi)`, `J = [[0, 1], [-1, 0]]` and `d = 2 cos z - D`,
//!
//! ```text
//! G(x, y) = Psi(x)^T ((L - e^{-iz}) / d + 1_{y <= x}) J Psi(y)
//! (R g)(x) = int_0^a G(x, y) g(y) w(y) dy
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FloquetError, Result};
use crate::problem::Problem;
use crate::quadrature::composite_rule;
use crate::transfer::{solve_at, transfer, Mat2};

pub const POLE_TOL: f64 = 1e-10;
const ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventRequest {
    pub z: Complex64,
    pub lambda: Complex64,
    /// Sorted sample points covering `[0, a]`.
    pub grid: Vec<f64>,
    pub g: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventOutput {
    pub grid: Vec<f64>,
    pub f: Vec<Complex64>,
    /// `p f'` on the grid.
    pub pf: Vec<Complex64>,
}

/// `(L - e^{-iz}) / d`, failing at poles of the resolvent.
fn boundary_matrix(l: &Mat2, z: Complex64) -> Result<Mat2> {
    let d = 2.0 * z.cos() - (l[0][0] + l[1][1]);
    if d.norm() <= POLE_TOL {
        return Err(FloquetError::ResolventPole { distance: d.norm() });
    }
    let e = (-Complex64::i() * z).exp();
    Ok([[(l[0][0] - e) / d, l[0][1] / d], [l[1][0] / d, (l[1][1] - e) / d]])
}

/// `u^T M v` for 2-vectors.
fn bilinear(u: [Complex64; 2], m: &Mat2, v: [Complex64; 2]) -> Complex64 {
    u[0] * (m[0][0] * v[0] + m[0][1] * v[1]) + u[1] * (m[1][0] * v[0] + m[1][1] * v[1])
}

/// `J (phi, psi)^T = (psi, -phi)`.
fn j_psi(u: &[Complex64; 4]) -> [Complex64; 2] {
    [u[2], -u[0]]
}

pub fn green_kernel(pr: &Problem, z: Complex64, lambda: Complex64, x: f64, y: f64) -> Result<Complex64> {
    let r = transfer(pr, lambda)?;
    let m = boundary_matrix(&r.l, z)?;
    let xs = if x <= y { [x, y] } else { [y, x] };
    let tr = solve_at(pr, lambda, &xs)?;
    let (ux, uy) = if x <= y {
        (tr.values[0], tr.values[1])
    } else {
        (tr.values[1], tr.values[0])
    };
    let px = [ux[0], ux[2]];
    let jy = j_psi(&uy);
    let mut g = bilinear(px, &m, jy);
    if y <= x {
        g += px[0] * jy[0] + px[1] * jy[1];
    }
    Ok(g)
}

/// Index ranges of grid points between consecutive problem nodes, so that
/// interpolation stencils never straddle a coefficient breakpoint.
fn region_of(grid: &[f64], nodes: &[f64], k: usize) -> (usize, usize) {
    let (a, b) = (grid[k], grid[k + 1]);
    let lo_node = nodes.iter().copied().filter(|&n| n <= a).fold(f64::NEG_INFINITY, f64::max);
    let hi_node = nodes.iter().copied().filter(|&n| n >= b).fold(f64::INFINITY, f64::min);
    let first = grid.iter().position(|&x| x >= lo_node).unwrap_or(0);
    let last = grid.iter().rposition(|&x| x <= hi_node).unwrap_or(grid.len() - 1);
    (first.min(k), last.max(k + 1))
}

/// Cubic (or lower, on short regions) Lagrange interpolation of `g` on the
/// interval `[grid[k], grid[k + 1]]`.
fn interpolate(grid: &[f64], g: &[Complex64], region: (usize, usize), k: usize, x: f64) -> Complex64 {
    let (first, last) = region;
    let npts = (last - first + 1).min(4);
    let start = (k.saturating_sub(1)).clamp(first, last + 1 - npts);
    let idx = start..start + npts;
    let mut out = Complex64::new(0.0, 0.0);
    for i in idx.clone() {
        let mut c = 1.0;
        for j in idx.clone() {
            if j != i {
                c *= (x - grid[j]) / (grid[i] - grid[j]);
            }
        }
        out += g[i] * c;
    }
    out
}

/// `f = R g` and `p f'` on the request grid. One integration supplies the
/// fundamental system at the grid and at Gauss nodes of every grid cell;
/// `g` is interpolated to those nodes within each coefficient piece.
pub fn apply_resolvent(pr: &Problem, req: &ResolventRequest) -> Result<ResolventOutput> {
    let a = pr.period();
    let grid = &req.grid;
    if grid.len() < 2 || grid.len() != req.g.len() {
        return Err(FloquetError::InvalidInput("grid and g must have equal length >= 2".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FloquetError::InvalidInput("grid must be strictly increasing".into()));
    }
    let span_tol = 1e-12 * a.max(1.0);
    if grid[0].abs() > span_tol || (grid[grid.len() - 1] - a).abs() > span_tol {
        return Err(FloquetError::InvalidInput(format!("grid must span [0, {a}]")));
    }
    let r = transfer(pr, req.lambda)?;
    let m = boundary_matrix(&r.l, req.z)?;
    let nodes = pr.nodes();

    // (point, weight for the cumulative integral, cell index or None for grid points)
    let mut pts: Vec<(f64, f64, Option<usize>)> = grid.iter().map(|&x| (x.clamp(0.0, a), 0.0, None)).collect();
    for k in 0..grid.len() - 1 {
        for (x, w) in composite_rule(pr, grid[k], grid[k + 1], 1, ORDER) {
            pts.push((x, w, Some(k)));
        }
    }
    pts.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.2.is_some().cmp(&q.2.is_some())));
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let tr = solve_at(pr, req.lambda, &xs)?;

    // cumulative J(x) = int_0^x J Psi g w, recorded at the grid points
    let mut acc = [Complex64::new(0.0, 0.0); 2];
    let mut at_grid: Vec<([Complex64; 4], [Complex64; 2])> = Vec::with_capacity(grid.len());
    let mut regions: Vec<Option<(usize, usize)>> = vec![None; grid.len()];
    for (p, u) in pts.iter().zip(&tr.values) {
        match p.2 {
            None => at_grid.push((*u, acc)),
            Some(k) => {
                let region = *regions[k].get_or_insert_with(|| region_of(grid, &nodes, k));
                let gx = interpolate(grid, &req.g, region, k, p.0);
                let wx = pr.cs().segments[pr.cs().segment_index(p.0)].w(p.0);
                let jp = j_psi(u);
                let c = gx * wx * p.1;
                acc[0] += jp[0] * c;
                acc[1] += jp[1] * c;
            }
        }
    }
    let total = acc;
    let mut f = Vec::with_capacity(grid.len());
    let mut pf = Vec::with_capacity(grid.len());
    for (u, jx) in at_grid {
        // coefficient vector M total + J(x)
        let cvec = [
            m[0][0] * total[0] + m[0][1] * total[1] + jx[0],
            m[1][0] * total[0] + m[1][1] * total[1] + jx[1],
        ];
        f.push(u[0] * cvec[0] + u[2] * cvec[1]);
        pf.push(u[1] * cvec[0] + u[3] * cvec[1]);
    }
    Ok(ResolventOutput {
        grid: grid.clone(),
        f,
        pf,
    })
}
