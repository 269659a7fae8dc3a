//! Propagation of the fundamental system `phi`, `psi` of
//! `-(p u')' + q u = lambda w u` across the period cell.
//!
//! The state carries `(u, p u')` for both solutions plus the three running
//! integrals `int phi^2 w`, `int phi psi w`, `int psi^2 w`, so one pass yields
//! both the monodromy matrix and everything needed for its `lambda`-derivative.

mod dopri;
mod exact;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeffs::{Segment, SegmentForm};
use crate::error::{FloquetError, Result};
use crate::problem::{End, Piece, PieceKind, Problem};

pub(crate) type State = [Complex64; 7];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const INITIAL: State = [ONE, ZERO, ZERO, ONE, ZERO, ZERO, ZERO];

pub type Mat2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    /// Monodromy matrix `[[phi(a), psi(a)], [p phi'(a), p psi'(a)]]`.
    pub l: Mat2,
    pub phi_a: Complex64,
    pub psi_a: Complex64,
    pub pphi_prime_a: Complex64,
    pub ppsi_prime_a: Complex64,
    pub q_phiphi: Complex64,
    pub q_phipsi: Complex64,
    pub q_psipsi: Complex64,
    pub est_error: f64,
}

impl TransferResult {
    fn from_state(y: &State, est_error: f64) -> Self {
        TransferResult {
            l: [[y[0], y[2]], [y[1], y[3]]],
            phi_a: y[0],
            psi_a: y[2],
            pphi_prime_a: y[1],
            ppsi_prime_a: y[3],
            q_phiphi: y[4],
            q_phipsi: y[5],
            q_psipsi: y[6],
            est_error,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.phi_a + self.ppsi_prime_a
    }

    pub fn det(&self) -> Complex64 {
        self.l[0][0] * self.l[1][1] - self.l[0][1] * self.l[1][0]
    }

    /// Magnitude of the two products whose difference is `det L`; the
    /// natural scale for rounding error in the determinant.
    pub fn det_scale(&self) -> f64 {
        (self.l[0][0] * self.l[1][1]).norm() + (self.l[0][1] * self.l[1][0]).norm()
    }
}

/// `phi`, `p phi'`, `psi`, `p psi'` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionTrace {
    pub grid: Vec<f64>,
    pub values: Vec<[Complex64; 4]>,
}

pub fn transfer(pr: &Problem, lambda: Complex64) -> Result<TransferResult> {
    let (y, err) = run(pr, lambda, &[], |_, _| {})?;
    Ok(TransferResult::from_state(&y, err))
}

/// Solution values on `n_points` equispaced points merged with every
/// breakpoint of the coefficient set.
pub fn solve_trace(pr: &Problem, lambda: Complex64, n_points: usize) -> Result<SolutionTrace> {
    if n_points < 2 {
        return Err(FloquetError::InvalidInput("solve_trace needs at least 2 points".into()));
    }
    let a = pr.period();
    let mut grid: Vec<f64> = (0..n_points)
        .map(|k| a * k as f64 / (n_points - 1) as f64)
        .chain(pr.nodes())
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * a);
    solve_at(pr, lambda, &grid)
}

/// Solution values at arbitrary sorted points of `[0, a]`.
pub fn solve_at(pr: &Problem, lambda: Complex64, xs: &[f64]) -> Result<SolutionTrace> {
    let a = pr.period();
    if xs.windows(2).any(|w| w[0] > w[1]) || xs.iter().any(|&x| !(0.0..=a).contains(&x)) {
        return Err(FloquetError::InvalidInput("sample points must be sorted and lie in [0, a]".into()));
    }
    let mut values = vec![[ZERO; 4]; xs.len()];
    run(pr, lambda, xs, |j, y| values[j] = [y[0], y[1], y[2], y[3]])?;
    Ok(SolutionTrace {
        grid: xs.to_vec(),
        values,
    })
}

fn run<R: FnMut(usize, &State)>(
    pr: &Problem,
    lambda: Complex64,
    xs: &[f64],
    mut record: R,
) -> Result<(State, f64)> {
    let mut y = INITIAL;
    let mut err = 0.0;
    let mut j = 0;
    while j < xs.len() && xs[j] <= 0.0 {
        record(j, &y);
        j += 1;
    }
    let last = pr.pieces.len() - 1;
    for (ip, piece) in pr.pieces.iter().enumerate() {
        let j0 = j;
        while j < xs.len() && (xs[j] <= piece.x_hi || ip == last) {
            j += 1;
        }
        let here = &xs[j0..j];
        let fail = |reason: String| FloquetError::IntegratorFailure {
            segment: piece.seg,
            x_lo: piece.x_lo,
            x_hi: piece.x_hi,
            reason,
        };
        match piece.kind {
            PieceKind::Constant { w, p, q } => {
                let mut x = piece.x_lo;
                for (k, &xk) in here.iter().enumerate() {
                    exact::propagate(w, p, q, lambda, xk - x, &mut y);
                    x = xk;
                    record(j0 + k, &y);
                }
                exact::propagate(w, p, q, lambda, piece.x_hi - x, &mut y);
            }
            PieceKind::General { graded } => {
                let chart = Chart::new(&pr.cs().segments[piece.seg], piece, graded);
                let mut stops: Vec<f64> = here.iter().map(|&x| chart.s_of(x)).collect();
                stops.push(1.0);
                let n_rec = here.len();
                let rhs = |s: f64, st: &State| chart.rhs(lambda, s, st);
                err += dopri::integrate(rhs, 0.0, &stops, &mut y, step_tol(pr.tol()), |k, st| {
                    if k < n_rec {
                        record(j0 + k, st)
                    }
                })
                .map_err(fail)?;
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(fail("state overflowed".into()));
        }
    }
    Ok((y, err))
}

/// Per-step tolerance: global error accumulates over many steps, so steps
/// are controlled two orders tighter than the requested accuracy.
fn step_tol(tol: f64) -> f64 {
    (tol * 1e-2).max(5e-15)
}

/// Map `s in [0, 1] -> x` on one piece; graded towards a singular end.
struct Chart<'a> {
    seg: &'a Segment,
    x_lo: f64,
    x_hi: f64,
    len: f64,
    graded: Option<(End, f64)>,
}

impl<'a> Chart<'a> {
    fn new(seg: &'a Segment, piece: &Piece, graded: Option<(End, f64)>) -> Self {
        Chart {
            seg,
            x_lo: piece.x_lo,
            x_hi: piece.x_hi,
            len: piece.x_hi - piece.x_lo,
            graded,
        }
    }

    fn x_of(&self, s: f64) -> f64 {
        match self.graded {
            None => self.x_lo + self.len * s,
            Some((End::Lo, m)) => self.x_lo + self.len * s.powf(m),
            Some((End::Hi, m)) => self.x_hi - self.len * (1.0 - s).powf(m),
        }
    }

    fn s_of(&self, x: f64) -> f64 {
        let s = match self.graded {
            None => (x - self.x_lo) / self.len,
            Some((End::Lo, m)) => ((x - self.x_lo) / self.len).max(0.0).powf(1.0 / m),
            Some((End::Hi, m)) => 1.0 - ((self.x_hi - x) / self.len).max(0.0).powf(1.0 / m),
        };
        s.clamp(0.0, 1.0)
    }

    fn jacobian(&self, s: f64) -> f64 {
        match self.graded {
            None => self.len,
            Some((End::Lo, m)) => self.len * m * s.powf(m - 1.0),
            Some((End::Hi, m)) => self.len * m * (1.0 - s).powf(m - 1.0),
        }
    }

    /// `c(x(s)) dx/ds`, or `dx/ds / c(x(s))` when `reciprocal`. Forms
    /// anchored at the graded end are evaluated through the distance in `s`
    /// so the power law is resolved without cancellation.
    fn weighted(&self, form: &SegmentForm, s: f64, x: f64, reciprocal: bool) -> f64 {
        if let (Some((end, m)), SegmentForm::PowerWeighted(f)) = (self.graded, form) {
            let x_end = if end == End::Lo { self.x_lo } else { self.x_hi };
            if (f.anchor - x_end).abs() <= 1e-12 * self.len.max(1.0) {
                let d = if end == End::Lo { s } else { 1.0 - s };
                let r = self.len * d.powf(m);
                let offset = if end == End::Lo { r } else { -r } + (x_end - f.anchor);
                let rho = crate::coeffs::poly::eval(&f.rho, offset);
                let tau = if reciprocal { -f.tau } else { f.tau };
                let amp = if reciprocal { 1.0 / rho } else { rho };
                return amp * self.len.powf(1.0 + tau) * m * d.powf(m * (1.0 + tau) - 1.0);
            }
        }
        let v = form.eval(x, self.seg.x_lo);
        let jac = self.jacobian(s);
        if reciprocal {
            jac / v
        } else {
            v * jac
        }
    }

    fn rhs(&self, lambda: Complex64, s: f64, y: &State) -> State {
        let x = self.x_of(s);
        let gw = self.weighted(&self.seg.w_form, s, x, false);
        let gq = self.weighted(&self.seg.q_form, s, x, false);
        let gp = self.weighted(&self.seg.p_form, s, x, true);
        let pot = gq - lambda * gw;
        [
            y[1] * gp,
            pot * y[0],
            y[3] * gp,
            pot * y[2],
            y[0] * y[0] * gw,
            y[0] * y[2] * gw,
            y[2] * y[2] * gw,
        ]
    }
}
