use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discriminant::ddot_routed;
use crate::error::{FloquetError, Result};
use crate::problem::Problem;
use crate::spectrum::real_bands;
use crate::transfer::transfer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignType {
    PositiveType,
    NegativeType,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignRoute {
    /// Sign of `Ddot psi(a)`.
    PsiRoute,
    /// Sign of `Ddot (p phi')(a)`.
    PPhiRoute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTypeVerdict {
    pub lambda: f64,
    pub t: f64,
    pub verdict: SignType,
    pub route: SignRoute,
    pub witness: f64,
}

pub(crate) fn decision_threshold(lambda: f64) -> f64 {
    1e-8 * (1.0 + lambda.abs())
}

/// Raw ingredients at a real point: `(D, Ddot, psi(a), (p phi')(a))`.
fn ingredients(pr: &Problem, lambda: f64) -> Result<(f64, f64, f64, f64)> {
    let r = transfer(pr, Complex64::new(lambda, 0.0))?;
    Ok((r.trace().re, ddot_routed(pr, Complex64::new(lambda, 0.0), &r)?.0.re, r.psi_a.re, r.pphi_prime_a.re))
}

fn route_verdict(route: SignRoute, ddot: f64, value: f64, thr: f64) -> (SignType, f64) {
    let witness = ddot * value;
    let verdict = if value.abs() <= thr || witness.abs() <= thr {
        SignType::Undecided
    } else {
        match (route, witness > 0.0) {
            (SignRoute::PsiRoute, false) | (SignRoute::PPhiRoute, true) => SignType::PositiveType,
            _ => SignType::NegativeType,
        }
    };
    (verdict, witness)
}

fn check_spectral(lambda: f64, d: f64, ddot: f64) -> Result<()> {
    let thr = decision_threshold(lambda);
    if d.abs() > 2.0 + thr {
        return Err(FloquetError::NotSpectral { lambda, d });
    }
    if ddot.abs() <= thr {
        return Err(FloquetError::NearCritical {
            lambda,
            ddot_abs: ddot.abs(),
        });
    }
    Ok(())
}

/// Sign type of the real spectral point `lambda`, decided through whichever
/// of `psi(a)`, `(p phi')(a)` is larger in magnitude.
pub fn sign_type(pr: &Problem, lambda: f64) -> Result<SignTypeVerdict> {
    let (d, ddot, psi, pphi) = ingredients(pr, lambda)?;
    check_spectral(lambda, d, ddot)?;
    let thr = decision_threshold(lambda);
    let (route, value) = if psi.abs() >= pphi.abs() {
        (SignRoute::PsiRoute, psi)
    } else {
        (SignRoute::PPhiRoute, pphi)
    };
    let (verdict, witness) = route_verdict(route, ddot, value, thr);
    Ok(SignTypeVerdict {
        lambda,
        t: (0.5 * d).clamp(-1.0, 1.0).acos(),
        verdict,
        route,
        witness,
    })
}

/// Verdicts of both routes, each `None` when its quantity is below the
/// decision threshold.
pub fn sign_type_both_routes(pr: &Problem, lambda: f64) -> Result<(Option<SignType>, Option<SignType>)> {
    let (d, ddot, psi, pphi) = ingredients(pr, lambda)?;
    check_spectral(lambda, d, ddot)?;
    let thr = decision_threshold(lambda);
    let decide = |route, v: f64| {
        let (s, _) = route_verdict(route, ddot, v, thr);
        (s != SignType::Undecided).then_some(s)
    };
    Ok((decide(SignRoute::PsiRoute, psi), decide(SignRoute::PPhiRoute, pphi)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntervalType {
    Positive,
    Negative,
    Mixed,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypedInterval {
    pub lo: f64,
    pub hi: f64,
    pub label: IntervalType,
}

const SAMPLES_PER_PIECE: usize = 16;

/// Real zeros of `Ddot` inside `[lo, hi]` by a sign scan and bisection.
pub(crate) fn real_critical_points(pr: &Problem, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let n = (64.0 + 20.0 * (hi - lo)).min(20_000.0) as usize;
    let xs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let ddot = |x: f64| -> Result<f64> { Ok(ingredients(pr, x)?.1) };
    let vals: Vec<f64> = xs.iter().map(|&x| ddot(x)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for k in 0..n {
        if vals[k] == 0.0 {
            out.push(xs[k]);
            continue;
        }
        if vals[k] * vals[k + 1] < 0.0 {
            let (mut a, mut b) = (xs[k], xs[k + 1]);
            let fa = vals[k];
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = ddot(m)?;
                if (fm > 0.0) == (fa > 0.0) {
                    a = m;
                } else {
                    b = m;
                }
            }
            out.push(0.5 * (a + b));
        }
    }
    Ok(out)
}

fn label_piece(pr: &Problem, lo: f64, hi: f64) -> Result<IntervalType> {
    let (mut pos, mut neg) = (0, 0);
    for k in 0..SAMPLES_PER_PIECE {
        let x = lo + (hi - lo) * (k as f64 + 0.5) / SAMPLES_PER_PIECE as f64;
        match sign_type(pr, x) {
            Ok(v) if v.verdict == SignType::PositiveType => pos += 1,
            Ok(v) if v.verdict == SignType::NegativeType => neg += 1,
            Ok(_) | Err(FloquetError::NotSpectral { .. }) | Err(FloquetError::NearCritical { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(match (pos > 0, neg > 0) {
        (true, false) => IntervalType::Positive,
        (false, true) => IntervalType::Negative,
        (true, true) => IntervalType::Mixed,
        (false, false) => IntervalType::Unknown,
    })
}

/// Partition of `[lam_min, lam_max]` into intervals of constant sign type,
/// split at real critical points and, across gaps, where the type changes.
pub fn interval_partition(pr: &Problem, lam_min: f64, lam_max: f64) -> Result<Vec<TypedInterval>> {
    let bands = real_bands(pr, lam_min, lam_max)?;
    // labelled spectral pieces (lo, hi, label, ends_at_critical)
    let mut pieces: Vec<(f64, f64, IntervalType)> = Vec::new();
    let mut crit_cuts: Vec<f64> = Vec::new();
    for b in &bands {
        let mut cuts = vec![b.lo];
        if !b.monotone {
            let cps = real_critical_points(pr, b.lo, b.hi)?;
            crit_cuts.extend(cps.iter().copied().filter(|&c| c > b.lo && c < b.hi));
            cuts.extend(cps.into_iter().filter(|&c| c > b.lo && c < b.hi));
        }
        cuts.push(b.hi);
        for w in cuts.windows(2) {
            if w[1] > w[0] {
                pieces.push((w[0], w[1], label_piece(pr, w[0], w[1])?));
            }
        }
    }
    if pieces.is_empty() {
        return Ok(vec![TypedInterval {
            lo: lam_min,
            hi: lam_max,
            label: IntervalType::Unknown,
        }]);
    }
    let mut out: Vec<TypedInterval> = Vec::new();
    let mut lo = lam_min;
    for (i, &(_, hi, label)) in pieces.iter().enumerate() {
        let hi_cut = match pieces.get(i + 1) {
            None => lam_max,
            // adjacent pieces inside one band are separated at a critical point
            Some(&(next_lo, _, _)) if next_lo == hi => hi,
            Some(&(next_lo, _, _)) => 0.5 * (hi + next_lo),
        };
        match out.last_mut() {
            Some(last) if last.label == label => last.hi = hi_cut,
            _ => out.push(TypedInterval { lo, hi: hi_cut, label }),
        }
        lo = hi_cut;
    }
    Ok(out)
}
