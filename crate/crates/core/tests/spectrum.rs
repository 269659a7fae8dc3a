mod common;

use std::f64::consts::PI;

use common::{c, load, problem, square_well_d};
use floquet_core::coeffs::{Segment, SegmentForm};
use floquet_core::discriminant::d_and_ddot;
use floquet_core::spectrum::{eigenvalues_in_box, real_bands, trace_curves, ComplexBox, EdgeKind, SpectralCurve};
use floquet_core::{CoefficientSet, Complex64, Problem};

fn bx(a: f64, b: f64, c: f64, d: f64) -> ComplexBox {
    ComplexBox::new(a, b, c, d).unwrap()
}

/// Kronig-Penney type definite set with open gaps.
fn kronig_penney() -> Problem {
    let k = SegmentForm::Constant;
    let cs = CoefficientSet::new(
        PI,
        vec![
            Segment::new(0.0, PI / 2.0, k(1.0), k(1.0), k(4.0)),
            Segment::new(PI / 2.0, PI, k(1.0), k(1.0), k(0.0)),
        ],
    );
    Problem::with_default_tol(cs).unwrap()
}

#[test]
fn periodic_eigenvalues_of_free_hill() {
    let list = eigenvalues_in_box(&problem("hill"), 0.0, bx(-1.0, 40.0, -1.0, 1.0), 100).unwrap();
    assert_eq!(list.count, 7);
    let got: Vec<(f64, usize)> = list.roots.iter().map(|r| (r.lambda.re, r.multiplicity)).collect();
    let want = [(0.0, 1), (4.0, 2), (16.0, 2), (36.0, 2)];
    assert_eq!(got.len(), want.len());
    for ((g, m), (w, wm)) in got.iter().zip(want) {
        assert!((g - w).abs() < 1e-8, "{g} vs {w}");
        assert_eq!(*m, wm);
    }
}

#[test]
fn quarter_period_eigenvalues_are_simple() {
    let list = eigenvalues_in_box(&problem("hill"), PI / 2.0, bx(-1.0, 40.0, -1.0, 1.0), 100).unwrap();
    let want: Vec<f64> = (0..6).map(|k| (k as f64 + 0.5).powi(2)).collect();
    assert_eq!(list.roots.len(), want.len());
    for (r, w) in list.roots.iter().zip(want) {
        assert_eq!(r.multiplicity, 1);
        assert!((r.lambda - w).norm() < 1e-8);
    }
}

#[test]
fn empty_box_far_from_spectrum() {
    let list = eigenvalues_in_box(&problem("hill"), 0.0, bx(-30.0, -20.0, 5.0, 9.0), 100).unwrap();
    assert_eq!(list.count, 0);
    assert!(list.roots.is_empty());
}

#[test]
fn eigenvalue_residuals_and_counts() {
    for name in ["square_well", "square_well_shifted", "smooth_indefinite"] {
        let pr = problem(name);
        for t in [0.0, 1.1, PI] {
            let list = eigenvalues_in_box(&pr, t, bx(-30.0, 30.0, -6.0, 6.0), 1000).unwrap();
            let total: usize = list.roots.iter().map(|r| r.multiplicity).sum();
            assert_eq!(total, list.count, "{name} t={t}");
            for r in &list.roots {
                let (d, dd) = d_and_ddot(&pr, r.lambda).unwrap();
                assert!((d - 2.0 * t.cos()).norm() <= 1e-8 * (1.0 + dd.norm()), "{name}: {r:?}");
            }
        }
    }
}

#[test]
fn free_hill_single_band() {
    let bands = real_bands(&problem("hill"), -1.0, 30.0).unwrap();
    assert_eq!(bands.len(), 1);
    let b = bands[0];
    assert!(b.lo.abs() < 1e-8);
    assert_eq!(b.hi, 30.0);
    assert!((b.d_lo - 2.0).abs() < 1e-8);
    assert_eq!((b.lo_kind, b.hi_kind), (EdgeKind::BandEdge, EdgeKind::WindowEdge));
}

/// Band edges of the square well from the closed form by bisection.
fn square_well_oracle_bands(lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let d = |x: f64| square_well_d(0.0, c(x, 0.0)).re;
    let inside = |x: f64| d(x).abs() <= 2.0;
    let n = 200_000;
    let xs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let edge = |mut a: f64, mut b: f64| {
        let ia = inside(a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if inside(m) == ia {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let mut out = Vec::new();
    let mut start = inside(xs[0]).then_some(xs[0]);
    for w in xs.windows(2) {
        match (inside(w[0]), inside(w[1])) {
            (false, true) => start = Some(edge(w[0], w[1])),
            (true, false) => out.push((start.take().unwrap(), edge(w[0], w[1]))),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, hi));
    }
    out
}

#[test]
fn square_well_bands_match_closed_form() {
    let pr = problem("square_well");
    let bands = real_bands(&pr, 0.0, 60.0).unwrap();
    let oracle = square_well_oracle_bands(0.0, 60.0);
    assert_eq!(bands.len(), oracle.len(), "{bands:?} vs {oracle:?}");
    for (b, (lo, hi)) in bands.iter().zip(&oracle) {
        assert!((b.lo - lo).abs() < 1e-7 && (b.hi - hi).abs() < 1e-7, "{b:?} vs {lo} {hi}");
    }
    // the bands away from the origin sit around ((k + 1/2) pi)^2
    let centre = |b: &floquet_core::spectrum::Band| 0.5 * (b.lo + b.hi);
    assert!((centre(&bands[bands.len() - 1]) - (1.5 * PI).powi(2)).abs() < 0.1);
}

#[test]
fn gap_window_has_no_bands() {
    assert!(real_bands(&problem("square_well"), 6.0, 15.0).unwrap().is_empty());
}

#[test]
fn band_edges_are_periodic_or_antiperiodic_eigenvalues() {
    for pr in [problem("square_well"), kronig_penney(), problem("smooth_indefinite")] {
        let bands = real_bands(&pr, -20.0, 40.0).unwrap();
        let per = eigenvalues_in_box(&pr, 0.0, bx(-20.5, 40.5, -1.0, 1.0), 1000).unwrap();
        let anti = eigenvalues_in_box(&pr, PI, bx(-20.5, 40.5, -1.0, 1.0), 1000).unwrap();
        for b in &bands {
            for (x, d, kind) in [(b.lo, b.d_lo, b.lo_kind), (b.hi, b.d_hi, b.hi_kind)] {
                if kind != EdgeKind::BandEdge {
                    continue;
                }
                let list = if d > 0.0 { &per } else { &anti };
                let near = list.roots.iter().map(|r| (r.lambda - x).norm()).fold(f64::MAX, f64::min);
                assert!(near < 1e-7, "edge {x} (D = {d}) not an eigenvalue, nearest {near}");
            }
        }
    }
}

#[test]
fn definite_band_count_matches_eigenvalue_count() {
    let pr = kronig_penney();
    let bands = real_bands(&pr, -5.0, 60.0).unwrap();
    // cut the window in the middle of the last gap
    let k = bands.len() - 1;
    let hi = 0.5 * (bands[k - 1].hi + bands[k].lo);
    let inner: Vec<_> = bands.iter().filter(|b| b.hi < hi).collect();
    let b = bx(-5.0, hi, -1.0, 1.0);
    let per = eigenvalues_in_box(&pr, 0.0, b, 1000).unwrap();
    let anti = eigenvalues_in_box(&pr, PI, b, 1000).unwrap();
    assert_eq!(per.count + anti.count, 2 * inner.len());
    assert!(inner.len() >= 3);
}

fn assert_curve_shape(c: &SpectralCurve) {
    assert!(c.points.len() >= 2);
    let first = c.points[0].lambda;
    assert!(c.points.iter().any(|p| (p.lambda - first).norm() > 1e-9), "isolated point");
    assert!(c.points.windows(2).all(|w| w[1].t > w[0].t));
}

#[test]
fn definite_curves_are_real() {
    for pr in [problem("hill"), kronig_penney()] {
        let curves = trace_curves(&pr, bx(-6.0, 30.0, -3.0, 3.0), 12).unwrap();
        assert!(!curves.is_empty());
        for c in &curves {
            assert!(c.is_real);
            assert_curve_shape(c);
        }
    }
}

#[test]
fn real_fiber_spectra_give_real_curves() {
    let pr = problem("square_well");
    let b = bx(-30.0, 30.0, -10.0, 10.0);
    for t in [0.0, PI] {
        let list = eigenvalues_in_box(&pr, t, b, 1000).unwrap();
        assert!(list.roots.iter().all(|r| r.lambda.im.abs() < 1e-8));
    }
    for c in trace_curves(&pr, b, 12).unwrap() {
        assert!(c.is_real, "{c:?}");
        assert_curve_shape(&c);
    }
}

/// Distance from `z` to the curve family at parameter `t`: interpolate on
/// each chord bracketing `t` and polish by Newton at fixed `t`.
fn distance_at_t(pr: &Problem, curves: &[SpectralCurve], z: Complex64, t: f64) -> f64 {
    let mut best = f64::MAX;
    for c in curves {
        for w in c.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            if !(a.t <= t && t <= b.t) {
                continue;
            }
            let s = if b.t > a.t { (t - a.t) / (b.t - a.t) } else { 0.0 };
            let mut y = a.lambda + (b.lambda - a.lambda) * s;
            if (y - z).norm() > 10.0 * (b.lambda - a.lambda).norm() + 1e-6 {
                continue;
            }
            let chord = (b.lambda - a.lambda).norm() + 1e-3;
            for _ in 0..30 {
                let Ok((d, dd)) = d_and_ddot(pr, y) else { break };
                let step = (d - 2.0 * t.cos()) / dd;
                if !step.is_finite() || step.norm() > chord {
                    break;
                }
                y -= step;
                if step.norm() < 1e-14 * (1.0 + y.norm()) {
                    break;
                }
            }
            best = best.min((y - z).norm());
        }
    }
    best
}

#[test]
fn non_real_curves_are_conjugation_symmetric() {
    let pr = problem("square_well_shifted");
    let curves = trace_curves(&pr, bx(-20.0, 20.0, -10.0, 10.0), 12).unwrap();
    let non_real: Vec<_> = curves.iter().filter(|c| !c.is_real).collect();
    assert!(!non_real.is_empty());
    for c in &curves {
        assert_curve_shape(c);
        for p in &c.points {
            let (d, _) = d_and_ddot(&pr, p.lambda).unwrap();
            assert!((d - 2.0 * p.t.cos()).norm() <= 1e-8);
            let dist = distance_at_t(&pr, &curves, p.lambda.conj(), p.t);
            assert!(dist <= 1e-6 * (1.0 + p.lambda.norm()), "{} not mirrored ({dist})", p.lambda);
        }
    }
}

#[test]
fn closed_form_oracle_has_non_real_periodic_eigenvalue() {
    // D is even and real on the imaginary axis; scan it for D = 2
    let f = |y: f64| square_well_d(-1.0, c(0.0, y)).re - 2.0;
    let ys: Vec<f64> = (1..4000).map(|k| k as f64 * 0.005).collect();
    let y0 = ys.windows(2).find(|w| f(w[0]) * f(w[1]) < 0.0).map(|w| w[0]).unwrap();
    let pr = problem("square_well_shifted");
    let list = eigenvalues_in_box(&pr, 0.0, bx(-1.0, 1.0, y0 - 0.1, y0 + 0.1), 10).unwrap();
    assert_eq!(list.roots.len(), 1);
    assert!((list.roots[0].lambda - c(0.0, 3.29428513)).norm() < 1e-7);
    let _ = load("square_well_shifted");
}
