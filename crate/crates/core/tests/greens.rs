mod common;

use std::f64::consts::PI;

use common::{c, problem, BUNDLED};
use floquet_core::greens::{apply_resolvent, green_kernel, ResolventOutput, ResolventRequest};
use floquet_core::transfer::solve_trace;
use floquet_core::{Complex64, FloquetError, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(pr: &Problem, n: usize) -> Vec<f64> {
    let a = pr.period();
    (0..n).map(|k| if k + 1 == n { a } else { a * k as f64 / (n - 1) as f64 }).collect()
}

/// A smooth complex function given by a few random Fourier modes.
fn random_smooth(rng: &mut ChaCha8Rng, a: f64) -> impl Fn(f64) -> Complex64 {
    let modes: Vec<(f64, f64, f64)> = (0..5).map(|k| (k as f64, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    move |x| {
        modes
            .iter()
            .map(|&(k, re, im)| c(re, im) * Complex64::from_polar(1.0, 2.0 * PI * k * x / a + 0.3 * k))
            .sum()
    }
}

fn resolve(pr: &Problem, z: f64, lambda: Complex64, xs: &[f64], g: &dyn Fn(f64) -> Complex64) -> ResolventOutput {
    let req = ResolventRequest {
        z: c(z, 0.0),
        lambda,
        grid: xs.to_vec(),
        g: xs.iter().map(|&x| g(x)).collect(),
    };
    apply_resolvent(pr, &req).unwrap_or_else(|e| panic!("{e}"))
}

fn sup(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn boundary_conditions_for_random_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for name in BUNDLED {
        let pr = problem(name);
        let xs = grid(&pr, 401);
        for _ in 0..3 {
            let z: f64 = rng.gen_range(-PI..PI);
            let lambda = c(rng.gen_range(-10.0..10.0), rng.gen_range(0.5..3.0));
            let g = random_smooth(&mut rng, pr.period());
            let out = resolve(&pr, z, lambda, &xs, &g);
            let e = Complex64::from_polar(1.0, z);
            let n = xs.len() - 1;
            assert!((out.f[n] - e * out.f[0]).norm() <= 1e-7 * sup(&out.f), "{name}");
            assert!((out.pf[n] - e * out.pf[0]).norm() <= 1e-7 * sup(&out.pf), "{name}");
        }
    }
}

#[test]
fn residual_by_second_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in ["smooth_indefinite", "hill_shifted"] {
        let pr = problem(name);
        let cs = pr.cs().clone();
        let h = 1e-3;
        let n = (pr.period() / h).round() as usize + 1;
        let xs = grid(&pr, n);
        let lambda = c(1.3, 0.7);
        let g = random_smooth(&mut rng, pr.period());
        let out = resolve(&pr, 0.4, lambda, &xs, &g);
        let breaks = cs.breakpoints();
        let gscale = xs.iter().map(|&x| g(x).norm()).fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for k in 1..n - 1 {
            let x = xs[k];
            let hk = xs[k + 1] - x;
            let seg = &cs.segments[cs.segment_index(x)];
            if breaks.iter().any(|&b| (x - b).abs() < 5.0 * h) || seg.w(x).abs() < 0.1 {
                continue;
            }
            let (pl, pr_) = (seg.p(x - 0.5 * hk), seg.p(x + 0.5 * hk));
            let flux = (pr_ * (out.f[k + 1] - out.f[k]) - pl * (out.f[k] - out.f[k - 1])) / (hk * hk);
            let lhs = (-flux + seg.q(x) * out.f[k]) / seg.w(x) - lambda * out.f[k];
            worst = worst.max((lhs - g(x)).norm() / gscale);
        }
        assert!(worst <= 1e-4, "{name}: {worst}");
    }
}

/// `int u conj(v) w` by Simpson's rule on each coefficient piece of the grid.
fn krein_form(pr: &Problem, xs: &[f64], u: &[Complex64], v: &[Complex64]) -> Complex64 {
    let cs = pr.cs();
    let val = |k: usize, seg: usize| u[k] * v[k].conj() * cs.segments[seg].w(xs[k]);
    let mut s = Complex64::new(0.0, 0.0);
    let mut k = 0;
    while k + 2 < xs.len() {
        let seg = cs.segment_index(0.5 * (xs[k] + xs[k + 2]));
        let hh = xs[k + 2] - xs[k];
        s += (val(k, seg) + 4.0 * val(k + 1, seg) + val(k + 2, seg)) * (hh / 6.0);
        k += 2;
    }
    assert_eq!(k + 1, xs.len(), "grid must have an even number of cells");
    s
}

#[test]
fn resolvent_is_krein_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in ["hill_shifted", "square_well", "square_well_shifted", "smooth_indefinite"] {
        let pr = problem(name);
        let xs = grid(&pr, 2001);
        for _ in 0..2 {
            let z: f64 = rng.gen_range(-PI..PI);
            let lambda = c(rng.gen_range(-5.0..5.0), rng.gen_range(0.5..2.0));
            let g = random_smooth(&mut rng, pr.period());
            let h = random_smooth(&mut rng, pr.period());
            let gv: Vec<Complex64> = xs.iter().map(|&x| g(x)).collect();
            let hv: Vec<Complex64> = xs.iter().map(|&x| h(x)).collect();
            let rg = resolve(&pr, z, lambda, &xs, &g);
            let rh = resolve(&pr, z, lambda.conj(), &xs, &h);
            let lhs = krein_form(&pr, &xs, &rg.f, &hv);
            let rhs = krein_form(&pr, &xs, &gv, &rh.f);
            assert!((lhs - rhs).norm() <= 1e-7 * lhs.norm().max(rhs.norm()), "{name}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn constant_function_examples() {
    let pr = problem("hill");
    let xs = grid(&pr, 201);
    let one = |_: f64| c(1.0, 0.0);
    let out = resolve(&pr, 0.0, c(-1.0, 0.0), &xs, &one);
    assert!(out.f.iter().all(|f| (f - 1.0).norm() <= 1e-8));
    // (A(0) - lambda)^{-1} 1 = -1/lambda
    for lambda in [c(2.5, 0.0), c(-3.0, 1.0), c(0.2, -0.4)] {
        let out = resolve(&pr, 0.0, lambda, &xs, &one);
        assert!(out.f.iter().all(|f| (f + 1.0 / lambda).norm() <= 1e-8 * (1.0 / lambda).norm()));
    }
    let zero = |_: f64| c(0.0, 0.0);
    assert!(resolve(&problem("square_well"), 1.0, c(1.0, 1.0), &xs_of("square_well"), &zero).f.iter().all(|f| f.norm() == 0.0));
}

fn xs_of(name: &str) -> Vec<f64> {
    grid(&problem(name), 101)
}

#[test]
fn eigenfunction_is_scaled_on_indefinite_set() {
    // at t = 0 the monodromy matrix of an eigenvalue mu has eigenvalue 1;
    // the eigenfunction is v0 phi + v1 psi with (L - 1) v = 0
    let pr = problem("square_well");
    let mu = floquet_core::spectrum::eigenvalues_in_box(
        &pr,
        1.2,
        floquet_core::spectrum::ComplexBox::new(0.5, 30.0, -1.0, 1.0).unwrap(),
        100,
    )
    .unwrap()
    .roots[0]
        .lambda;
    let l = floquet_core::transfer::transfer(&pr, mu).unwrap().l;
    let e = Complex64::from_polar(1.0, 1.2);
    let v = if (l[0][1]).norm() > (l[1][0]).norm() {
        [l[0][1], e - l[0][0]]
    } else {
        [e - l[1][1], l[1][0]]
    };
    let tr = solve_trace(&pr, mu, 401).unwrap();
    let g: Vec<Complex64> = tr.values.iter().map(|u| v[0] * u[0] + v[1] * u[2]).collect();
    let lambda = c(2.0, 0.5);
    let req = ResolventRequest {
        z: c(1.2, 0.0),
        lambda,
        grid: tr.grid.clone(),
        g: g.clone(),
    };
    let out = apply_resolvent(&pr, &req).unwrap();
    let scale = sup(&g);
    for (f, g) in out.f.iter().zip(&g) {
        assert!((f - g / (mu - lambda)).norm() <= 1e-6 * scale / (mu - lambda).norm());
    }
}

#[test]
fn kernel_far_from_pole_is_local() {
    // large |d|: the kernel approaches its local part Psi(x)^T 1_{y <= x} J Psi(y)
    let pr = problem("hill");
    let lambda = c(2.0, 0.0);
    // e^{-iz} = e^{-8} while |d| ~ e^8
    let z = c(0.0, -8.0);
    let tr = solve_trace(&pr, lambda, 3).unwrap();
    let (ux, uy) = (tr.values[2], tr.values[1]);
    let local = ux[0] * uy[2] - ux[2] * uy[0];
    let k = green_kernel(&pr, z, lambda, tr.grid[2], tr.grid[1]).unwrap();
    let d = 2.0 * z.cos() - 2.0 * (PI * 2f64.sqrt()).cos();
    assert!((k - local).norm() <= 10.0 / d.norm());
}

#[test]
fn poles_are_reported() {
    let pr = problem("hill");
    // D(1/4) = 2 cos(pi / 2) = 0 = 2 cos(pi / 2)
    let e = green_kernel(&pr, c(PI / 2.0, 0.0), c(0.25, 0.0), 0.5, 1.5);
    assert!(matches!(e, Err(FloquetError::ResolventPole { .. })));
    let xs = grid(&pr, 11);
    let req = ResolventRequest {
        z: c(0.0, 0.0),
        lambda: c(4.0, 0.0),
        grid: xs.clone(),
        g: vec![c(1.0, 0.0); xs.len()],
    };
    assert!(matches!(apply_resolvent(&pr, &req), Err(FloquetError::ResolventPole { .. })));
}

#[test]
fn malformed_requests_are_rejected() {
    let pr = problem("hill");
    let bad = ResolventRequest {
        z: c(0.3, 0.0),
        lambda: c(1.1, 0.2),
        grid: vec![0.0, 1.0, 2.0],
        g: vec![c(1.0, 0.0); 3],
    };
    assert!(matches!(apply_resolvent(&pr, &bad), Err(FloquetError::InvalidInput(_))));
}
