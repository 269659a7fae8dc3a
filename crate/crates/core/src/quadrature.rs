//! Gauss–Legendre rules and composite rules adapted to a problem's
//! breakpoints, graded towards singular power anchors.

use std::f64::consts::PI;

use crate::problem::Problem;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "rule needs at least one node");
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.reverse();
    out
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// Composite rule for `int_lo^hi f(x) dx` respecting the problem's nodes.
/// Panels touching a singular anchor use the substitution
/// `x = x0 + L s^m`, which turns `|x - x0|^tau` into a smooth power of `s`.
pub fn composite_rule(pr: &Problem, lo: f64, hi: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let base = gauss_legendre(order);
    let graded = pr.graded_points();
    let mut cuts: Vec<f64> = pr.nodes().into_iter().filter(|&x| x > lo && x < hi).collect();
    cuts.insert(0, lo);
    cuts.push(hi);
    let grade_at = |x: f64| {
        graded
            .iter()
            .find(|(g, _)| (g - x).abs() <= 1e-12 * pr.period().max(1.0))
            .map(|&(_, m)| m)
    };
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let len = b - a;
        let (ga, gb) = (grade_at(a), grade_at(b));
        let panels = panels.max(1);
        let nsub = if ga.is_some() && gb.is_some() { 2 } else { 1 };
        for half in 0..nsub {
            let (pa, pb) = if nsub == 2 {
                if half == 0 {
                    (a, a + 0.5 * len)
                } else {
                    (a + 0.5 * len, b)
                }
            } else {
                (a, b)
            };
            let plen = pb - pa;
            let lo_grade = if half == 0 { ga } else { None };
            let hi_grade = if nsub == 1 || half == 1 { gb } else { None };
            for k in 0..panels {
                let s0 = k as f64 / panels as f64;
                let s1 = (k + 1) as f64 / panels as f64;
                for &(t, wt) in &base {
                    let s = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * t;
                    let ws = 0.5 * (s1 - s0) * wt;
                    let (x, jac) = match (lo_grade, hi_grade) {
                        (Some(m), _) => (pa + plen * s.powf(m), plen * m * s.powf(m - 1.0)),
                        (None, Some(m)) => (pb - plen * (1.0 - s).powf(m), plen * m * (1.0 - s).powf(m - 1.0)),
                        (None, None) => (pa + plen * s, plen),
                    };
                    // strongly graded nodes can round onto the anchor itself,
                    // where their (negligible) weight would meet an infinite integrand
                    if x > pa && x < pb {
                        out.push((x, ws * jac));
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{CoefficientSet, PowerForm, Segment, SegmentForm};

    #[test]
    fn gauss_rule_is_exact_for_polynomials() {
        let r = gauss_legendre(5);
        let wsum: f64 = r.iter().map(|p| p.1).sum();
        assert!((wsum - 2.0).abs() < 1e-14);
        // degree 9 is integrated exactly
        let i: f64 = r.iter().map(|&(x, w)| w * x.powi(8)).sum();
        assert!((i - 2.0 / 9.0).abs() < 1e-14);
    }

    fn power_cell(tau: f64, anchor: f64) -> Problem {
        let cs = CoefficientSet::new(
            1.0,
            vec![Segment::new(
                0.0,
                1.0,
                SegmentForm::PowerWeighted(PowerForm { rho: vec![1.0], tau, anchor }),
                SegmentForm::Constant(1.0),
                SegmentForm::Constant(0.0),
            )],
        );
        Problem::with_default_tol(cs).unwrap()
    }

    #[test]
    fn graded_rule_integrates_power_singularity() {
        let pr = power_cell(-0.75, 0.0);
        let rule = composite_rule(&pr, 0.0, 1.0, 4, 10);
        let i: f64 = rule.iter().map(|&(x, w)| w * x.powf(-0.75)).sum();
        assert!((i - 4.0).abs() < 1e-12, "{i}");
    }

    #[test]
    fn graded_rule_at_interior_anchor() {
        // x carries the anchor's rounding, so accuracy is limited to about ulp(x0)^(1 + tau)
        let pr = power_cell(0.5, 0.5);
        let rule = composite_rule(&pr, 0.0, 1.0, 4, 10);
        let i: f64 = rule.iter().map(|&(x, w)| w * (x - 0.5f64).abs().sqrt()).sum();
        assert!((i - 2.0 / 3.0 * 0.5f64.powf(1.5) * 2.0).abs() < 1e-12, "{i}");
    }
}
