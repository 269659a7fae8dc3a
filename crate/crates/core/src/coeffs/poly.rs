//! Small helpers for real polynomials stored as ascending coefficient lists.

/// Horner evaluation of `c[0] + c[1] s + c[2] s^2 + ...`.
pub fn eval(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * s + a)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| k as f64 * a)
        .collect()
}

/// Re-expands the polynomial around a shifted origin: returns `d` with
/// `sum d_k s^k == sum c_k (s + shift)^k`.
pub fn taylor_shift(c: &[f64], shift: f64) -> Vec<f64> {
    let mut d = c.to_vec();
    let n = d.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            d[j] += shift * d[j + 1];
        }
    }
    d
}

pub fn is_zero(c: &[f64]) -> bool {
    c.iter().all(|&a| a == 0.0)
}

/// Real zeros of `c` in `[lo, hi]` located by a sign scan and bisection.
/// Touching zeros between samples are found through the derivative's zeros.
pub fn zeros_in(c: &[f64], lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let mut out = Vec::new();
    if c.len() < 2 || hi <= lo {
        return out;
    }
    let xs: Vec<f64> = (0..=samples)
        .map(|k| lo + (hi - lo) * k as f64 / samples as f64)
        .collect();
    let vals: Vec<f64> = xs.iter().map(|&x| eval(c, x)).collect();
    for k in 0..samples {
        let (a, b) = (vals[k], vals[k + 1]);
        if a == 0.0 {
            out.push(xs[k]);
        } else if a * b < 0.0 {
            out.push(bisect(c, xs[k], xs[k + 1]));
        }
    }
    if vals[samples] == 0.0 {
        out.push(hi);
    }
    out
}

/// Local extrema candidates of `c` inside `[lo, hi]`.
pub fn critical_points(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    zeros_in(&derivative(c), lo, hi, 256)
}

fn bisect(c: &[f64], mut a: f64, mut b: f64) -> f64 {
    let fa = eval(c, a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = eval(c, m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
