#![allow(dead_code)]

use std::f64::consts::PI;

use floquet_core::{CoefficientSet, Complex64, Problem};

pub fn load(name: &str) -> CoefficientSet {
    let path = format!("{}/data/{name}.json", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    CoefficientSet::from_json_str(&text).unwrap()
}

pub fn problem(name: &str) -> Problem {
    Problem::with_default_tol(load(name)).unwrap()
}

/// Every bundled coefficient set that is a valid problem.
pub const BUNDLED: [&str; 6] = [
    "hill",
    "hill_shifted",
    "square_well",
    "square_well_shifted",
    "smooth_indefinite",
    "degenerate_turning_point",
];

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `2 cos(pi sqrt(lambda))`, even in `sqrt`, so branch free.
pub fn hill_d(lambda: Complex64) -> Complex64 {
    2.0 * (PI * lambda.sqrt()).cos()
}

/// Closed form for the square well `w = +-1` on `[0, 1)`, `[1, 2)`, `p = 1`,
/// constant `q`: the product of the two constant-coefficient blocks,
/// `D = 2 C1 C2 + (k1 + k2) S1 S2` with `k = q - lambda w`,
/// `C = cosh(sqrt k)`, `S = sinh(sqrt k) / sqrt k`.
pub fn square_well_d(q: f64, lambda: Complex64) -> Complex64 {
    let block = |k: Complex64| {
        let r = k.sqrt();
        let s = if r.norm() < 1e-8 { Complex64::new(1.0, 0.0) + k / 6.0 } else { r.sinh() / r };
        (r.cosh(), s)
    };
    let (k1, k2) = (q - lambda, q + lambda);
    let (c1, s1) = block(k1);
    let (c2, s2) = block(k2);
    2.0 * c1 * c2 + (k1 + k2) * s1 * s2
}
