//! Dormand–Prince 5(4) with embedded error control, specialised to the
//! seven-component complex state. Steps are clipped so that every requested
//! stop is hit exactly, which makes interpolation unnecessary.

use super::State;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// differences between the 5th and embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 2_000_000;

fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for (c, k) in terms {
        let ch = c * h;
        for i in 0..7 {
            out[i] += k[i] * ch;
        }
    }
    out
}

/// Integrates `y' = f(s, y)` from `s0` to the last entry of `stops`,
/// calling `on_stop(k, y)` when `stops[k]` is reached. Returns the summed
/// error estimate of the accepted steps.
pub(crate) fn integrate<F, G>(
    f: F,
    s0: f64,
    stops: &[f64],
    y: &mut State,
    tol: f64,
    mut on_stop: G,
) -> Result<f64, String>
where
    F: Fn(f64, &State) -> State,
    G: FnMut(usize, &State),
{
    let Some(&s_end) = stops.last() else {
        return Ok(0.0);
    };
    let span = s_end - s0;
    if span <= 0.0 {
        for k in 0..stops.len() {
            on_stop(k, y);
        }
        return Ok(0.0);
    }
    let mut s = s0;
    let mut h = span / 16.0;
    let mut next = 0;
    while next < stops.len() && stops[next] <= s {
        on_stop(next, y);
        next += 1;
    }
    let mut k1 = f(s, y);
    let mut err_sum = 0.0;
    let h_min = span * 1e-15;
    for _ in 0..MAX_STEPS {
        if next >= stops.len() {
            return Ok(err_sum);
        }
        let target = stops[next];
        let clipped = s + h >= target - 1e-14 * span;
        let step = if clipped { target - s } else { h };

        let k2 = f(s + C2 * step, &axpy(y, &[(A21, &k1)], step));
        let k3 = f(s + C3 * step, &axpy(y, &[(A31, &k1), (A32, &k2)], step));
        let k4 = f(s + C4 * step, &axpy(y, &[(A41, &k1), (A42, &k2), (A43, &k3)], step));
        let k5 = f(
            s + C5 * step,
            &axpy(y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], step),
        );
        let s_new = if clipped { target } else { s + step };
        let k6 = f(
            s_new,
            &axpy(y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], step),
        );
        let y_new = axpy(y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], step);
        let k7 = f(s_new, &y_new);

        let mut acc = 0.0;
        for i in 0..7 {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * step;
            let sc = tol + tol * y[i].norm().max(y_new[i].norm());
            acc += (e.norm() / sc).powi(2);
        }
        let err = (acc / 7.0).sqrt();
        if !err.is_finite() {
            return Err(format!("non-finite state near s = {s}"));
        }
        let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        if err <= 1.0 {
            s = s_new;
            *y = y_new;
            k1 = k7;
            err_sum += err * tol;
            if clipped {
                on_stop(next, y);
                next += 1;
                while next < stops.len() && stops[next] <= s {
                    on_stop(next, y);
                    next += 1;
                }
                // keep the natural step size rather than the clipped one
                h = h.max(step * factor);
            } else {
                h = step * factor;
            }
        } else {
            h = step * factor.min(1.0);
            if h < h_min {
                return Err(format!("step size underflow near s = {s}"));
            }
        }
    }
    Err(format!("exceeded {MAX_STEPS} steps"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn harmonic_oscillator_with_stops() {
        // u' = v, v' = -u from (1, 0): u = cos s
        let f = |_s: f64, y: &State| {
            let mut d = [Complex64::new(0.0, 0.0); 7];
            d[0] = y[1];
            d[1] = -y[0];
            d
        };
        let mut y = [Complex64::new(0.0, 0.0); 7];
        y[0] = Complex64::new(1.0, 0.0);
        let stops = [0.5, 1.0, 3.0];
        let mut seen = Vec::new();
        integrate(f, 0.0, &stops, &mut y, 1e-12, |k, y| seen.push((k, y[0].re))).unwrap();
        assert_eq!(seen.len(), 3);
        for (k, u) in seen {
            assert!((u - stops[k].cos()).abs() < 1e-10, "{k}: {u}");
        }
    }
}
