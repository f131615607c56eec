//! Smooth cutoff phi: 1 on [0, 1], 0 on [2, inf), with the C-infinity transition
//! h(t) = g(1 - t) / (g(t) + g(1 - t)), g(t) = exp(-1/t), on [1, 2].

use num_complex::Complex64;

use super::quad::{integrate, MAX_PANELS};
use crate::error::{Error, Result};

/// exp(1/(1-t) - 1/t) = g(t) / g(1-t), for 0 < t < 1.
fn ratio(t: f64) -> f64 {
    (1.0 / (1.0 - t) - 1.0 / t).exp()
}

/// phi(x) for x >= 0.
pub fn cutoff(x: f64) -> f64 {
    if x <= 1.0 {
        1.0
    } else if x >= 2.0 {
        0.0
    } else {
        1.0 / (1.0 + ratio(x - 1.0))
    }
}

/// phi'(x); supported in (1, 2) and non-positive.
pub fn cutoff_derivative(x: f64) -> f64 {
    if x <= 1.0 || x >= 2.0 {
        return 0.0;
    }
    let t = x - 1.0;
    let e = ratio(t);
    if !e.is_finite() || e == 0.0 {
        return 0.0;
    }
    let dlog = 1.0 / ((1.0 - t) * (1.0 - t)) + 1.0 / (t * t);
    -dlog / (e + 2.0 + 1.0 / e)
}

/// Mellin transform of phi, int_0^inf phi(x) x^{w-1} dx, continued to all w != 0 by
/// -(1/w) int_1^2 phi'(x) x^w dx.
pub fn mellin_cutoff(w: Complex64) -> Result<Complex64> {
    if w == Complex64::new(0.0, 0.0) {
        return Err(Error::MellinPole);
    }
    if !w.re.is_finite() || !w.im.is_finite() {
        return Err(Error::invalid(format!("mellin_cutoff at non-finite w = {w}")));
    }
    let q = integrate(
        |x: f64| {
            let d = cutoff_derivative(x);
            if d == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                (w * x.ln()).exp() * d
            }
        },
        1.0,
        2.0,
        1e-17,
        1e-13,
        MAX_PANELS,
    )?;
    Ok(-q.value / w)
}
