//! Complex log-gamma on the principal branch continuous off the negative real axis.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// B_{2k} for k = 1..=20.
const BERNOULLI: [f64; 20] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
    -7709321041217.0 / 510.0,
    2577687858367.0 / 6.0,
    -26315271553053477373.0 / 1919190.0,
    2929993913841559.0 / 6.0,
    -261082718496449122051.0 / 13530.0,
];

pub(crate) fn bernoulli_even(k: usize) -> f64 {
    BERNOULLI[k - 1]
}

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;
const STIRLING_MIN: f64 = 15.0;

/// log Gamma(z). Poles at non-positive integers are reported as errors.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::invalid(format!("log_gamma of non-finite argument {z}")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::GammaPole { re: z.re, im: z.im });
    }
    if z.im < 0.0 {
        return log_gamma(z.conj()).map(|v| v.conj());
    }
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.re < 0.0 || w.norm_sqr() < STIRLING_MIN * STIRLING_MIN {
        shift += w.ln();
        w += 1.0;
    }
    Ok(stirling(w) - shift)
}

fn stirling(z: Complex64) -> Complex64 {
    let mut acc = (z - 0.5) * z.ln() - z + HALF_LN_TWO_PI;
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut pow = inv;
    for (k, b) in BERNOULLI.iter().enumerate().take(12) {
        let k = (k + 1) as f64;
        let term = pow * (b / (2.0 * k * (2.0 * k - 1.0)));
        acc += term;
        if term.norm() < 1e-18 * acc.norm() {
            break;
        }
        pow *= inv2;
    }
    acc
}

/// log Gamma on the positive real axis.
pub fn ln_gamma_real(x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::invalid(format!("ln_gamma_real needs x > 0, got {x}")));
    }
    Ok(log_gamma(Complex64::new(x, 0.0))?.re)
}
