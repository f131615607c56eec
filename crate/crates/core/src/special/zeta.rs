//! Riemann zeta by Euler-Maclaurin summation.

use num_complex::Complex64;

use super::gamma::bernoulli_even;
use crate::error::{Error, Result};

/// zeta(s) with N terms summed directly and K Bernoulli corrections.
pub fn zeta_euler_maclaurin(s: Complex64, n: usize, k: usize) -> Result<Complex64> {
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::ZetaPole);
    }
    if n < 2 || k == 0 || k > 20 {
        return Err(Error::invalid(format!("Euler-Maclaurin orders N = {n}, K = {k}")));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 1..n {
        acc += (-s * (m as f64).ln()).exp();
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let n_pow = (-s * ln_n).exp();
    acc += n_pow * nf / (s - 1.0) + n_pow * 0.5;
    // B_{2j}/(2j)! * s(s+1)...(s+2j-2) * N^{-s-2j+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut npow = n_pow / nf;
    for j in 1..=k {
        acc += rising * npow * (bernoulli_even(j) / fact);
        let a = s + (2 * j - 1) as f64;
        let b = s + (2 * j) as f64;
        rising *= a * b;
        fact *= ((2 * j + 1) * (2 * j + 2)) as f64;
        npow /= nf * nf;
    }
    Ok(acc)
}

/// Reference zeta(s) for moderate |Im s| (accurate to about 1e-13 for Re s > -5, |Im s| <= 1000).
pub fn zeta_reference(s: Complex64) -> Result<Complex64> {
    let n = 20 + s.im.abs().ceil() as usize + s.re.min(0.0).abs().ceil() as usize * 4;
    zeta_euler_maclaurin(s, n, 16)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn even_values() {
        let z2 = zeta_reference(Complex64::new(2.0, 0.0)).unwrap();
        assert!((z2.re - PI * PI / 6.0).abs() < 1e-14);
        let z4 = zeta_reference(Complex64::new(4.0, 0.0)).unwrap();
        assert!((z4.re - PI.powi(4) / 90.0).abs() < 1e-14);
    }

    #[test]
    fn first_zero() {
        let z = zeta_reference(Complex64::new(0.5, 14.134_725_141_734_693)).unwrap();
        assert!(z.norm() < 1e-12, "{z}");
    }

    #[test]
    fn negative_axis() {
        let z = zeta_reference(Complex64::new(-1.0, 0.0)).unwrap();
        assert!((z.re + 1.0 / 12.0).abs() < 1e-13);
        let z = zeta_reference(Complex64::new(0.0, 0.0)).unwrap();
        assert!((z.re + 0.5).abs() < 1e-14);
    }

    #[test]
    fn truncation_orders_agree() {
        for &(x, y) in &[(0.5, 3.0), (0.75, 40.0), (1.5, 90.0), (0.2, -70.0)] {
            let s = Complex64::new(x, y);
            let a = zeta_reference(s).unwrap();
            let b = zeta_euler_maclaurin(s, 2 * (20 + y.abs() as usize), 20).unwrap();
            assert!((a - b).norm() < 1e-12 * a.norm().max(1.0), "s = {s}");
        }
    }

    #[test]
    fn pole() {
        assert!(matches!(zeta_reference(Complex64::new(1.0, 0.0)), Err(Error::ZetaPole)));
    }
}
