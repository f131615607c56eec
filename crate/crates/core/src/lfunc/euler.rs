//! Partial Euler products, their logarithms, and Dirichlet polynomials.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hecke::{satake_unchecked, CoefficientTable, MaassFormData};
use crate::special::primes::{is_prime, primes_up_to};

/// Largest term count accepted by [`partial_euler_inverse_coeffs`] (3^11, i.e. X <= 31).
pub const MAX_POLY_TERMS: usize = 177_147;

fn check_half_plane(s: Complex64) -> Result<()> {
    if s.re > 0.5 {
        Ok(())
    } else {
        Err(Error::HalfPlane { re: s.re })
    }
}

/// Primes p <= x together with lambda(p); errors if some prime p <= x is not stored.
fn primes_through(form: &MaassFormData, x: u64) -> Result<Vec<(u64, f64)>> {
    let cap = form.p_cap();
    if x > cap {
        let mut q = cap + 1;
        while q <= x {
            if is_prime(q) {
                return Err(Error::CoefficientCap { n: x, p: q, cap });
            }
            q += 1;
        }
    }
    Ok(form.pairs().take_while(|&(p, _)| p <= x).collect())
}

/// p^{-s}.
fn prime_power_s(p: u64, s: Complex64) -> Complex64 {
    (-s * (p as f64).ln()).exp()
}

/// log(1 - lambda p^{-s} + p^{-2s}) as log(1 - alpha p^{-s}) + log(1 - beta p^{-s}),
/// principal branch in each factor (|alpha p^{-s}| < 1 for |lambda| <= n(p), Re s > 1/2).
pub fn euler_factor_log(lambda: f64, p: u64, s: Complex64) -> Complex64 {
    let x = prime_power_s(p, s);
    let sp = satake_unchecked(lambda);
    (1.0 - sp.alpha * x).ln() + (1.0 - sp.beta * x).ln()
}

/// 1 - lambda p^{-s} + p^{-2s}.
pub fn euler_factor(lambda: f64, p: u64, s: Complex64) -> Complex64 {
    let x = prime_power_s(p, s);
    1.0 - x * lambda + x * x
}

/// L_X(s) = prod_{p <= X} (1 - lambda(p) p^{-s} + p^{-2s}).
pub fn partial_euler_inverse(form: &MaassFormData, x: u64, s: Complex64) -> Result<Complex64> {
    check_half_plane(s)?;
    Ok(primes_through(form, x)?
        .into_iter()
        .fold(Complex64::new(1.0, 0.0), |acc, (p, l)| acc * euler_factor(l, p, s)))
}

/// Sum of principal Satake-factor logarithms over p <= X; a continuous branch of log L_X on Re s > 1/2.
pub fn log_inverse_partial(form: &MaassFormData, x: u64, s: Complex64) -> Result<Complex64> {
    check_half_plane(s)?;
    Ok(primes_through(form, x)?
        .into_iter()
        .map(|(p, l)| euler_factor_log(l, p, s))
        .sum())
}

/// Finite Dirichlet series sum c(m) m^{-s} with u128 indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletPolynomial {
    pub terms: Vec<(u128, f64)>,
}

impl DirichletPolynomial {
    pub fn evaluate(&self, s: Complex64) -> Complex64 {
        // Neumaier-compensated sum; terms can be much larger than the total.
        let (mut sum, mut comp) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &(m, c) in &self.terms {
            let t = (-s * (m as f64).ln()).exp() * c;
            let next = sum + t;
            comp.re += if sum.re.abs() >= t.re.abs() { (sum.re - next.re) + t.re } else { (t.re - next.re) + sum.re };
            comp.im += if sum.im.abs() >= t.im.abs() { (sum.im - next.im) + t.im } else { (t.im - next.im) + sum.im };
            sum = next;
        }
        sum + comp
    }

    pub fn coefficient(&self, m: u128) -> f64 {
        self.terms.binary_search_by_key(&m, |&(k, _)| k).map_or(0.0, |i| self.terms[i].1)
    }
}

/// Coefficients of L_X(s) = sum_m c(m) m^{-s}, with c(m) = sum_{k l^2 = m} lambda(k) mu(k) |mu(k l)|
/// over m supported on primes p <= X (so every m divides P(X) = prod p^2).
pub fn partial_euler_inverse_coeffs(form: &MaassFormData, x: u64) -> Result<DirichletPolynomial> {
    let ps = primes_through(form, x)?;
    let count = 3f64.powi(ps.len() as i32);
    if count > MAX_POLY_TERMS as f64 {
        return Err(Error::Budget { what: format!("3^{} Dirichlet terms for X = {x}", ps.len()) });
    }
    let mut index: u128 = 1;
    for &(p, _) in &ps {
        index = index
            .checked_mul(u128::from(p) * u128::from(p))
            .ok_or_else(|| Error::Budget { what: format!("P({x}) overflows u128") })?;
    }
    // Each prime is in k (factor -lambda(p), index p), in l (factor 1, index p^2), or absent.
    let mut terms: Vec<(u128, f64)> = vec![(1, 1.0)];
    for &(p, l) in &ps {
        let p = u128::from(p);
        let mut next = Vec::with_capacity(terms.len() * 3);
        for &(m, c) in &terms {
            next.push((m, c));
            next.push((m * p, -l * c));
            next.push((m * p * p, c));
        }
        terms = next;
    }
    terms.sort_unstable_by_key(|&(m, _)| m);
    Ok(DirichletPolynomial { terms })
}

/// Direct Dirichlet sum over n <= M, with a partial-summation estimate of the omitted tail
/// (assumes the partial sums beyond M stay within twice their observed maximum).
#[derive(Debug, Clone, Copy)]
pub struct DirichletSum {
    pub value: Complex64,
    pub tail_estimate: f64,
}

pub fn dirichlet_sum(table: &CoefficientTable, s: Complex64, m: u64) -> Result<DirichletSum> {
    if m > table.len() {
        return Err(Error::invalid(format!("table has {} coefficients, {m} requested", table.len())));
    }
    if s.re <= 0.0 {
        return Err(Error::HalfPlane { re: s.re });
    }
    let mut value = Complex64::new(0.0, 0.0);
    let mut partial = 0.0f64;
    let mut max_partial = 0.0f64;
    for n in 1..=m {
        let l = table.get(n);
        value += (-s * (n as f64).ln()).exp() * l;
        partial += l;
        max_partial = max_partial.max(partial.abs());
    }
    let mf = m as f64;
    let tail_estimate = 2.0 * max_partial * mf.powf(-s.re) * (1.0 + s.norm() / s.re);
    Ok(DirichletSum { value, tail_estimate })
}

/// Primes up to X listed with the form's eigenvalues; exposed for callers building their own products.
pub fn form_primes(form: &MaassFormData, x: u64) -> Result<Vec<(u64, f64)>> {
    primes_through(form, x)
}

/// Prime list helper for model-side sums over p <= Y.
pub fn primes_le(y: u64) -> Vec<u64> {
    primes_up_to(y)
}
