//! Hecke eigenvalue data for level-one Maass forms and the coefficients it determines.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::primes::{factorize, primes_up_to, smallest_prime_factors};

/// Relative slack on |lambda(p)| <= n(p) for values that went through decimal round trips.
const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// epsilon in {0, 1}.
    pub fn epsilon(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn from_epsilon(e: u8) -> Result<Self> {
        match e {
            0 => Ok(Parity::Even),
            1 => Ok(Parity::Odd),
            _ => Err(Error::invalid(format!("parity must be 0 or 1, got {e}"))),
        }
    }

    /// (-1)^epsilon.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Lmfdb,
    Synthetic,
    Fixture,
}

/// n(p) = sqrt(p) + 1/sqrt(p).
pub fn hecke_norm(p: u64) -> f64 {
    let s = (p as f64).sqrt();
    s + 1.0 / s
}

/// Roots of x^2 - lambda x + 1, larger modulus first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatakePair {
    pub alpha: Complex64,
    pub beta: Complex64,
}

pub fn satake(lambda: f64, p: u64) -> Result<SatakePair> {
    let bound = hecke_norm(p);
    if !lambda.is_finite() || lambda.abs() > bound * (1.0 + BOUND_SLACK) {
        return Err(Error::BoundViolation { label: String::new(), p, value: lambda, bound });
    }
    Ok(satake_unchecked(lambda))
}

pub(crate) fn satake_unchecked(lambda: f64) -> SatakePair {
    if lambda.abs() >= 2.0 {
        let d = (lambda * lambda - 4.0).sqrt();
        let alpha = 0.5 * (lambda + lambda.signum() * d);
        SatakePair { alpha: Complex64::new(alpha, 0.0), beta: Complex64::new(1.0 / alpha, 0.0) }
    } else {
        let im = 0.5 * (4.0 - lambda * lambda).sqrt();
        let a = Complex64::new(0.5 * lambda, im);
        SatakePair { alpha: a, beta: a.conj() }
    }
}

/// Prime-indexed Hecke data of one form: lambda(p) for every prime p <= p_cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaassFormData {
    pub label: String,
    pub r: f64,
    pub parity: Parity,
    primes: Vec<u64>,
    eigs: Vec<f64>,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_alpha: Option<f64>,
}

impl MaassFormData {
    /// Validate and build. `pairs` must list every prime up to its largest entry.
    pub fn new(
        label: impl Into<String>,
        r: f64,
        parity: Parity,
        mut pairs: Vec<(u64, f64)>,
        source: Source,
    ) -> Result<Self> {
        let label = label.into();
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::validation(&label, format!("spectral parameter r = {r} must be positive")));
        }
        pairs.sort_by_key(|&(p, _)| p);
        let cap = pairs.last().map_or(1, |&(p, _)| p);
        let expected = primes_up_to(cap);
        if expected.len() != pairs.len() || expected.iter().zip(&pairs).any(|(&a, &(b, _))| a != b) {
            let missing = expected.iter().find(|&&p| pairs.binary_search_by_key(&p, |&(q, _)| q).is_err());
            let reason = match missing {
                Some(p) => format!("prime {p} <= {cap} has no eigenvalue"),
                None => "eigenvalue list contains non-primes or duplicates".to_string(),
            };
            return Err(Error::validation(&label, reason));
        }
        for &(p, v) in &pairs {
            let bound = hecke_norm(p);
            if !v.is_finite() || v.abs() > bound * (1.0 + BOUND_SLACK) {
                return Err(Error::BoundViolation { label, p, value: v, bound });
            }
        }
        let (primes, eigs) = pairs.into_iter().unzip();
        Ok(Self { label, r, parity, primes, eigs, source, norm_alpha: None })
    }

    /// Largest prime with a stored eigenvalue (1 when empty).
    pub fn p_cap(&self) -> u64 {
        self.primes.last().copied().unwrap_or(1)
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigs
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.primes.iter().copied().zip(self.eigs.iter().copied())
    }

    pub fn lambda_p(&self, p: u64) -> Result<f64> {
        match self.primes.binary_search(&p) {
            Ok(i) => Ok(self.eigs[i]),
            Err(_) if p > self.p_cap() => Err(Error::CoefficientCap { n: p, p, cap: self.p_cap() }),
            Err(_) => Err(Error::invalid(format!("{p} is not prime"))),
        }
    }

    /// Forms keeping only primes p <= cap.
    pub fn truncated(&self, cap: u64) -> Self {
        let k = self.primes.partition_point(|&p| p <= cap);
        Self {
            primes: self.primes[..k].to_vec(),
            eigs: self.eigs[..k].to_vec(),
            ..self.clone()
        }
    }
}

/// lambda(p^k) from lambda(p) by the Hecke recurrence.
pub fn prime_power(lambda: f64, k: u32) -> f64 {
    let (mut prev, mut cur) = (1.0, lambda);
    if k == 0 {
        return 1.0;
    }
    for _ in 1..k {
        let next = lambda * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// lambda(n) by factorization, multiplicativity and the prime-power recurrence.
pub fn hecke_eigenvalue_n(form: &MaassFormData, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("lambda(0) is undefined"));
    }
    let mut acc = 1.0;
    for (p, k) in factorize(n) {
        let lp = form.lambda_p(p).map_err(|e| match e {
            Error::CoefficientCap { p, cap, .. } => Error::CoefficientCap { n, p, cap },
            e => e,
        })?;
        acc *= prime_power(lp, k);
    }
    Ok(acc)
}

/// lambda(n) for 1 <= n <= len, indexed so that `get(n)` is lambda(n).
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    values: Vec<f64>,
}

impl CoefficientTable {
    pub fn build(form: &MaassFormData, len: u64) -> Result<Self> {
        let m = len as usize;
        let spf = smallest_prime_factors(m.max(1));
        let mut values = vec![0.0; m + 1];
        if m >= 1 {
            values[1] = 1.0;
        }
        for n in 2..=m {
            let p = spf[n] as usize;
            values[n] = if p == n {
                form.lambda_p(n as u64).map_err(|e| match e {
                    Error::CoefficientCap { cap, .. } => Error::CoefficientCap { n: n as u64, p: n as u64, cap },
                    e => e,
                })?
            } else {
                let q = n / p;
                if q % p == 0 {
                    values[p] * values[q] - values[q / p]
                } else {
                    values[p] * values[q]
                }
            };
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.values.len() <= 1
    }

    pub fn get(&self, n: u64) -> f64 {
        self.values[n as usize]
    }

    /// lambda(1..=len) as a slice where index 0 holds lambda(1).
    pub fn as_slice(&self) -> &[f64] {
        &self.values[1..]
    }
}

/// (1/N) sum_{n<=N} lambda(n)^2.
pub fn ramanujan_average(form: &MaassFormData, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("ramanujan_average needs N >= 1"));
    }
    let t = CoefficientTable::build(form, n)?;
    Ok(t.as_slice().iter().map(|v| v * v).sum::<f64>() / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_form(value: f64, cap: u64) -> MaassFormData {
        let pairs = primes_up_to(cap).into_iter().map(|p| (p, value)).collect();
        MaassFormData::new("c", 1.0, Parity::Even, pairs, Source::Synthetic).unwrap()
    }

    #[test]
    fn norms() {
        assert!((hecke_norm(2) - 3.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((hecke_norm(2) - 2.121_320_343_559_642).abs() < 1e-15);
    }

    #[test]
    fn satake_roots() {
        let s = satake(0.0, 2).unwrap();
        assert!((s.alpha - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((s.beta - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        let s = satake(2.0, 3).unwrap();
        assert_eq!(s.alpha, Complex64::new(1.0, 0.0));
        assert_eq!(s.beta, Complex64::new(1.0, 0.0));
        let s = satake(hecke_norm(2), 2).unwrap();
        assert!((s.alpha.re - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(satake(2.2, 2), Err(Error::BoundViolation { .. })));
    }

    #[test]
    fn divisor_form() {
        let f = constant_form(2.0, 1000);
        let t = CoefficientTable::build(&f, 1000).unwrap();
        for n in 1..=1000 {
            assert_eq!(t.get(n), crate::special::primes::divisor_count(n) as f64);
        }
        // sum_{n<=100} d(n)^2 = 3046
        assert!((ramanujan_average(&f, 100).unwrap() - 30.46).abs() < 1e-12);
    }

    #[test]
    fn cap_errors() {
        let f = constant_form(1.0, 10);
        assert!(matches!(hecke_eigenvalue_n(&f, 22), Err(Error::CoefficientCap { n: 22, p: 11, cap: 7 })));
        assert!(matches!(CoefficientTable::build(&f, 12), Err(Error::CoefficientCap { n: 11, .. })));
        assert_eq!(hecke_eigenvalue_n(&f, 1).unwrap(), 1.0);
    }

    #[test]
    fn validation() {
        let bad = MaassFormData::new("x", 1.0, Parity::Odd, vec![(2, 0.1), (5, 0.2)], Source::Synthetic);
        assert!(matches!(bad, Err(Error::Validation { .. })));
        let bad = MaassFormData::new("x", 1.0, Parity::Odd, vec![(2, 2.2)], Source::Synthetic);
        assert!(matches!(bad, Err(Error::BoundViolation { p: 2, .. })));
        let bad = MaassFormData::new("x", -1.0, Parity::Odd, vec![(2, 0.2)], Source::Synthetic);
        assert!(bad.is_err());
    }
}
