//! The p-adic Plancherel (Sarnak) measure mu_p on [-2, 2]:
//! d mu_p = (1 + p) / (2 pi) * sqrt(4 - x^2) / (n(p)^2 - x^2) dx.
//!
//! Masses are computed in the variable x = 2 sin(theta), where the density is smooth.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hecke::{hecke_norm, MaassFormData};
use crate::rng::{uniform, StreamRng};
use crate::special::quad::{gauss_legendre, gk15, integrate, MAX_PANELS};

const TABLE_SIZE: usize = 4096;

/// Density of mu_p at x (zero outside [-2, 2]).
pub fn density(p: u64, x: f64) -> f64 {
    if !(-2.0..=2.0).contains(&x) {
        return 0.0;
    }
    let n = hecke_norm(p);
    (1.0 + p as f64) / (2.0 * PI) * (4.0 - x * x).sqrt() / (n * n - x * x)
}

/// Semicircle density (1/2pi) sqrt(4 - x^2), the p -> infinity limit.
pub fn semicircle_density(x: f64) -> f64 {
    if !(-2.0..=2.0).contains(&x) {
        return 0.0;
    }
    (4.0 - x * x).sqrt() / (2.0 * PI)
}

/// d mu_p / d theta at theta, where x = 2 sin theta.
fn theta_density(p: u64, theta: f64) -> f64 {
    let n = hecke_norm(p);
    let (s, c) = theta.sin_cos();
    2.0 / PI * (1.0 + p as f64) * c * c / (n * n - 4.0 * s * s)
}

fn to_theta(x: f64) -> f64 {
    (x.clamp(-2.0, 2.0) / 2.0).asin()
}

/// mu_p([-2, 2]).
pub fn total_mass(p: u64) -> Result<f64> {
    interval_mass(p, -2.0, 2.0)
}

/// mu_p([a, b]); the interval is clipped to [-2, 2].
pub fn interval_mass(p: u64, a: f64, b: f64) -> Result<f64> {
    if p < 2 {
        return Err(Error::invalid(format!("mu_p needs a prime, got {p}")));
    }
    if !(a <= b) {
        return Err(Error::invalid(format!("interval [{a}, {b}] is empty or not ordered")));
    }
    let (ta, tb) = (to_theta(a), to_theta(b));
    let q = integrate(|t| theta_density(p, t), ta, tb, 1e-15, 1e-14, MAX_PANELS)?;
    Ok(q.value)
}

/// mu_p with its CDF tabulated on a Chebyshev-spaced grid (uniform in theta) and
/// interpolated by monotone cubic Hermite pieces.
#[derive(Debug, Clone)]
pub struct SarnakMeasure {
    p: u64,
    h: f64,
    cdf: Vec<f64>,
    /// Hermite slopes (d F / d theta) for the left and right end of each panel.
    slopes: Vec<(f64, f64)>,
}

impl SarnakMeasure {
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 {
            return Err(Error::invalid(format!("mu_p needs a prime, got {p}")));
        }
        let m = TABLE_SIZE;
        let h = PI / (m - 1) as f64;
        let theta = |k: usize| -FRAC_PI_2 + k as f64 * h;
        let f = |t: f64| theta_density(p, t);
        let mut cdf = Vec::with_capacity(m);
        cdf.push(0.0);
        for k in 0..m - 1 {
            let (v, _) = gk15(&f, theta(k), theta(k + 1));
            cdf.push(cdf[k] + v);
        }
        let total = cdf[m - 1];
        for v in cdf.iter_mut() {
            *v /= total;
        }
        let d: Vec<f64> = (0..m).map(|k| f(theta(k)).max(0.0) / total).collect();
        let slopes = (0..m - 1)
            .map(|k| {
                let delta = (cdf[k + 1] - cdf[k]) / h;
                if delta <= 0.0 {
                    return (0.0, 0.0);
                }
                let (a, b) = (d[k] / delta, d[k + 1] / delta);
                let r = a.hypot(b);
                if r > 3.0 {
                    let tau = 3.0 / r;
                    (tau * d[k], tau * d[k + 1])
                } else {
                    (d[k], d[k + 1])
                }
            })
            .collect();
        Ok(Self { p, h, cdf, slopes })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    fn hermite(&self, k: usize, t: f64) -> f64 {
        let (m0, m1) = self.slopes[k];
        let (y0, y1) = (self.cdf[k], self.cdf[k + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * y0 + h10 * self.h * m0 + h01 * y1 + h11 * self.h * m1
    }

    pub fn density(&self, x: f64) -> f64 {
        density(self.p, x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= -2.0 {
            return 0.0;
        }
        if x >= 2.0 {
            return 1.0;
        }
        let u = (to_theta(x) + FRAC_PI_2) / self.h;
        let k = (u.floor() as usize).min(self.slopes.len() - 1);
        self.hermite(k, u - k as f64).clamp(0.0, 1.0)
    }

    /// mu_p([a, b]) from the table.
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        (self.cdf(b) - self.cdf(a)).max(0.0)
    }

    /// Smallest x with F(x) >= u.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return -2.0;
        }
        if u >= 1.0 {
            return 2.0;
        }
        let k = (self.cdf.partition_point(|&v| v < u).max(1) - 1).min(self.slopes.len() - 1);
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.hermite(k, mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let theta = -FRAC_PI_2 + (k as f64 + 0.5 * (lo + hi)) * self.h;
        2.0 * theta.sin()
    }

    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        self.quantile(uniform(rng))
    }

    /// Draw from mu_p conditioned on [a, b].
    pub fn sample_in(&self, a: f64, b: f64, rng: &mut StreamRng) -> f64 {
        let (fa, fb) = (self.cdf(a), self.cdf(b));
        let x = self.quantile(fa + uniform(rng) * (fb - fa));
        x.clamp(a.max(-2.0), b.min(2.0))
    }
}

/// Kolmogorov-Smirnov distance between the sample and a continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_99(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// One box Omega_p = [omega_p - delta, omega_p + delta].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxInterval {
    pub p: u64,
    pub omega: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Boxes around a reference assignment for every prime p <= Y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxFamily {
    pub delta: f64,
    pub boxes: Vec<BoxInterval>,
}

impl BoxFamily {
    /// `omega` lists (p, omega_p) for the primes in the family.
    pub fn new(omega: &[(u64, f64)], delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid(format!("box half-width must be positive, got {delta}")));
        }
        let mut boxes = Vec::with_capacity(omega.len());
        for &(p, w) in omega {
            let (lo, hi) = (w - delta, w + delta);
            let n = hecke_norm(p);
            if lo < -n || hi > n {
                return Err(Error::invalid(format!(
                    "box [{lo}, {hi}] for p = {p} leaves [-n(p), n(p)] = [-{n}, {n}]"
                )));
            }
            boxes.push(BoxInterval { p, omega: w, lo, hi });
        }
        Ok(Self { delta, boxes })
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.boxes.iter().map(|b| b.p)
    }

    /// prod_p mu_p(Omega_p) by direct quadrature.
    pub fn product_mass(&self) -> Result<f64> {
        self.boxes.iter().try_fold(1.0, |acc, b| Ok(acc * interval_mass(b.p, b.lo, b.hi)?))
    }
}

/// Mean over forms of `testfn` applied to (lambda(p))_{p in primes}.
pub fn empirical_average(
    forms: &[MaassFormData],
    primes: &[u64],
    testfn: impl Fn(&[f64]) -> f64,
) -> Result<f64> {
    if forms.is_empty() {
        return Err(Error::invalid("empirical average over an empty family"));
    }
    let mut buf = vec![0.0; primes.len()];
    let mut acc = 0.0;
    for f in forms {
        for (slot, &p) in buf.iter_mut().zip(primes) {
            *slot = f.lambda_p(p)?;
        }
        acc += testfn(&buf);
    }
    Ok(acc / forms.len() as f64)
}

/// int testfn d(prod_p mu_p) by a tensor Gauss-Legendre rule in theta.
pub fn product_integral(primes: &[u64], nodes: usize, testfn: impl Fn(&[f64]) -> f64) -> Result<f64> {
    let k = primes.len();
    let total = (nodes as f64).powi(k as i32);
    if total > (1u64 << 24) as f64 {
        return Err(Error::Budget { what: format!("{nodes}^{k} tensor nodes") });
    }
    let (gx, gw) = gauss_legendre(nodes);
    let axes: Vec<Vec<(f64, f64)>> = primes
        .iter()
        .map(|&p| {
            gx.iter()
                .zip(&gw)
                .map(|(&x, &w)| {
                    let theta = FRAC_PI_2 * x;
                    (2.0 * theta.sin(), w * FRAC_PI_2 * theta_density(p, theta))
                })
                .collect()
        })
        .collect();
    let mut idx = vec![0usize; k];
    let mut point = vec![0.0; k];
    let mut acc = 0.0;
    loop {
        let mut w = 1.0;
        for j in 0..k {
            let (x, wj) = axes[j][idx[j]];
            point[j] = x;
            w *= wj;
        }
        acc += w * testfn(&point);
        let mut j = 0;
        loop {
            if j == k {
                return Ok(acc);
            }
            idx[j] += 1;
            if idx[j] < nodes {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_examples() {
        assert!((density(2, 0.0) - 3.0 / (2.0 * PI) * 2.0 / 4.5).abs() < 1e-15);
        assert!((density(2, 0.0) - 0.212_206_590_789_193_8).abs() < 1e-15);
        assert_eq!(density(3, 2.0), 0.0);
        assert_eq!(density(3, -2.5), 0.0);
    }

    #[test]
    fn table_matches_quadrature() {
        for p in [2, 7, 101] {
            let m = SarnakMeasure::new(p).unwrap();
            for k in 0..=40 {
                let x = -2.0 + 4.0 * k as f64 / 40.0;
                let direct = interval_mass(p, -2.0, x).unwrap();
                assert!((m.cdf(x) - direct).abs() < 1e-12, "p = {p}, x = {x}");
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let m = SarnakMeasure::new(3).unwrap();
        for k in 1..100 {
            let u = k as f64 / 100.0;
            assert!((m.cdf(m.quantile(u)) - u).abs() < 1e-12);
        }
        assert_eq!(m.quantile(0.0), -2.0);
        assert_eq!(m.quantile(1.0), 2.0);
    }

    #[test]
    fn product_integral_of_indicator_free_function() {
        let v = product_integral(&[2, 3], 24, |x| x[0] * x[0] + x[1]).unwrap();
        let second = product_integral(&[2], 24, |x| x[0] * x[0]).unwrap();
        assert!((v - second).abs() < 1e-12);
        assert!(product_integral(&[2, 3, 5, 7, 11, 13], 24, |_| 1.0).is_err());
    }

    #[test]
    fn box_family_checks_range() {
        assert!(BoxFamily::new(&[(2, 2.0)], 0.2).is_err());
        let b = BoxFamily::new(&[(2, 0.0), (3, 0.5)], 0.3).unwrap();
        let m = b.product_mass().unwrap();
        assert!(m > 0.0 && m < 1.0);
    }
}
