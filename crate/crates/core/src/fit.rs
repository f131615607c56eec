//! Approximating a target log f on the disc K by finite Euler-product logarithms
//! sum_{p <= Y} log(1 - omega_p p^{-s} + p^{-2s}), |omega_p| <= 2.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lfunc::euler::euler_factor_log;
use crate::lfunc::DiscK;
use crate::rng;
use crate::special::primes::{is_prime, primes_up_to};
use crate::special::quad::{integrate, MAX_PANELS};

/// Non-vanishing target f = exp(sum_k a_k (s - 3/4)^k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub coeffs: Vec<f64>,
}

impl TargetSpec {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("target coefficients must be finite"));
        }
        Ok(Self { coeffs })
    }

    /// f = 1.
    pub fn one() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn log_target(&self, s: Complex64) -> Complex64 {
        let z = s - DiscK::CENTER;
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
    }

    pub fn value(&self, s: Complex64) -> Complex64 {
        self.log_target(s).exp()
    }
}

/// omega_p in [-2, 2] for every prime p <= Y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaAssignment {
    pub y: u64,
    pub values: Vec<(u64, f64)>,
}

impl OmegaAssignment {
    pub fn new(y: u64, mut values: Vec<(u64, f64)>) -> Result<Self> {
        values.sort_by_key(|&(p, _)| p);
        let primes = primes_up_to(y);
        for &p in &primes {
            if values.binary_search_by_key(&p, |&(q, _)| q).is_err() {
                return Err(Error::MissingCoordinate { p });
            }
        }
        if values.len() != primes.len() {
            return Err(Error::invalid("omega assignment lists primes beyond Y or non-primes"));
        }
        if let Some(&(p, w)) = values.iter().find(|&&(_, w)| !(w.abs() <= 2.0)) {
            return Err(Error::invalid(format!("omega_{p} = {w} is outside [-2, 2]")));
        }
        Ok(Self { y, values })
    }

    pub fn zeros(y: u64) -> Self {
        Self { y, values: primes_up_to(y).into_iter().map(|p| (p, 0.0)).collect() }
    }

    pub fn get(&self, p: u64) -> Result<f64> {
        self.values
            .binary_search_by_key(&p, |&(q, _)| q)
            .map(|i| self.values[i].1)
            .map_err(|_| Error::MissingCoordinate { p })
    }

    /// Restriction to primes p <= y.
    pub fn restrict(&self, y: u64) -> Self {
        Self { y: y.min(self.y), values: self.values.iter().copied().filter(|&(p, _)| p <= y).collect() }
    }
}

/// sum_{p <= Y} log(1 - omega_p p^{-s} + p^{-2s}).
pub fn model_log_sum(omega: &OmegaAssignment, s: Complex64) -> Complex64 {
    omega.values.iter().map(|&(p, w)| euler_factor_log(w, p, s)).sum()
}

/// log f(s) + sum_{p <= Y} log(1 - omega_p p^{-s} + p^{-2s}).
pub fn fit_residual(target: &TargetSpec, omega: &OmegaAssignment, s: Complex64) -> Complex64 {
    target.log_target(s) + model_log_sum(omega, s)
}

/// max over the boundary grid of K of |fit_residual|.
pub fn fit_objective(target: &TargetSpec, omega: &OmegaAssignment, k: &DiscK) -> f64 {
    k.boundary().into_iter().map(|s| fit_residual(target, omega, s).norm()).fold(0.0, f64::max)
}

fn tail_exponent(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= 0.25) {
        return Err(Error::invalid(format!("theta must lie in (0, 1/4], got {theta}")));
    }
    Ok(0.5 + theta)
}

/// 2 q^2 / (1 - q), q = 4 x^{-a}.
fn tail_term(x: f64, a: f64) -> f64 {
    let q = 4.0 * x.powf(-a);
    2.0 * q * q / (1.0 - q)
}

fn first_prime_after(z: u64) -> u64 {
    let mut q = z + 1;
    while !is_prime(q) {
        q += 1;
    }
    q
}

/// Smallest Z for which the tail series converges (4 q^{-a} < 1 at the next prime q > Z).
pub fn min_admissible_z(theta: f64) -> Result<u64> {
    let a = tail_exponent(theta)?;
    let mut z = 1;
    while 4.0 * (first_prime_after(z) as f64).powf(-a) >= 1.0 {
        z = first_prime_after(z);
    }
    Ok(z)
}

fn horizon(z: u64) -> u64 {
    (4 * z.max(1)).next_power_of_two().max(1 << 24)
}

/// Upper bound for sum_{p > H} 2 q^2 / (1 - q) from pi(H) and Dusart's
/// pi(x) <= x / ln x (1 + 1.2762 / ln x):
///   sum_{p > H} f(p) = -f(H) pi(H) + int_H^inf pi(x) (-f'(x)) dx.
fn remainder_bound(h: u64, pi_h: u64, a: f64) -> Result<f64> {
    let hf = h as f64;
    let integrand = |v: f64| {
        if v >= 1.0 {
            return 0.0;
        }
        let u = v / (1.0 - v);
        if u > 700.0 {
            return 0.0;
        }
        let x = hf * u.exp();
        let q = 4.0 * x.powf(-a);
        let lx = x.ln();
        let upper = x / lx * (1.0 + 1.2762 / lx);
        // (-f'(x)) dx = 2 a q^2 (2 - q) / (x (1 - q)^2) * x du, du = dv / (1 - v)^2
        upper * 2.0 * a * q * q * (2.0 - q) / ((1.0 - q) * (1.0 - q)) / ((1.0 - v) * (1.0 - v))
    };
    let q = integrate(integrand, 0.0, 1.0, 1e-16, 1e-12, MAX_PANELS)?;
    Ok(q.value - tail_term(hf, a) * pi_h as f64)
}

fn neumaier(acc: &mut (f64, f64), x: f64) {
    let (s, c) = *acc;
    let t = s + x;
    let c = if s.abs() >= x.abs() { c + ((s - t) + x) } else { c + ((x - t) + s) };
    *acc = (t, c);
}

/// Upper bound for 2 sum_{p > Z} q_p^2 / (1 - q_p), q_p = 4 p^{-(1/2 + theta)}:
/// the exact prime sum up to a horizon H(Z) >= 4Z plus a certified bound for p > H.
pub fn tail_bound(z: u64, theta: f64) -> Result<f64> {
    let a = tail_exponent(theta)?;
    let q = first_prime_after(z);
    let ratio = 4.0 * (q as f64).powf(-a);
    if ratio >= 1.0 {
        return Err(Error::Divergence { z, q, ratio });
    }
    let h = horizon(z);
    let mut acc = (0.0, 0.0);
    let mut pi_h = 0u64;
    crate::special::primes::for_each_prime_in(0, h, |p| {
        pi_h += 1;
        if p > z {
            neumaier(&mut acc, tail_term(p as f64, a));
        }
    });
    Ok(acc.0 + acc.1 + remainder_bound(h, pi_h, a)?)
}

/// Smallest Z with tail_bound(Z, theta) < eps / 2.
pub fn choose_z(theta: f64, eps: f64) -> Result<u64> {
    let a = tail_exponent(theta)?;
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    let target = eps / 2.0;
    let z_min = min_admissible_z(theta)?;
    // Blocks of Z sharing the same horizon H: Z <= H/4, with Z > H/8 beyond the first block.
    for m in 24u32..=32 {
        let h = 1u64 << m;
        let lo = if m == 24 { z_min } else { (h / 8).max(z_min) };
        let hi = h / 4;
        if lo > hi {
            continue;
        }
        let mut pi_h = 0u64;
        let mut total = (0.0, 0.0);
        crate::special::primes::for_each_prime_in(0, h, |p| {
            pi_h += 1;
            if p > lo {
                neumaier(&mut total, tail_term(p as f64, a));
            }
        });
        let rem = remainder_bound(h, pi_h, a)?;
        let mut sum = total.0 + total.1;
        if sum + rem < target {
            return Ok(lo);
        }
        let mut found = None;
        crate::special::primes::for_each_prime_in(lo, hi, |p| {
            if found.is_none() {
                sum -= tail_term(p as f64, a);
                if sum + rem < target {
                    found = Some(p);
                }
            }
        });
        if let Some(p) = found {
            return Ok(p);
        }
    }
    Err(Error::Budget { what: format!("choose_z: eps = {eps} needs Z beyond 2^30") })
}

/// g_Z(s) = log f(s) + sum_{p <= Z} log(1 + p^{-2s}).
pub fn g_z(target: &TargetSpec, z: u64, s: Complex64) -> Complex64 {
    target.log_target(s)
        + primes_up_to(z).into_iter().map(|p| euler_factor_log(0.0, p, s)).sum::<Complex64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_sweeps: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { restarts: 8, seed: 0, max_sweeps: 400 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub omega: OmegaAssignment,
    /// fit_objective re-evaluated from scratch at `omega`.
    pub achieved_error: f64,
    /// achieved_error < eps.
    pub converged: bool,
    /// The winning descent stopped on its step-size criterion rather than the sweep budget.
    pub optimizer_converged: bool,
    /// Best objective reached by each restart.
    pub restart_objectives: Vec<f64>,
    /// Objective after each sweep of the winning restart (non-increasing).
    pub history: Vec<f64>,
}

/// Per-grid-point data for coordinate descent: x_{p,k} = p^{-s_k}.
struct Problem {
    primes: Vec<u64>,
    x: Vec<Vec<Complex64>>,
    log_f: Vec<Complex64>,
}

impl Problem {
    fn new(target: &TargetSpec, k: &DiscK, y: u64) -> Self {
        let pts = k.boundary();
        let primes = primes_up_to(y);
        let x = primes
            .iter()
            .map(|&p| pts.iter().map(|&s| (-s * (p as f64).ln()).exp()).collect())
            .collect();
        let log_f = pts.iter().map(|&s| target.log_target(s)).collect();
        Self { primes, x, log_f }
    }

    /// log(1 - w x + x^2); equal to the sum of principal Satake logs since |x| < 2^{-1/2}.
    fn factor(w: f64, x: Complex64) -> Complex64 {
        (1.0 - x * w + x * x).ln()
    }

    fn residuals(&self, omega: &[f64]) -> Vec<Complex64> {
        let mut r = self.log_f.clone();
        for (j, &w) in omega.iter().enumerate() {
            for (rk, &xk) in r.iter_mut().zip(&self.x[j]) {
                *rk += Self::factor(w, xk);
            }
        }
        r
    }

    fn sup(r: &[Complex64]) -> f64 {
        r.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Projected cyclic coordinate descent with golden-section line searches on shrinking brackets.
    fn descend(&self, start: Vec<f64>, max_sweeps: usize) -> (Vec<f64>, f64, bool, Vec<f64>) {
        let mut omega = start;
        let mut res = self.residuals(&omega);
        let mut best = Self::sup(&res);
        let mut history = vec![best];
        let mut radius = 1.0f64;
        let mut converged = false;
        let mut scratch = vec![Complex64::new(0.0, 0.0); res.len()];
        for _ in 0..max_sweeps {
            let before = best;
            for j in 0..self.primes.len() {
                let xs = &self.x[j];
                let old = omega[j];
                for ((s, &r), &x) in scratch.iter_mut().zip(&res).zip(xs) {
                    *s = r - Self::factor(old, x);
                }
                let eval = |w: f64| -> f64 {
                    scratch.iter().zip(xs).map(|(&b, &x)| (b + Self::factor(w, x)).norm()).fold(0.0, f64::max)
                };
                let (w, v) = golden(eval, (old - radius).max(-2.0), (old + radius).min(2.0), 40);
                if v < best {
                    omega[j] = w;
                    for ((r, &b), &x) in res.iter_mut().zip(&scratch).zip(xs) {
                        *r = b + Self::factor(w, x);
                    }
                    best = Self::sup(&res);
                }
            }
            history.push(best);
            if before - best <= 1e-9 * before.max(1e-300) {
                radius *= 0.25;
                if radius < 1e-7 {
                    converged = true;
                    break;
                }
            }
        }
        (omega, best, converged, history)
    }
}

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    const G: f64 = 0.618_033_988_749_894_9;
    let mut c = b - G * (b - a);
    let mut d = a + G * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let (fa, fb) = (f(a), f(b));
    let mut best = if fa < fb { (a, fa) } else { (b, fb) };
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - G * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + G * (b - a);
            fd = f(d);
        }
    }
    for cand in [(c, fc), (d, fd)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    best
}

fn assemble(
    p: &Problem,
    target: &TargetSpec,
    k: &DiscK,
    eps: f64,
    y: u64,
    runs: Vec<(Vec<f64>, f64, bool, Vec<f64>)>,
) -> Result<FitResult> {
    let restart_objectives: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let best = runs
        .into_iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.0.cmp(&b.0)))
        .map(|(_, r)| r)
        .ok_or_else(|| Error::invalid("at least one restart is required"))?;
    let omega = OmegaAssignment::new(y, p.primes.iter().copied().zip(best.0).collect())?;
    let achieved_error = fit_objective(target, &omega, k);
    Ok(FitResult {
        omega,
        achieved_error,
        converged: achieved_error < eps,
        optimizer_converged: best.2,
        restart_objectives,
        history: best.3,
    })
}

/// Direct minimization of fit_objective over [-2, 2]^{pi(Y)}: restart 0 starts at omega = 0,
/// the others at uniform random points drawn from stream (seed, restart).
pub fn fit_omegas(target: &TargetSpec, k: &DiscK, eps: f64, y: u64, opts: &FitOptions) -> Result<FitResult> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    if y < 2 {
        return Err(Error::invalid(format!("Y must be at least 2, got {y}")));
    }
    if opts.restarts == 0 {
        return Err(Error::invalid("at least one restart is required"));
    }
    let p = Problem::new(target, k, y);
    let n = p.primes.len();
    let runs: Vec<_> = (0..opts.restarts)
        .into_par_iter()
        .map(|i| {
            let start = if i == 0 {
                vec![0.0; n]
            } else {
                let mut g = rng::stream(opts.seed, i as u64);
                (0..n).map(|_| 4.0 * rng::uniform(&mut g) - 2.0).collect()
            };
            p.descend(start, opts.max_sweeps)
        })
        .collect();
    assemble(&p, target, k, eps, y, runs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredFit {
    /// Z used for the split (omega_p = 0 for p <= Z at initialization).
    pub z: u64,
    /// sup over the grid of |g_Z(s) - sum_{Z < p <= Y} omega_p p^{-s}| at the linear solution.
    pub linear_residual: f64,
    pub tail_bound: f64,
    /// fit_objective at the linear solution, before polishing.
    pub initial_objective: f64,
    pub initial_omega: OmegaAssignment,
    pub fit: FitResult,
}

/// Split at Z, fit sum_{Z < p <= Y} omega_p p^{-s} to g_Z by box-constrained least squares,
/// then polish all coordinates by coordinate descent.
pub fn fit_omegas_structured(
    target: &TargetSpec,
    k: &DiscK,
    eps: f64,
    y: u64,
    z: u64,
    opts: &FitOptions,
) -> Result<StructuredFit> {
    let theta = k.theta();
    let z_min = min_admissible_z(theta)?;
    if z < z_min || z >= y {
        return Err(Error::invalid(format!("split Z = {z} must satisfy {z_min} <= Z < Y = {y}")));
    }
    let pts = k.boundary();
    let free: Vec<u64> = primes_up_to(y).into_iter().filter(|&p| p > z).collect();
    let g: Vec<Complex64> = pts.iter().map(|&s| g_z(target, z, s)).collect();
    // Real least-squares system: rows (Re, Im) per grid point, columns p^{-s}.
    let cols: Vec<Vec<f64>> = free
        .iter()
        .map(|&p| {
            pts.iter()
                .flat_map(|&s| {
                    let v = (-s * (p as f64).ln()).exp();
                    [v.re, v.im]
                })
                .collect()
        })
        .collect();
    let rhs: Vec<f64> = g.iter().flat_map(|v| [v.re, v.im]).collect();
    let w = box_least_squares(&cols, &rhs, 2.0, 5000);
    let linear_residual = pts
        .iter()
        .zip(&g)
        .map(|(&s, &gv)| {
            let model: Complex64 =
                free.iter().zip(&w).map(|(&p, &wp)| (-s * (p as f64).ln()).exp() * wp).sum();
            (gv - model).norm()
        })
        .fold(0.0, f64::max);
    let values: Vec<(u64, f64)> = primes_up_to(y)
        .into_iter()
        .map(|p| (p, free.iter().position(|&q| q == p).map_or(0.0, |i| w[i])))
        .collect();
    let initial_omega = OmegaAssignment::new(y, values)?;
    let initial_objective = fit_objective(target, &initial_omega, k);
    let tail = tail_bound(z, theta)?;
    let p = Problem::new(target, k, y);
    let start: Vec<f64> = initial_omega.values.iter().map(|&(_, v)| v).collect();
    let run = p.descend(start, opts.max_sweeps);
    let fit = assemble(&p, target, k, eps, y, vec![run])?;
    Ok(StructuredFit { z, linear_residual, tail_bound: tail, initial_objective, initial_omega, fit })
}

/// min ||A w - b||_2 over |w_i| <= bound by accelerated projected gradient (FISTA).
fn box_least_squares(cols: &[Vec<f64>], b: &[f64], bound: f64, iters: usize) -> Vec<f64> {
    let n = cols.len();
    if n == 0 {
        return Vec::new();
    }
    let apply = |w: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; b.len()];
        for (c, &wi) in cols.iter().zip(w) {
            for (o, &ci) in out.iter_mut().zip(c) {
                *o += ci * wi;
            }
        }
        out
    };
    let apply_t = |r: &[f64]| -> Vec<f64> { cols.iter().map(|c| c.iter().zip(r).map(|(a, b)| a * b).sum()).collect() };
    // Lipschitz constant of the gradient by power iteration on A^T A.
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lip = 1.0;
    for _ in 0..100 {
        let av = apply_t(&apply(&v));
        lip = av.iter().map(|x| x * x).sum::<f64>().sqrt();
        if lip == 0.0 {
            return vec![0.0; n];
        }
        v = av.iter().map(|x| x / lip).collect();
    }
    let step = 1.0 / (1.01 * lip);
    let mut w = vec![0.0; n];
    let mut z = w.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let r: Vec<f64> = apply(&z).iter().zip(b).map(|(a, b)| a - b).collect();
        let grad = apply_t(&r);
        let next: Vec<f64> = z.iter().zip(&grad).map(|(zi, gi)| (zi - step * gi).clamp(-bound, bound)).collect();
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = next.iter().zip(&w).map(|(a, b)| a + (t - 1.0) / t_next * (a - b)).collect();
        w = next;
        t = t_next;
    }
    w
}
