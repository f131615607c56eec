//! Approximate functional equation
//!
//!   L(s) = sum_{n < 2N} lambda(n) n^{-s} phi(n/N) + (-1)^eps sum_{n >= 1} lambda(n) n^{s-1} W(nN, s),
//!   W(xi, s) = -(1 / 2 pi i) int_{(c)} gamma(1-s+w) / gamma(s-w) phi~(-w) xi^{-w} dw,
//!
//! with gamma(s) = pi^{-s} Gamma((s+eps+ir)/2) Gamma((s+eps-ir)/2). The integrand has poles only at
//! w = 0 and Re w = Re s - 1 - eps - 2k, so any c > max(0, Re s - 1 - eps) gives the same W.
//! The line integral is a trapezoid sum, spectrally accurate for this analytic integrand.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DiscK;
use crate::error::{Error, Result};
use crate::hecke::{hecke_eigenvalue_n, CoefficientTable, MaassFormData, Parity};
use crate::special::cutoff::{cutoff, mellin_cutoff};
use crate::special::gamma::log_gamma;
use crate::special::primes::divisor_count;

/// Width of one truncation panel on the contour.
const PANEL: f64 = 50.0;
/// Consecutive negligible dual terms required before the dual sum is cut.
const DUAL_RUN: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AfeParams {
    /// Main-sum length N.
    pub n_cutoff: u64,
    /// Contour abscissa is 1 + contour_eps.
    pub contour_eps: f64,
    /// Trapezoid spacing on the contour.
    pub step: f64,
    /// Hard cap on the contour truncation |Im w| <= T.
    pub t_max: f64,
    /// Truncation stops once a panel contributes less than this (two panels in a row).
    pub panel_tol: f64,
    /// Dual terms below this bound are negligible.
    pub dual_tol: f64,
    /// Hard cap on the number of dual terms.
    pub dual_terms_max: u64,
}

impl AfeParams {
    pub fn new(n_cutoff: u64) -> Self {
        Self {
            n_cutoff,
            contour_eps: 0.5,
            step: 0.1,
            t_max: 4000.0,
            panel_tol: 1e-12,
            dual_tol: 1e-12,
            dual_terms_max: 4096,
        }
    }

    pub fn abscissa(&self) -> f64 {
        1.0 + self.contour_eps
    }

    fn validate(&self) -> Result<()> {
        if self.n_cutoff == 0 {
            return Err(Error::invalid("N must be at least 1"));
        }
        if !(self.contour_eps > 0.0) || !(self.step > 0.0 && self.step <= 0.5) || !(self.t_max > PANEL) {
            return Err(Error::invalid(format!("inconsistent AFE parameters {self:?}")));
        }
        if self.dual_terms_max == 0 {
            return Err(Error::invalid("dual_terms_max must be at least 1"));
        }
        Ok(())
    }
}

/// log gamma(s) = -s log pi + log Gamma((s+eps+ir)/2) + log Gamma((s+eps-ir)/2).
pub fn log_gamma_factor(r: f64, parity: Parity, s: Complex64) -> Result<Complex64> {
    let e = f64::from(parity.epsilon());
    let a = (s + e + Complex64::new(0.0, r)) * 0.5;
    let b = (s + e - Complex64::new(0.0, r)) * 0.5;
    Ok(-s * PI.ln() + log_gamma(a)? + log_gamma(b)?)
}

pub fn gamma_factor(form: &MaassFormData, s: Complex64) -> Result<Complex64> {
    Ok(log_gamma_factor(form.r, form.parity, s)?.exp())
}

/// phi~(-(c + i t_k)), t_k = k h, k >= 0, grown on demand and shared between threads.
struct MellinTable {
    c: f64,
    h: f64,
    values: RwLock<Arc<Vec<Complex64>>>,
}

impl MellinTable {
    fn snapshot(&self, len: usize) -> Result<Arc<Vec<Complex64>>> {
        let current = self.values.read().expect("mellin table lock").clone();
        if current.len() >= len {
            return Ok(current);
        }
        // Computed outside any lock: rayon may run other kernels on this thread meanwhile.
        let start = current.len();
        let fresh: Vec<Complex64> = (start..len)
            .into_par_iter()
            .map(|k| mellin_cutoff(-Complex64::new(self.c, k as f64 * self.h)))
            .collect::<Result<_>>()?;
        let mut guard = self.values.write().expect("mellin table lock");
        // The table only grows, so guard.len() >= start.
        if guard.len() < len {
            let mut v = Vec::with_capacity(len);
            v.extend_from_slice(&guard);
            v.extend_from_slice(&fresh[guard.len() - start..]);
            *guard = Arc::new(v);
        }
        Ok(guard.clone())
    }
}

fn mellin_table(c: f64, h: f64) -> Arc<MellinTable> {
    static TABLES: OnceLock<Mutex<HashMap<(u64, u64), Arc<MellinTable>>>> = OnceLock::new();
    let map = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = map.lock().expect("mellin registry lock");
    map.entry((c.to_bits(), h.to_bits()))
        .or_insert_with(|| Arc::new(MellinTable { c, h, values: RwLock::new(Arc::new(Vec::new())) }))
        .clone()
}

/// Discretized W(., s): W(xi) = -xi^{-c} sum_k a_k exp(-i t_k log xi).
#[derive(Debug, Clone)]
pub struct WKernel {
    c: f64,
    t: Vec<f64>,
    a: Vec<Complex64>,
    truncation: f64,
    /// sum |a_k| over the outermost panel.
    last_panel: f64,
}

impl WKernel {
    /// Truncate adaptively: stop after two consecutive panels whose contribution at xi >= xi_min
    /// is below `params.panel_tol`.
    pub fn new(r: f64, parity: Parity, s: Complex64, params: &AfeParams, xi_min: f64) -> Result<Self> {
        Self::build(r, parity, s, params, Some(xi_min), params.t_max)
    }

    /// Fixed truncation |t| <= t_trunc, no adaptivity.
    pub fn with_truncation(r: f64, parity: Parity, s: Complex64, params: &AfeParams, t_trunc: f64) -> Result<Self> {
        Self::build(r, parity, s, params, None, t_trunc)
    }

    fn build(
        r: f64,
        parity: Parity,
        s: Complex64,
        params: &AfeParams,
        xi_min: Option<f64>,
        t_limit: f64,
    ) -> Result<Self> {
        params.validate()?;
        let c = params.abscissa();
        let e = f64::from(parity.epsilon());
        let pole = s.re - 1.0 - e;
        if c <= pole.max(0.0) {
            return Err(Error::ContourPole { c, pole: pole.max(0.0) });
        }
        let h = params.step;
        let per_panel = (PANEL / h).round() as usize;
        let table = mellin_table(c, h);
        let g = |w: Complex64| -> Result<Complex64> {
            let num = log_gamma_factor(r, parity, 1.0 - s + w)?;
            match log_gamma_factor(r, parity, s - w) {
                Ok(den) => Ok((num - den).exp()),
                // 1/Gamma vanishes at its poles.
                Err(Error::GammaPole { .. }) => Ok(Complex64::new(0.0, 0.0)),
                Err(e) => Err(e),
            }
        };
        let scale = h / (2.0 * PI);
        let mut t = Vec::new();
        let mut a = Vec::new();
        let mut quiet = 0;
        let mut panel = 0usize;
        let mut last_panel = 0.0;
        loop {
            let k0 = panel * per_panel;
            let k1 = k0 + per_panel;
            let tk1 = k1 as f64 * h;
            if xi_min.is_none() && k0 as f64 * h > t_limit {
                break;
            }
            if xi_min.is_some() && tk1 > t_limit + 1e-9 {
                return Err(Error::Quadrature { tol: params.panel_tol, panels: panel, estimate: f64::NAN });
            }
            let phis = table.snapshot(k1)?;
            let nodes: Vec<(f64, Complex64)> = (k0..k1)
                .filter(|&k| xi_min.is_some() || k as f64 * h <= t_limit + 1e-9)
                .flat_map(|k| {
                    let tk = k as f64 * h;
                    let phi = phis[k];
                    let up = (tk, phi);
                    let down = (-tk, phi.conj());
                    if k == 0 {
                        vec![up]
                    } else {
                        vec![up, down]
                    }
                })
                .collect();
            let weights: Vec<Complex64> = nodes
                .par_iter()
                .map(|&(tk, phi)| Ok(g(Complex64::new(c, tk))? * phi * scale))
                .collect::<Result<_>>()?;
            let mass: f64 = weights.iter().map(|w| w.norm()).sum();
            last_panel = mass;
            for ((tk, _), w) in nodes.into_iter().zip(weights) {
                t.push(tk);
                a.push(w);
            }
            panel += 1;
            if let Some(xi) = xi_min {
                if mass * xi.powf(-c) < params.panel_tol {
                    quiet += 1;
                    if quiet >= 2 {
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
        }
        let truncation = t.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        Ok(Self { c, t, a, truncation, last_panel })
    }

    pub fn abscissa(&self) -> f64 {
        self.c
    }

    /// Contour truncation T actually used.
    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    /// Size of the outermost panel's contribution at xi, a proxy for the truncation error.
    pub fn truncation_error(&self, xi: f64) -> f64 {
        self.last_panel * xi.powf(-self.c)
    }

    pub fn eval(&self, xi: f64) -> Complex64 {
        let l = xi.ln();
        let mut acc = Complex64::new(0.0, 0.0);
        for (&tk, &ak) in self.t.iter().zip(&self.a) {
            let (sn, cs) = (tk * l).sin_cos();
            acc += ak * Complex64::new(cs, -sn);
        }
        -acc * (-self.c * l).exp()
    }
}

/// W(xi, s) with the contour truncation used and its estimated error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: Complex64,
    pub truncation: f64,
    pub truncation_error: f64,
}

/// W(xi, s) for one point.
pub fn tail_kernel_w(form: &MaassFormData, xi: f64, s: Complex64, params: &AfeParams) -> Result<KernelValue> {
    if !(xi > 0.0) {
        return Err(Error::invalid(format!("xi must be positive, got {xi}")));
    }
    let k = WKernel::new(form.r, form.parity, s, params, xi)?;
    Ok(KernelValue { value: k.eval(xi), truncation: k.truncation(), truncation_error: k.truncation_error(xi) })
}

/// One AFE evaluation with its parts.
#[derive(Debug, Clone, Copy)]
pub struct AfeValue {
    pub value: Complex64,
    pub main: Complex64,
    pub dual: Complex64,
    pub dual_terms: u64,
    pub truncation: f64,
}

/// AFE evaluator holding the coefficient table and cutoff weights for one (form, N).
pub struct AfeEvaluator<'a> {
    form: &'a MaassFormData,
    params: AfeParams,
    table: CoefficientTable,
    weights: Vec<f64>,
}

impl<'a> AfeEvaluator<'a> {
    pub fn new(form: &'a MaassFormData, params: AfeParams) -> Result<Self> {
        params.validate()?;
        let n = params.n_cutoff;
        let table = CoefficientTable::build(form, 2 * n)?;
        let weights = (1..2 * n).map(|k| cutoff(k as f64 / n as f64)).collect();
        Ok(Self { form, params, table, weights })
    }

    pub fn params(&self) -> &AfeParams {
        &self.params
    }

    fn lambda(&self, n: u64) -> Result<f64> {
        if n <= self.table.len() {
            Ok(self.table.get(n))
        } else {
            hecke_eigenvalue_n(self.form, n)
        }
    }

    pub fn main_sum(&self, s: Complex64) -> Complex64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let n = (i + 1) as u64;
                (-s * (n as f64).ln()).exp() * (w * self.table.get(n))
            })
            .sum()
    }

    /// Dual sum using lambda(n) (or, with `envelope`, the bound d(n) sqrt(n) on |lambda(n)|).
    fn dual_sum(&self, kernel: &WKernel, s: Complex64, envelope: bool) -> Result<(Complex64, u64)> {
        let nn = self.params.n_cutoff as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut quiet = 0;
        for n in 1..=self.params.dual_terms_max {
            let w = kernel.eval(n as f64 * nn);
            let nf = n as f64;
            let bound = divisor_count(n) as f64 * nf.sqrt();
            let pow = ((s - 1.0) * nf.ln()).exp();
            let size = bound * pow.norm() * w.norm();
            if envelope {
                acc += size;
            } else if size > 0.0 {
                acc += pow * w * self.lambda(n)?;
            }
            if size < self.params.dual_tol {
                quiet += 1;
                if quiet >= DUAL_RUN {
                    return Ok((acc, n));
                }
            } else {
                quiet = 0;
            }
        }
        Err(Error::Budget { what: format!("dual sum not negligible after {} terms", self.params.dual_terms_max) })
    }

    fn kernel(&self, s: Complex64) -> Result<WKernel> {
        WKernel::new(self.form.r, self.form.parity, s, &self.params, self.params.n_cutoff as f64)
    }

    pub fn evaluate(&self, s: Complex64) -> Result<AfeValue> {
        let kernel = self.kernel(s)?;
        let main = self.main_sum(s);
        let (dual, dual_terms) = self.dual_sum(&kernel, s, false)?;
        let dual = dual * self.form.parity.sign();
        Ok(AfeValue { value: main + dual, main, dual, dual_terms, truncation: kernel.truncation() })
    }

    /// Upper bound for |dual sum| from the coefficient envelope |lambda(n)| <= d(n) sqrt(n).
    pub fn dual_envelope(&self, s: Complex64) -> Result<f64> {
        let kernel = self.kernel(s)?;
        Ok(self.dual_sum(&kernel, s, true)?.0.re)
    }

    pub fn evaluate_many(&self, points: &[Complex64]) -> Result<Vec<Complex64>> {
        points.par_iter().map(|&s| Ok(self.evaluate(s)?.value)).collect()
    }
}

/// L(s) by the approximate functional equation.
pub fn evaluate_l(form: &MaassFormData, s: Complex64, params: &AfeParams) -> Result<Complex64> {
    Ok(AfeEvaluator::new(form, *params)?.evaluate(s)?.value)
}

/// |gamma(s) L(s) - (-1)^eps gamma(1-s) L(1-s)| / (|gamma(s) L(s)| + |gamma(1-s) L(1-s)|).
pub fn functional_equation_residual(form: &MaassFormData, s: Complex64, params: &AfeParams) -> Result<f64> {
    let ev = AfeEvaluator::new(form, *params)?;
    let lhs = gamma_factor(form, s)? * ev.evaluate(s)?.value;
    let rhs = gamma_factor(form, 1.0 - s)? * ev.evaluate(1.0 - s)?.value * form.parity.sign();
    let denom = lhs.norm() + rhs.norm();
    Ok(if denom == 0.0 { 0.0 } else { (lhs - rhs).norm() / denom })
}

/// Smallest N in the ladder ceil(safety * r^{2 - theta}) * 2^k whose dual-sum envelope is below
/// `error_target` on every boundary point of K.
pub fn choose_n(form: &MaassFormData, k: &DiscK, error_target: f64) -> Result<u64> {
    choose_n_with(form, k, error_target, 1.0)
}

pub fn choose_n_with(form: &MaassFormData, k: &DiscK, error_target: f64, safety: f64) -> Result<u64> {
    if !(error_target > 0.0) || !(safety >= 1.0) {
        return Err(Error::invalid("choose_n needs error_target > 0 and safety >= 1"));
    }
    let base = (safety * form.r.powf(2.0 - k.theta())).ceil().max(1.0) as u64;
    let points = k.boundary();
    for step in 0..12 {
        let n = base << step;
        let ev = AfeEvaluator::new(form, AfeParams::new(n))?;
        let worst = points
            .par_iter()
            .map(|&s| ev.dual_envelope(s))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        if worst <= error_target {
            return Ok(n);
        }
    }
    Err(Error::Budget { what: format!("no N <= {} meets the target {error_target:e}", base << 11) })
}
