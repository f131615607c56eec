//! Synthetic ensembles, box events, approximation chains and universality proportions.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{model_log_sum, OmegaAssignment, TargetSpec};
use crate::hecke::{MaassFormData, Parity, Source};
use crate::lfunc::afe::{AfeEvaluator, AfeParams};
use crate::lfunc::euler::{log_inverse_partial, partial_euler_inverse};
use crate::lfunc::DiscK;
use crate::rng;
use crate::sarnak::{BoxFamily, SarnakMeasure};
use crate::special::primes::primes_up_to;

/// z with P(|N(0,1)| <= z) = 0.99.
pub const Z_99: f64 = 2.575_829_303_548_901;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleMode {
    Unconditional,
    /// lambda(p) for boxed primes drawn from mu_p restricted to the box.
    Conditioned { boxes: BoxFamily },
}

/// Weyl-law ensemble: J = round(c R^2) forms, r_j = R sqrt((j - 1/2)/J), lambda(p) ~ mu_p independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub r_max: f64,
    pub weyl_constant: f64,
    pub p_cap: u64,
    pub seed: u64,
    pub mode: EnsembleMode,
}

impl EnsembleSpec {
    pub fn new(r_max: f64, p_cap: u64, seed: u64, mode: EnsembleMode) -> Self {
        Self { r_max, weyl_constant: 1.0 / 12.0, p_cap, seed, mode }
    }

    pub fn size(&self) -> usize {
        (self.weyl_constant * self.r_max * self.r_max).round() as usize
    }
}

/// Generate the ensemble; form j (1-based) uses random stream (seed, j) only.
pub fn generate_ensemble(spec: &EnsembleSpec) -> Result<Vec<MaassFormData>> {
    if !(spec.r_max > 0.0 && spec.weyl_constant > 0.0) {
        return Err(Error::invalid("ensemble needs R_max > 0 and a positive Weyl constant"));
    }
    let j_total = spec.size();
    let primes = primes_up_to(spec.p_cap);
    let measures: Vec<SarnakMeasure> =
        primes.par_iter().map(|&p| SarnakMeasure::new(p)).collect::<Result<_>>()?;
    let boxes: HashMap<u64, (f64, f64)> = match &spec.mode {
        EnsembleMode::Unconditional => HashMap::new(),
        EnsembleMode::Conditioned { boxes } => {
            if let Some(b) = boxes.boxes.iter().find(|b| b.p > spec.p_cap) {
                return Err(Error::invalid(format!("box prime {} exceeds p_cap {}", b.p, spec.p_cap)));
            }
            boxes.boxes.iter().map(|b| (b.p, (b.lo, b.hi))).collect()
        }
    };
    (1..=j_total)
        .into_par_iter()
        .map(|j| {
            let mut g = rng::stream(spec.seed, j as u64);
            let parity = if rng::uniform(&mut g) < 0.5 { Parity::Even } else { Parity::Odd };
            let pairs = primes
                .iter()
                .zip(&measures)
                .map(|(&p, m)| {
                    let v = match boxes.get(&p) {
                        Some(&(lo, hi)) => m.sample_in(lo, hi, &mut g),
                        None => m.sample(&mut g),
                    };
                    (p, v)
                })
                .collect();
            let r = spec.r_max * ((j as f64 - 0.5) / j_total as f64).sqrt();
            let mut form =
                MaassFormData::new(format!("synthetic-{}-{j}", spec.seed), r, parity, pairs, Source::Synthetic)?;
            form.norm_alpha = Some(1.0);
            Ok(form)
        })
        .collect()
}

/// Fraction with its 99% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub hits: usize,
    pub total: usize,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Proportion {
    pub fn new(hits: usize, total: usize) -> Self {
        let (lo, hi) = wilson_interval(hits, total, Z_99);
        let fraction = if total == 0 { 0.0 } else { hits as f64 / total as f64 };
        Self { hits, total, fraction, ci_low: lo, ci_high: hi }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

pub fn wilson_interval(hits: usize, total: usize, z: f64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// u in B_R: lambda(p) in Omega_p for every boxed prime.
pub fn membership_br(form: &MaassFormData, boxes: &BoxFamily) -> Result<bool> {
    for b in &boxes.boxes {
        let v = form.lambda_p(b.p)?;
        if v < b.lo || v > b.hi {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn proportion_in_br(forms: &[MaassFormData], boxes: &BoxFamily) -> Result<Proportion> {
    let hits = forms.iter().try_fold(0usize, |n, f| Ok::<_, Error>(n + usize::from(membership_br(f, boxes)?)))?;
    Ok(Proportion::new(hits, forms.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedBound {
    /// prod_p mu_p(Omega_p).
    pub product: f64,
    /// product / 4, the lower bound for the limiting proportion.
    pub floor: f64,
}

pub fn predicted_lower_bound(boxes: &BoxFamily) -> Result<PredictedBound> {
    let product = boxes.product_mass()?;
    Ok(PredictedBound { product, floor: product / 4.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxDistance {
    /// sup_K |log L_Y(s, u) - sum_{p <= Y} log(1 - omega_p p^{-s} + p^{-2s})|.
    pub observed: f64,
    /// 3 delta sum_{p <= Y} p^{-(1/2 + theta)}.
    pub bound: f64,
}

pub fn box_distance_bound(
    form: &MaassFormData,
    omega: &OmegaAssignment,
    boxes: &BoxFamily,
    k: &DiscK,
) -> Result<BoxDistance> {
    if !membership_br(form, boxes)? {
        return Err(Error::validation(&form.label, "form is outside the box event B_R"));
    }
    let y = omega.y;
    let omega = omega.restrict(y);
    let observed = k
        .boundary()
        .into_iter()
        .map(|s| Ok((log_inverse_partial(form, y, s)? - model_log_sum(&omega, s)).norm()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let a = 0.5 + k.theta();
    let bound = 3.0 * boxes.delta * primes_up_to(y).iter().map(|&p| (p as f64).powf(-a)).sum::<f64>();
    Ok(BoxDistance { observed, bound })
}

/// How L(s, u) is obtained on K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LMode {
    /// L evaluated by the approximate functional equation.
    Genuine { params: AfeParams },
    /// L replaced by 1 / L_X(s, u).
    Model,
}

/// Six sup-norm distances on the boundary grid of K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    /// sup |L L_X - 1| (genuine mode only).
    pub d_approx: Option<f64>,
    /// sup |log L_X - log L_Y|.
    pub d_tails: f64,
    /// sup |log L_Y - sum_{p <= Y} log(1 - omega_p p^{-s} + p^{-2s})|.
    pub d_box: f64,
    /// sup |log f + sum_{p <= Y} log(1 - omega_p p^{-s} + p^{-2s})|.
    pub d_target: f64,
    /// sup |log L - log f|, with log L = -log L_X + Log(L L_X).
    pub d_log_total: f64,
    /// sup |L - f|.
    pub d_total: f64,
    /// sup |Log(L L_X)| + d_tails + d_box + d_target.
    pub link_sum: f64,
    /// d_log_total <= link_sum.
    pub triangle_holds: bool,
    /// d_total <= (exp(d_log_total) - 1) sup |f|.
    pub consistent: bool,
}

pub fn chain_report(
    form: &MaassFormData,
    target: &TargetSpec,
    omega: &OmegaAssignment,
    k: &DiscK,
    x: u64,
    mode: &LMode,
) -> Result<ChainReport> {
    let y = omega.y;
    if x < y {
        return Err(Error::invalid(format!("chain needs X >= Y, got X = {x}, Y = {y}")));
    }
    let pts = k.boundary();
    let l_values: Option<Vec<Complex64>> = match mode {
        LMode::Genuine { params } => Some(AfeEvaluator::new(form, *params)?.evaluate_many(&pts)?),
        LMode::Model => None,
    };
    let mut d_approx = 0.0f64;
    let mut approx_log = 0.0f64;
    let (mut d_tails, mut d_box, mut d_target) = (0.0f64, 0.0f64, 0.0f64);
    let (mut d_log_total, mut d_total, mut f_max) = (0.0f64, 0.0f64, 0.0f64);
    for (i, &s) in pts.iter().enumerate() {
        let log_lx = log_inverse_partial(form, x, s)?;
        let log_ly = log_inverse_partial(form, y, s)?;
        let model = model_log_sum(omega, s);
        let log_f = target.log_target(s);
        let (l, log_l) = match &l_values {
            Some(vals) => {
                let l = vals[i];
                let prod = l * partial_euler_inverse(form, x, s)?;
                d_approx = d_approx.max((prod - 1.0).norm());
                let branch = prod.ln();
                approx_log = approx_log.max(branch.norm());
                (l, -log_lx + branch)
            }
            None => ((-log_lx).exp(), -log_lx),
        };
        d_tails = d_tails.max((log_lx - log_ly).norm());
        d_box = d_box.max((log_ly - model).norm());
        d_target = d_target.max((model + log_f).norm());
        d_log_total = d_log_total.max((log_l - log_f).norm());
        let f = log_f.exp();
        d_total = d_total.max((l - f).norm());
        f_max = f_max.max(f.norm());
    }
    let link_sum = approx_log + d_tails + d_box + d_target;
    let slack = 1e-12;
    Ok(ChainReport {
        d_approx: l_values.as_ref().map(|_| d_approx),
        d_tails,
        d_box,
        d_target,
        d_log_total,
        d_total,
        link_sum,
        triangle_holds: d_log_total <= link_sum + slack,
        consistent: d_total <= (d_log_total.exp() - 1.0) * f_max + slack,
    })
}

/// sup_K |L - f| for one form.
pub fn sup_distance(form: &MaassFormData, target: &TargetSpec, k: &DiscK, x: u64, mode: &LMode) -> Result<f64> {
    let pts = k.boundary();
    let values: Vec<Complex64> = match mode {
        LMode::Genuine { params } => AfeEvaluator::new(form, *params)?.evaluate_many(&pts)?,
        LMode::Model => pts
            .iter()
            .map(|&s| Ok((-log_inverse_partial(form, x, s)?).exp()))
            .collect::<Result<_>>()?,
    };
    Ok(pts.iter().zip(values).map(|(&s, l)| (l - target.value(s)).norm()).fold(0.0, f64::max))
}

/// Fraction of forms with sup_K |L - f| < eps.
pub fn universality_proportion(
    forms: &[MaassFormData],
    target: &TargetSpec,
    k: &DiscK,
    eps: f64,
    x: u64,
    mode: &LMode,
) -> Result<Proportion> {
    let hits = forms
        .par_iter()
        .map(|f| sup_distance(f, target, k, x, mode).map(|d| d < eps))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&b| b)
        .count();
    Ok(Proportion::new(hits, forms.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylCheck {
    pub r: f64,
    pub count: usize,
    /// count / R^2.
    pub ratio: f64,
    /// ratio relative to 1/12, minus one.
    pub relative_error: f64,
}

/// #{j : r_j <= R} / R^2 against the Weyl constant 1/12.
pub fn weyl_check(forms: &[MaassFormData], r: f64) -> Result<WeylCheck> {
    if !(r > 0.0) {
        return Err(Error::invalid(format!("Weyl check needs R > 0, got {r}")));
    }
    let count = forms.iter().filter(|f| f.r <= r).count();
    let ratio = count as f64 / (r * r);
    Ok(WeylCheck { r, count, ratio, relative_error: ratio * 12.0 - 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(50, 100, Z_99);
        assert!(lo < 0.5 && hi > 0.5 && (0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        assert_eq!(wilson_interval(0, 0, Z_99), (0.0, 1.0));
        let (lo, _) = wilson_interval(0, 10, Z_99);
        assert_eq!(lo, 0.0);
    }

    #[test]
    fn ensemble_size_and_spacing() {
        let spec = EnsembleSpec::new(12.0, 7, 1, EnsembleMode::Unconditional);
        let e = generate_ensemble(&spec).unwrap();
        assert_eq!(e.len(), 12);
        assert!(e.windows(2).all(|w| w[0].r < w[1].r));
        assert!(e.iter().all(|f| f.primes() == [2, 3, 5, 7]));
    }
}
