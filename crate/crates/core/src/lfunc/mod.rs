//! Evaluation of L(s, u) for Hecke-Maass forms: Euler-product side and approximate
//! functional equation.

pub mod afe;
pub mod euler;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use afe::{
    choose_n, evaluate_l, functional_equation_residual, gamma_factor, tail_kernel_w, AfeEvaluator,
    AfeParams, KernelValue, WKernel,
};
pub use euler::{
    dirichlet_sum, log_inverse_partial, partial_euler_inverse, partial_euler_inverse_coeffs,
    DirichletPolynomial,
};

/// Closed disc K = {|s - 3/4| <= r}, 0 < r < 1/4, sampled on its boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscK {
    pub radius: f64,
    pub grid: usize,
}

impl DiscK {
    pub const CENTER: f64 = 0.75;

    pub fn new(radius: f64, grid: usize) -> Result<Self> {
        if !(radius > 0.0 && radius < 0.25) {
            return Err(Error::invalid(format!("disc radius must lie in (0, 1/4), got {radius}")));
        }
        if grid == 0 {
            return Err(Error::invalid("disc grid needs at least one point"));
        }
        Ok(Self { radius, grid })
    }

    /// theta = 1/4 - r; K sits in Re s >= 1/2 + theta.
    pub fn theta(&self) -> f64 {
        0.25 - self.radius
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(Self::CENTER, 0.0)
    }

    /// s_k = 3/4 + r exp(2 pi i k / M).
    pub fn boundary(&self) -> Vec<Complex64> {
        (0..self.grid)
            .map(|k| self.center() + Complex64::from_polar(self.radius, 2.0 * PI * k as f64 / self.grid as f64))
            .collect()
    }

    pub fn contains(&self, s: Complex64) -> bool {
        (s - self.center()).norm() <= self.radius * (1.0 + 1e-12)
    }
}

/// max over the boundary grid of |f(s)|.
pub fn sup_on_boundary(k: &DiscK, f: impl Fn(Complex64) -> Result<f64>) -> Result<f64> {
    k.boundary().into_iter().try_fold(0.0f64, |m, s| Ok(m.max(f(s)?)))
}
