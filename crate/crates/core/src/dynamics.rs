//! Closed-form observables of the oscillator: the revival amplitude `A_p`,
//! the survival probability of the initial ground state, and the normalized
//! quadrature variances, each with its classical-source counterpart.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{frequency_branch, FrequencyBranch, SourceState, SpringParams, TimeGrid};

/// Real observable sampled on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealSeries {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub label: String,
}

impl RealSeries {
    pub fn new(grid: TimeGrid, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "series `{label}` has {} values for {} samples",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(label));
        }
        Ok(Self { grid, values, label })
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Complex observable sampled on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeries {
    pub grid: TimeGrid,
    pub values: Vec<Complex64>,
    pub label: String,
}

impl ComplexSeries {
    pub fn new(grid: TimeGrid, values: Vec<Complex64>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "series `{label}` has {} values for {} samples",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(label));
        }
        Ok(Self { grid, values, label })
    }

    pub fn map_real(&self, label: impl Into<String>, f: impl Fn(Complex64) -> f64) -> Result<RealSeries> {
        RealSeries::new(self.grid.clone(), self.values.iter().map(|v| f(*v)).collect(), label)
    }
}

/// `A_p(t) = β²/(η^{1/4} (1 − (β²−1)² e^{−2iω_p t})^{1/2})`.
///
/// The radicand `1 − z` has `|z| < 1`, so its real part is positive and the
/// principal square root is continuous in `t`.
pub fn amplitude_a(branch: &FrequencyBranch, t: f64) -> Complex64 {
    let z = Complex64::from_polar(branch.squeeze_ratio(), -2.0 * branch.omega_p * t);
    let radicand = Complex64::new(1.0, 0.0) - z;
    assert!(radicand.re > 0.0, "radicand left the right half-plane");
    branch.beta_sq / (branch.eta.powf(0.25) * radicand.sqrt())
}

/// `|A_p(t)|²` from its real form
/// `β⁴ / √(η (1 − 2(β²−1)² cos 2ω_p t + (β²−1)⁴))`.
pub fn amplitude_a_sq(branch: &FrequencyBranch, t: f64) -> f64 {
    let q = branch.squeeze_ratio();
    let c = (2.0 * branch.omega_p * t).cos();
    let b4 = branch.beta_sq * branch.beta_sq;
    b4 / (branch.eta * (1.0 - 2.0 * q * c + q * q)).sqrt()
}

/// Probability `P₀(t)` that the oscillator is still in its ground state,
/// averaged over the source photon distribution.
pub fn survival_probability(params: &SpringParams, source: &SourceState, t: f64) -> f64 {
    source
        .weights()
        .iter()
        .enumerate()
        .map(|(p, w)| w * amplitude_a_sq(&frequency_branch(params, p), t))
        .sum()
}

/// Survival probability when the modulation is a classical drive of strength
/// `nbar`. Periodic with period `π/ω_α`.
pub fn survival_classical(params: &SpringParams, nbar: f64, t: f64) -> f64 {
    amplitude_a_sq(&FrequencyBranch::at_occupation(params, nbar), t)
}

/// `sin²(ω_p t) μp/(1+μp)`, the fraction of x-variance lost in branch `p`.
fn x_deficit(params: &SpringParams, occupation: f64, t: f64) -> f64 {
    let b = FrequencyBranch::at_occupation(params, occupation);
    let s = (b.omega_p * t).sin();
    s * s * (params.mu() * occupation) / b.eta
}

/// `V_x(t) = Var x(t) / ⟨x²(0)⟩` for the oscillator starting in its ground
/// state.
pub fn variance_x(params: &SpringParams, source: &SourceState, t: f64) -> f64 {
    let deficit: f64 = source
        .weights()
        .iter()
        .enumerate()
        .map(|(n, w)| w * x_deficit(params, n as f64, t))
        .sum();
    1.0 - deficit
}

/// `V_p(t) = Var p(t) / ⟨p²(0)⟩`.
pub fn variance_p(params: &SpringParams, source: &SourceState, t: f64) -> f64 {
    let excess: f64 = source
        .weights()
        .iter()
        .enumerate()
        .map(|(n, w)| {
            let s = (params.omega() * t * (1.0 + params.mu() * n as f64).sqrt()).sin();
            w * s * s * params.mu() * n as f64
        })
        .sum();
    1.0 + excess
}

pub fn variance_x_classical(params: &SpringParams, nbar: f64, t: f64) -> f64 {
    1.0 - x_deficit(params, nbar, t)
}

/// `1 − μ n̄ / (1 + μ n̄)`, reached whenever `sin²(ω_α t) = 1`.
pub fn variance_x_classical_min(params: &SpringParams, nbar: f64) -> f64 {
    let s = params.mu() * nbar;
    1.0 - s / (1.0 + s)
}

/// Evaluate `f(t)` at every grid sample, honoring `ω t = s τ`.
pub fn sample_real<F>(grid: &TimeGrid, omega: f64, label: &str, f: F) -> Result<RealSeries>
where
    F: Fn(f64) -> f64 + Sync,
{
    let values = grid.times(omega).par_iter().map(|&t| f(t)).collect();
    RealSeries::new(grid.clone(), values, label)
}

pub fn sample_complex<F>(grid: &TimeGrid, omega: f64, label: &str, f: F) -> Result<ComplexSeries>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let values = grid.times(omega).par_iter().map(|&t| f(t)).collect();
    ComplexSeries::new(grid.clone(), values, label)
}

pub fn survival_series(params: &SpringParams, source: &SourceState, grid: &TimeGrid) -> Result<RealSeries> {
    sample_real(grid, params.omega(), "P0", |t| survival_probability(params, source, t))
}

pub fn variance_x_series(params: &SpringParams, source: &SourceState, grid: &TimeGrid) -> Result<RealSeries> {
    sample_real(grid, params.omega(), "Vx", |t| variance_x(params, source, t))
}

pub fn variance_p_series(params: &SpringParams, source: &SourceState, grid: &TimeGrid) -> Result<RealSeries> {
    sample_real(grid, params.omega(), "Vp", |t| variance_p(params, source, t))
}
