//! Static model quantities: spring parameters, the coherent source and its
//! Poisson weights, the photon-number frequency branches and the overlaps of
//! the shifted-frequency eigenstates with the unshifted ground state.
//!
//! Units are ħ = m = 1. The base frequency ω is kept explicit so that every
//! time-dependent quantity depends on `ω t` only.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default tail bound for the Poisson weight table.
pub const DEFAULT_TRUNCATION_EPS: f64 = 1e-12;

/// Largest photon number a weight table may reach before truncation is
/// declared infeasible.
pub const DEFAULT_PHOTON_CAP: usize = 4096;

/// `ω t = 2π τ`, the time axis of the survival and squeezing figures.
pub const FIGURE_SCALING: f64 = 2.0 * PI;

/// `ω t = 16π τ`, the time axis of the back-action figure.
pub const BACKACTION_SCALING: f64 = 16.0 * PI;

/// Modulation strength `mu` and base frequency `omega` of the spring
/// `H = p²/2 + ω²(1 + μ a†a) x²/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringParams {
    mu: f64,
    omega: f64,
}

impl SpringParams {
    pub fn new(mu: f64, omega: f64) -> Result<Self> {
        if !mu.is_finite() || mu < 0.0 {
            return Err(Error::param("mu", format!("must be finite and >= 0, got {mu}")));
        }
        if !omega.is_finite() || omega <= 0.0 {
            return Err(Error::param("omega", format!("must be finite and > 0, got {omega}")));
        }
        Ok(Self { mu, omega })
    }

    /// Spring with ω = 1.
    pub fn with_mu(mu: f64) -> Result<Self> {
        Self::new(mu, 1.0)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

/// One sector of fixed photon number: the oscillator frequency there and the
/// squeeze parameters of the sudden frequency jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyBranch {
    /// Photon number. Integer for quantum branches; the classical formulas
    /// evaluate the same expressions at `nbar`.
    pub occupation: f64,
    /// `1 + μ p`
    pub eta: f64,
    /// `ω √(1 + μ p)`
    pub omega_p: f64,
    /// `2√η / (1 + √η)`, in `[1, 2)`
    pub beta_sq: f64,
}

impl FrequencyBranch {
    /// Branch at a (possibly non-integer) occupation `x >= 0`.
    pub fn at_occupation(params: &SpringParams, x: f64) -> Self {
        debug_assert!(x >= 0.0);
        let eta = 1.0 + params.mu() * x;
        let root = eta.sqrt();
        Self {
            occupation: x,
            eta,
            omega_p: params.omega() * root,
            beta_sq: 2.0 * root / (1.0 + root),
        }
    }

    /// `(β² − 1)²`, the ratio of successive even-level weights. Always `< 1`.
    pub fn squeeze_ratio(&self) -> f64 {
        let d = self.beta_sq - 1.0;
        d * d
    }
}

pub fn frequency_branch(params: &SpringParams, p: usize) -> FrequencyBranch {
    FrequencyBranch::at_occupation(params, p as f64)
}

/// `ln( √((2m)!) / (2^m m!) )`, accumulated as a sum of logs.
fn ln_central_ratio(m: usize) -> f64 {
    0.5 * (1..=m).map(|j| (-0.5 / j as f64).ln_1p()).sum::<f64>()
}

/// `⟨ψ_l^p | φ_0⟩`: overlap of the `l`-th eigenstate of the branch oscillator
/// with the ground state of the unshifted oscillator.
///
/// Vanishes for odd `l`; for `l = 2m` equals
/// `(β/η^{1/8}) √((2m)!) (β²−1)^m / (2^m m!)`.
pub fn overlap_ground(branch: &FrequencyBranch, l: usize) -> f64 {
    if l % 2 == 1 {
        return 0.0;
    }
    let m = l / 2;
    let lead = branch.beta_sq.sqrt() / branch.eta.powf(0.125);
    if m == 0 {
        return lead;
    }
    let d = branch.beta_sq - 1.0;
    if d == 0.0 {
        return 0.0;
    }
    (lead.ln() + ln_central_ratio(m) + m as f64 * d.ln()).exp()
}

/// Even overlaps `⟨ψ_{2m}^p | φ_0⟩` for `m = 0..=m_max`, built incrementally.
pub fn even_overlaps(branch: &FrequencyBranch, m_max: usize) -> Vec<f64> {
    let lead = branch.beta_sq.sqrt() / branch.eta.powf(0.125);
    let d = branch.beta_sq - 1.0;
    let mut out = Vec::with_capacity(m_max + 1);
    let mut value = lead;
    out.push(value);
    for m in 1..=m_max {
        // ratio of consecutive terms: (β²−1) √((2m−1)/(2m))
        value *= d * ((2 * m - 1) as f64 / (2 * m) as f64).sqrt();
        out.push(value);
    }
    out
}

/// Poisson weights `w_p = nbar^p e^{-nbar} / p!` truncated at the smallest
/// `p_max` with cumulative mass `>= 1 - eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonTable {
    pub weights: Vec<f64>,
}

impl PoissonTable {
    pub fn p_max(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

pub fn poisson_weights(nbar: f64, eps: f64) -> Result<PoissonTable> {
    poisson_weights_capped(nbar, eps, DEFAULT_PHOTON_CAP)
}

pub fn poisson_weights_capped(nbar: f64, eps: f64, cap: usize) -> Result<PoissonTable> {
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(Error::param("nbar", format!("must be finite and >= 0, got {nbar}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps", format!("must lie in (0, 1), got {eps}")));
    }
    if nbar == 0.0 {
        return Ok(PoissonTable { weights: vec![1.0] });
    }
    // w_{p+1} = w_p nbar / (p+1), carried in log form so e^{-nbar} never underflows
    let ln_nbar = nbar.ln();
    let mut ln_w = -nbar;
    let mut weights = Vec::new();
    let mut mass = 0.0;
    for p in 0..=cap {
        if p > 0 {
            ln_w += ln_nbar - (p as f64).ln();
        }
        let w = ln_w.exp();
        weights.push(w);
        mass += w;
        if mass >= 1.0 - eps {
            return Ok(PoissonTable { weights });
        }
    }
    Err(Error::TruncationInfeasible { nbar, cap })
}

/// Coherent state `|α⟩` of the quantized source, with its truncated photon
/// number distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceState {
    alpha: Complex64,
    table: PoissonTable,
}

impl SourceState {
    pub fn coherent(alpha: Complex64, eps: f64) -> Result<Self> {
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(Error::param("alpha", "must be finite"));
        }
        let table = poisson_weights(alpha.norm_sqr(), eps)?;
        Ok(Self { alpha, table })
    }

    /// Coherent state with real, non-negative amplitude `√nbar`.
    pub fn from_nbar(nbar: f64, eps: f64) -> Result<Self> {
        if !nbar.is_finite() || nbar < 0.0 {
            return Err(Error::param("nbar", format!("must be finite and >= 0, got {nbar}")));
        }
        Self::coherent(Complex64::new(nbar.sqrt(), 0.0), eps)
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn nbar(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    pub fn weights(&self) -> &[f64] {
        &self.table.weights
    }

    pub fn p_max(&self) -> usize {
        self.table.p_max()
    }

    /// Fock amplitude `c_n = α^n e^{-|α|²/2} / √n!`.
    pub fn coefficient(&self, n: usize) -> Complex64 {
        let w = self.table.weights.get(n).copied().unwrap_or(0.0);
        Complex64::from_polar(w.sqrt(), n as f64 * self.alpha.arg())
    }

    pub fn coefficients(&self) -> Vec<Complex64> {
        (0..=self.p_max()).map(|n| self.coefficient(n)).collect()
    }
}

/// Dimensionless sample times `τ` with `ω t = scaling · τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    taus: Vec<f64>,
    scaling: f64,
}

impl TimeGrid {
    pub fn from_taus(taus: Vec<f64>, scaling: f64) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::InvalidGrid("no samples".into()));
        }
        if !(scaling.is_finite() && scaling > 0.0) {
            return Err(Error::InvalidGrid(format!("scaling must be > 0, got {scaling}")));
        }
        if !(taus[0].is_finite() && taus[0] >= 0.0) {
            return Err(Error::InvalidGrid(format!("first tau must be >= 0, got {}", taus[0])));
        }
        if let Some(w) = taus.windows(2).find(|w| w[1] <= w[0] || !w[1].is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "taus must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { taus, scaling })
    }

    /// `points` equally spaced samples covering `[0, tau_max]`.
    pub fn uniform(tau_max: f64, points: usize, scaling: f64) -> Result<Self> {
        if points == 0 {
            return Err(Error::InvalidGrid("points must be >= 1".into()));
        }
        if points == 1 {
            return Self::from_taus(vec![0.0], scaling);
        }
        if !(tau_max.is_finite() && tau_max > 0.0) {
            return Err(Error::InvalidGrid(format!("tau_max must be > 0, got {tau_max}")));
        }
        let step = tau_max / (points - 1) as f64;
        let taus = (0..points).map(|i| i as f64 * step).collect();
        Self::from_taus(taus, scaling)
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn scaling(&self) -> f64 {
        self.scaling
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    /// Physical time of every sample for base frequency `omega`.
    pub fn times(&self, omega: f64) -> Vec<f64> {
        self.taus.iter().map(|tau| self.scaling * tau / omega).collect()
    }
}
