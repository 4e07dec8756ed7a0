//! Back-action of the oscillator on the source.
//!
//! The evolution operator of photon sector `n`,
//! `e^{−i h(n)} = exp(γ₊K₊ + γ₋K₋ + γ₃K₃)` with `K₊ = b†²/2`, `K₋ = b²/2`,
//! `K₃ = (b†b + b b†)/4`, is disentangled into
//! `e^{Γ₊K₊} e^{ln Γ₃ K₃} e^{Γ₋K₋}`. Acting on the oscillator ground state
//! this gives `Γ₃^{1/4} e^{Γ₊K₊}|φ₀⟩`, from which the overlap kernel
//!
//! ```text
//! X(n, l) = ⟨φ₀| e^{i h(n)} e^{−i h(l)} |φ₀⟩
//!         = (Γ₃(n)* Γ₃(l))^{1/4} / √(1 − Γ₊(n)* Γ₊(l))
//! ```
//!
//! and the reduced density matrix of the source follow.
//!
//! Everything is evaluated through the even functions `cosh β` and
//! `sinh β / β` of `β²`, so the sign of `β` never enters. The quarter root of
//! `Γ₃` is the branch continuous in `t` starting from 1 at `t = 0`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{sample_complex, ComplexSeries};
use crate::error::{Error, Result};
use crate::model::{SourceState, SpringParams, TimeGrid};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Below this `|β²|` the even functions switch to their Taylor series.
const SERIES_CUTOFF: f64 = 1e-8;

/// Tolerance of the Hermiticity check in [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Disentangling coefficients of one photon sector at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su11Gammas {
    pub n: usize,
    pub gamma_plus: Complex64,
    pub gamma_minus: Complex64,
    pub gamma_3: Complex64,
    /// `γ₃²/4 − γ₊γ₋`, equal to `−(ωt)²(1 + μn)`.
    pub beta_arg_sq: Complex64,
    pub big_gamma_plus: Complex64,
    pub big_gamma_minus: Complex64,
    pub big_gamma_3: Complex64,
    /// `Γ₃^{1/4}` on the branch continuous from `t = 0`; this is the ground
    /// state return amplitude `⟨φ₀|e^{−i h(n)}|φ₀⟩`.
    pub quarter_root_gamma_3: Complex64,
}

/// `cosh √z`, independent of the branch of the root.
fn cosh_sqrt(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_CUTOFF {
        ONE + z / 2.0 + z * z / 24.0
    } else {
        z.sqrt().cosh()
    }
}

/// `sinh √z / √z`, independent of the branch of the root.
fn sinhc_sqrt(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_CUTOFF {
        ONE + z / 6.0 + z * z / 120.0
    } else {
        let w = z.sqrt();
        w.sinh() / w
    }
}

pub fn su11_coefficients(params: &SpringParams, n: usize, t: f64) -> Su11Gammas {
    let mu_n = params.mu() * n as f64;
    let wt = params.omega() * t;
    let gamma_pm = -I * (mu_n * wt / 2.0);
    let gamma_3 = -I * (wt * (mu_n + 2.0));
    let beta_arg_sq = gamma_3 * gamma_3 / 4.0 - gamma_pm * gamma_pm;

    let ch = cosh_sqrt(beta_arg_sq);
    let shc = sinhc_sqrt(beta_arg_sq);
    // cosh β − (γ₃/2β) sinh β
    let denom = ch - gamma_3 / 2.0 * shc;
    let big_gamma_3 = ONE / (denom * denom);
    let big_gamma_pm = gamma_pm * shc / denom;

    // denom = cos θ + i c sin θ with c ≥ 1 traces an ellipse once per π in θ.
    // Removing e^{iθ} leaves cos²θ + c sin²θ + i(c−1) sinθ cosθ, whose real
    // part is ≥ 1, so θ + Arg(denom e^{−iθ}) is the continuous phase.
    let theta = wt * (1.0 + mu_n).sqrt();
    let rotated = denom * Complex64::from_polar(1.0, -theta);
    assert!(rotated.re > 0.0, "disentangling denominator left its sector");
    let phase = theta + rotated.arg();
    let quarter_root_gamma_3 = Complex64::from_polar(denom.norm().powf(-0.5), -0.5 * phase);

    Su11Gammas {
        n,
        gamma_plus: gamma_pm,
        gamma_minus: gamma_pm,
        gamma_3,
        beta_arg_sq,
        big_gamma_plus: big_gamma_pm,
        big_gamma_minus: big_gamma_pm,
        big_gamma_3,
        quarter_root_gamma_3,
    }
}

/// Quarter roots of a time-ordered sequence of `Γ₃` values, keeping the phase
/// continuous between neighbours and starting from the principal root.
///
/// Agrees with [`Su11Gammas::quarter_root_gamma_3`] as long as the grid
/// resolves the winding of `Γ₃` (phase steps below `π`).
pub fn track_quarter_roots(gamma_3: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(gamma_3.len());
    let mut prev: Option<f64> = None;
    for g in gamma_3 {
        let wrapped = g.arg();
        let phase = match prev {
            None => wrapped,
            Some(p) => {
                let mut d = wrapped - p;
                d -= (d / std::f64::consts::TAU).round() * std::f64::consts::TAU;
                p + d
            }
        };
        prev = Some(phase);
        out.push(Complex64::from_polar(g.norm().powf(0.25), phase / 4.0));
    }
    out
}

/// `X(n, l)` from precomputed coefficients of the two sectors.
pub fn x_kernel(bra: &Su11Gammas, ket: &Su11Gammas) -> Complex64 {
    let radicand = ONE - bra.big_gamma_plus.conj() * ket.big_gamma_plus;
    bra.quarter_root_gamma_3.conj() * ket.quarter_root_gamma_3 / radicand.sqrt()
}

/// `X(n, l) = ⟨φ₀| e^{i h(n)} e^{−i h(l)} |φ₀⟩`.
pub fn x_matrix_element(params: &SpringParams, n: usize, l: usize, t: f64) -> Complex64 {
    x_kernel(&su11_coefficients(params, n, t), &su11_coefficients(params, l, t))
}

/// Which reading of the source state the displacement is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackactionMode {
    /// Reduced density matrix of the source (partial trace over the
    /// oscillator). Unit trace at all times.
    #[default]
    PartialTrace,
    /// Pure source state after projecting the oscillator on `|φ₀⟩`,
    /// renormalized by the survival probability.
    Conditional,
}

impl fmt::Display for BackactionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackactionMode::PartialTrace => "partial-trace",
            BackactionMode::Conditional => "conditional",
        })
    }
}

impl FromStr for BackactionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "partial-trace" => Ok(BackactionMode::PartialTrace),
            "conditional" => Ok(BackactionMode::Conditional),
            other => Err(Error::param(
                "mode",
                format!("expected `partial-trace` or `conditional`, got `{other}`"),
            )),
        }
    }
}

/// Square complex matrix with `ρ = ρ†`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: DMatrix<Complex64>,
}

impl HermitianMatrix {
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::param("matrix", "must be square"));
        }
        let m = Self { data };
        let dev = m.hermiticity_error();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(m)
    }

    /// Builds the matrix from its upper triangle; the lower triangle is
    /// mirrored so the result is exactly Hermitian.
    pub fn from_upper<F>(dim: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> Complex64 + Sync,
    {
        let rows: Vec<Vec<Complex64>> = (0..dim)
            .into_par_iter()
            .map(|r| (r..dim).map(|c| f(r, c)).collect())
            .collect();
        let mut data = DMatrix::zeros(dim, dim);
        for (r, row) in rows.into_iter().enumerate() {
            for (k, v) in row.into_iter().enumerate() {
                let c = r + k;
                if r == c {
                    data[(r, r)] = Complex64::new(v.re, 0.0);
                } else {
                    data[(r, c)] = v;
                    data[(c, r)] = v.conj();
                }
            }
        }
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.data[(i, i)].re).collect()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.data[(r, c)] - self.data[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    /// `Tr(ρ a) = Σ_n √n ρ_{n, n−1}` for a matrix in a Fock basis.
    pub fn lowering_expectation(&self) -> Complex64 {
        (1..self.dim()).map(|n| (n as f64).sqrt() * self.data[(n, n - 1)]).sum()
    }

    pub fn max_abs_diff(&self, other: &HermitianMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn sector_coefficients(params: &SpringParams, dim: usize, t: f64) -> Vec<Su11Gammas> {
    (0..dim).map(|n| su11_coefficients(params, n, t)).collect()
}

fn check_dim(source: &SourceState, dim: usize) -> Result<()> {
    let available = source.p_max() + 1;
    if dim > available {
        return Err(Error::DimensionTooLarge {
            requested: dim,
            available,
        });
    }
    Ok(())
}

/// Reduced density matrix of the source,
/// `ρ_{n,l} = c_n c_l* X(l, n)`, truncated to `dim` photon numbers
/// (`None` uses every weight of the source table).
pub fn source_density(
    params: &SpringParams,
    source: &SourceState,
    t: f64,
    dim: Option<usize>,
) -> Result<HermitianMatrix> {
    let dim = dim.unwrap_or(source.p_max() + 1);
    check_dim(source, dim)?;
    let c = source.coefficients();
    let g = sector_coefficients(params, dim, t);
    Ok(HermitianMatrix::from_upper(dim, |n, l| {
        if n == l {
            Complex64::new(c[n].norm_sqr(), 0.0)
        } else {
            c[n] * c[l].conj() * x_kernel(&g[l], &g[n])
        }
    }))
}

/// Source state conditioned on finding the oscillator in `|φ₀⟩`:
/// `|ψ⟩ ∝ Σ_n c_n Γ₃(n)^{1/4} |n⟩`.
pub fn conditional_density(
    params: &SpringParams,
    source: &SourceState,
    t: f64,
    dim: Option<usize>,
) -> Result<HermitianMatrix> {
    let dim = dim.unwrap_or(source.p_max() + 1);
    check_dim(source, dim)?;
    let amps = conditional_amplitudes(params, source, t, dim);
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    Ok(HermitianMatrix::from_upper(dim, |n, l| amps[n] * amps[l].conj() / norm))
}

fn conditional_amplitudes(params: &SpringParams, source: &SourceState, t: f64, dim: usize) -> Vec<Complex64> {
    (0..dim)
        .map(|n| source.coefficient(n) * su11_coefficients(params, n, t).quarter_root_gamma_3)
        .collect()
}

/// Mean displacement `⟨a⟩(t)` of the source.
pub fn mean_displacement(params: &SpringParams, source: &SourceState, t: f64, mode: BackactionMode) -> Complex64 {
    let dim = source.p_max() + 1;
    match mode {
        BackactionMode::PartialTrace => {
            let c = source.coefficients();
            let g = sector_coefficients(params, dim, t);
            (1..dim)
                .map(|n| (n as f64).sqrt() * c[n] * c[n - 1].conj() * x_kernel(&g[n - 1], &g[n]))
                .sum()
        }
        BackactionMode::Conditional => {
            let a = conditional_amplitudes(params, source, t, dim);
            let norm: f64 = a.iter().map(|v| v.norm_sqr()).sum();
            (1..dim)
                .map(|n| (n as f64).sqrt() * a[n] * a[n - 1].conj())
                .sum::<Complex64>()
                / norm
        }
    }
}

pub fn mean_displacement_series(
    params: &SpringParams,
    source: &SourceState,
    grid: &TimeGrid,
    mode: BackactionMode,
) -> Result<ComplexSeries> {
    sample_complex(grid, params.omega(), "<a>", |t| {
        mean_displacement(params, source, t, mode)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DEFAULT_TRUNCATION_EPS;

    fn params(mu: f64) -> SpringParams {
        SpringParams::with_mu(mu).unwrap()
    }

    #[test]
    fn identity_at_t0() {
        let g = su11_coefficients(&params(0.3), 25, 0.0);
        assert_eq!(g.big_gamma_plus, Complex64::new(0.0, 0.0));
        assert_eq!(g.big_gamma_minus, Complex64::new(0.0, 0.0));
        assert!((g.big_gamma_3 - ONE).norm() < 1e-15);
        assert!((g.quarter_root_gamma_3 - ONE).norm() < 1e-15);
    }

    #[test]
    fn vacuum_sector_is_a_free_phase() {
        for t in [0.3, 2.0, 17.0, 50.0] {
            let g = su11_coefficients(&params(0.3), 0, t);
            assert_eq!(g.gamma_plus, Complex64::new(0.0, 0.0));
            assert_eq!(g.big_gamma_plus.norm(), 0.0);
            assert!((g.big_gamma_3.norm() - 1.0).abs() < 1e-12);
            // zero-point phase e^{−iωt/2}
            assert!((g.quarter_root_gamma_3 - Complex64::from_polar(1.0, -t / 2.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn beta_arg_identity_and_bounds() {
        let p = params(0.3);
        for n in [0, 1, 5, 25, 60] {
            for k in 0..60 {
                let t = 0.83 * k as f64;
                let g = su11_coefficients(&p, n, t);
                let expect = -(t * t) * (1.0 + 0.3 * n as f64);
                assert!((g.beta_arg_sq - expect).norm() <= 1e-12 * expect.abs().max(1.0));
                assert!(g.gamma_3.re == 0.0);
                assert!(g.big_gamma_plus.norm() < 1.0);
                assert!(g.big_gamma_3.norm() <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn series_fallback_is_continuous() {
        let p = params(0.3);
        let tiny = su11_coefficients(&p, 10, 1e-6);
        let small = su11_coefficients(&p, 10, 2e-4);
        assert!(tiny.beta_arg_sq.norm() < SERIES_CUTOFF);
        assert!(small.beta_arg_sq.norm() > SERIES_CUTOFF);
        assert!((tiny.big_gamma_3 - ONE).norm() < 1e-5);
        assert!((small.big_gamma_3 - ONE).norm() < 1e-2);
        // both sides of the cutoff against direct trig: Γ₃^{-1/2} = cos θ + i c sin θ
        for g in [tiny, small] {
            let t = if g == tiny { 1e-6 } else { 2e-4 };
            let th = t * 4.0f64.sqrt();
            let c = 5.0 / (2.0 * 2.0);
            let d = Complex64::new(th.cos(), c * th.sin());
            assert!((g.big_gamma_3 - ONE / (d * d)).norm() < 1e-14);
        }
    }

    #[test]
    fn quarter_root_is_continuous_and_matches_tracking() {
        let p = params(0.3);
        let times: Vec<f64> = (0..4000).map(|k| 0.0125 * k as f64).collect();
        let gammas: Vec<Su11Gammas> = times.iter().map(|&t| su11_coefficients(&p, 25, t)).collect();
        let g3: Vec<Complex64> = gammas.iter().map(|g| g.big_gamma_3).collect();
        let tracked = track_quarter_roots(&g3);
        for (g, tr) in gammas.iter().zip(&tracked) {
            assert!((g.quarter_root_gamma_3 - tr).norm() < 1e-12);
            let fourth = g.quarter_root_gamma_3.powi(4);
            assert!((fourth - g.big_gamma_3).norm() < 1e-12);
        }
        for w in gammas.windows(2) {
            assert!((w[1].quarter_root_gamma_3 - w[0].quarter_root_gamma_3).norm() < 0.1);
        }
    }

    #[test]
    fn x_kernel_anchors() {
        let p = params(0.3);
        for (n, l) in [(0, 0), (3, 7), (25, 24), (60, 1)] {
            assert!((x_matrix_element(&p, n, l, 0.0) - ONE).norm() < 1e-12);
        }
        for n in [0, 1, 5, 25, 60] {
            for t in [0.5, 2.0, 10.0, 50.0] {
                assert!((x_matrix_element(&p, n, n, t) - ONE).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn x_kernel_symmetry_and_bound() {
        let p = params(0.3);
        for n in [0, 1, 5, 24, 25, 60] {
            for l in [0, 1, 5, 24, 25, 60] {
                for t in [0.5, 2.0, 10.0, 50.0] {
                    let a = x_matrix_element(&p, n, l, t);
                    let b = x_matrix_element(&p, l, n, t);
                    assert!((a - b.conj()).norm() < 1e-12);
                    assert!(a.norm() <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn density_properties() {
        let p = params(0.3);
        let s = SourceState::from_nbar(25.0, DEFAULT_TRUNCATION_EPS).unwrap();
        let rho0 = source_density(&p, &s, 0.0, None).unwrap();
        let c = s.coefficients();
        for n in 0..rho0.dim() {
            for l in 0..rho0.dim() {
                assert!((rho0.get(n, l) - c[n] * c[l].conj()).norm() < 1e-14);
            }
        }
        assert!((rho0.purity() - 1.0).abs() < 1e-10);
        let rho = source_density(&p, &s, 2.0, None).unwrap();
        assert!(rho.hermiticity_error() < 1e-12);
        assert!((rho.trace() - ONE).norm() < 1e-10);
        for (n, d) in rho.diagonal().iter().enumerate() {
            assert!((d - s.weights()[n]).abs() < 1e-12);
        }
        assert!(rho.purity() < 1.0 - 1e-6);
        assert!(source_density(&p, &s, 2.0, Some(s.p_max() + 2)).is_err());
        assert_eq!(source_density(&p, &s, 2.0, Some(10)).unwrap().dim(), 10);
    }

    #[test]
    fn unmodulated_density_is_static() {
        let p = params(0.0);
        let s = SourceState::from_nbar(4.0, 1e-14).unwrap();
        let a = source_density(&p, &s, 0.0, None).unwrap();
        let b = source_density(&p, &s, 37.0, None).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
        let d = mean_displacement(&p, &s, 37.0, BackactionMode::PartialTrace);
        assert!((d - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        let d = mean_displacement(&p, &s, 37.0, BackactionMode::Conditional);
        assert!((d - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn displacement_starts_at_alpha() {
        let p = params(0.3);
        let alpha = Complex64::from_polar(5.0, 0.4);
        let s = SourceState::coherent(alpha, 1e-14).unwrap();
        for mode in [BackactionMode::PartialTrace, BackactionMode::Conditional] {
            assert!((mean_displacement(&p, &s, 0.0, mode) - alpha).norm() < 1e-12);
        }
        let rho = source_density(&p, &s, 1.3, None).unwrap();
        let d = mean_displacement(&p, &s, 1.3, BackactionMode::PartialTrace);
        assert!((rho.lowering_expectation() - d).norm() < 1e-12);
        let cond = conditional_density(&p, &s, 1.3, None).unwrap();
        let d = mean_displacement(&p, &s, 1.3, BackactionMode::Conditional);
        assert!((cond.lowering_expectation() - d).norm() < 1e-12);
        assert!((cond.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!(
            "partial-trace".parse::<BackactionMode>().unwrap(),
            BackactionMode::PartialTrace
        );
        assert_eq!(
            "conditional".parse::<BackactionMode>().unwrap(),
            BackactionMode::Conditional
        );
        assert!("other".parse::<BackactionMode>().is_err());
        assert_eq!(BackactionMode::Conditional.to_string(), "conditional");
    }

    #[test]
    fn hermitian_matrix_rejects_asymmetry() {
        let mut m = DMatrix::<Complex64>::identity(3, 3);
        m[(0, 1)] = Complex64::new(0.0, 0.5);
        assert!(matches!(HermitianMatrix::new(m.clone()), Err(Error::NotHermitian(_))));
        m[(1, 0)] = Complex64::new(0.0, -0.5);
        assert!(HermitianMatrix::new(m).is_ok());
        let mixed = HermitianMatrix::new(DMatrix::identity(4, 4) / Complex64::new(4.0, 0.0)).unwrap();
        assert!((mixed.purity() - 0.25).abs() < 1e-15);
    }
}
