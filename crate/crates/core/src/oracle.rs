//! Brute-force reference numerics.
//!
//! The joint state is stored as amplitudes `C[p][k]` on `|p⟩ ⊗ |k⟩`, where
//! `|k⟩` are Fock states of the unshifted oscillator (frequency ω). In photon
//! sector `p` the Hamiltonian is
//!
//! ```text
//! H_p = ω(2 + μp)/2 (b†b + 1/2) + ωμp/4 (b†² + b²)
//! ```
//!
//! truncated to `L` levels. It only couples `k` to `k ± 2`, so each block
//! splits into an even and an odd tridiagonal matrix. Both are diagonalized
//! once; evolution to any `t` is then exact up to truncation.
//!
//! Nothing here uses the closed forms of [`crate::dynamics`] or
//! [`crate::backaction`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::backaction::HermitianMatrix;
use crate::error::{Error, Result};
use crate::model::{FrequencyBranch, SourceState, SpringParams};

pub const DEFAULT_BASIS_SIZE: usize = 400;
pub const MAX_BASIS_SIZE: usize = 2048;
pub const MIN_BASIS_SIZE: usize = 4;

/// Maximum population allowed in the top decile of the basis.
pub const LEAKAGE_THRESHOLD: f64 = 1e-10;

/// Eigen-components below this fraction of a block's norm are not propagated.
const NEGLIGIBLE_COMPONENT: f64 = 1e-20;

/// Eigen-decomposition restricted to the Fock states of one parity.
#[derive(Debug, Clone)]
struct ParityBlock {
    /// Fock indices `k` of this parity, ascending.
    levels: Vec<usize>,
    energies: DVector<f64>,
    /// Columns are eigenvectors over `levels`.
    vectors: DMatrix<f64>,
}

impl ParityBlock {
    fn new(levels: Vec<usize>, diag: impl Fn(usize) -> f64, off: impl Fn(usize) -> f64) -> Self {
        let n = levels.len();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (i, &k) in levels.iter().enumerate() {
            m[(i, i)] = diag(k);
            if i + 1 < n {
                let v = off(k);
                m[(i, i + 1)] = v;
                m[(i + 1, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(m);
        Self {
            levels,
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }

    /// Components of `psi` (full-block amplitudes) along each eigenvector.
    fn project(&self, psi: &[Complex64]) -> Vec<Complex64> {
        (0..self.vectors.ncols())
            .map(|j| {
                let col = self.vectors.column(j);
                self.levels.iter().enumerate().map(|(i, &k)| psi[k] * col[i]).sum()
            })
            .collect()
    }

    /// Adds `Σ_j a_j e^{−iE_j t} v_j` into `out`.
    fn propagate_into(&self, comps: &[(usize, Complex64)], t: f64, out: &mut [Complex64]) {
        for &(j, a) in comps {
            let phased = a * Complex64::from_polar(1.0, -self.energies[j] * t);
            let col = self.vectors.column(j);
            for (i, &k) in self.levels.iter().enumerate() {
                out[k] += phased * col[i];
            }
        }
    }
}

/// Hamiltonian of photon sector `p` in the truncated oscillator Fock basis,
/// with its eigen-decomposition.
#[derive(Debug, Clone)]
pub struct BlockHamiltonian {
    p: usize,
    size: usize,
    omega: f64,
    mu: f64,
    even: ParityBlock,
    odd: ParityBlock,
}

fn check_basis_size(size: usize) -> Result<()> {
    if !(MIN_BASIS_SIZE..=MAX_BASIS_SIZE).contains(&size) {
        return Err(Error::param(
            "basis_size",
            format!("must lie in [{MIN_BASIS_SIZE}, {MAX_BASIS_SIZE}], got {size}"),
        ));
    }
    Ok(())
}

pub fn build_block(params: &SpringParams, p: usize, size: usize) -> Result<BlockHamiltonian> {
    check_basis_size(size)?;
    let (omega, mu) = (params.omega(), params.mu());
    let mp = mu * p as f64;
    let diag = move |k: usize| omega * (2.0 + mp) / 2.0 * (k as f64 + 0.5);
    let off = move |k: usize| omega * mp / 4.0 * (((k + 1) * (k + 2)) as f64).sqrt();
    Ok(BlockHamiltonian {
        p,
        size,
        omega,
        mu,
        even: ParityBlock::new((0..size).step_by(2).collect(), diag, off),
        odd: ParityBlock::new((1..size).step_by(2).collect(), diag, off),
    })
}

impl BlockHamiltonian {
    pub fn photon_number(&self) -> usize {
        self.p
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Element `⟨k|H_p|k'⟩`.
    pub fn element(&self, k: usize, kp: usize) -> f64 {
        let mp = self.mu * self.p as f64;
        let (lo, hi) = (k.min(kp), k.max(kp));
        if k == kp {
            self.omega * (2.0 + mp) / 2.0 * (k as f64 + 0.5)
        } else if hi - lo == 2 {
            self.omega * mp / 4.0 * (((lo + 1) * (lo + 2)) as f64).sqrt()
        } else {
            0.0
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.size, self.size, |r, c| self.element(r, c))
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self
            .even
            .energies
            .iter()
            .chain(self.odd.energies.iter())
            .copied()
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }

    /// Eigenvectors over the full basis, each supported on a single parity,
    /// paired with their energies.
    pub fn eigenvectors(&self) -> Vec<(f64, DVector<f64>)> {
        let mut out = Vec::with_capacity(self.size);
        for blk in [&self.even, &self.odd] {
            for j in 0..blk.vectors.ncols() {
                let mut v = DVector::zeros(self.size);
                for (i, &k) in blk.levels.iter().enumerate() {
                    v[k] = blk.vectors[(i, j)];
                }
                out.push((blk.energies[j], v));
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// `⟨ψ|H_p|ψ⟩` for a block vector.
    pub fn energy(&self, psi: &[Complex64]) -> f64 {
        let mut e = 0.0;
        for k in 0..self.size {
            e += self.element(k, k) * psi[k].norm_sqr();
            if k + 2 < self.size {
                e += 2.0 * self.element(k, k + 2) * (psi[k].conj() * psi[k + 2]).re;
            }
        }
        e
    }

    fn prepare(&self, psi: &[Complex64]) -> PreparedBlock {
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let cut = NEGLIGIBLE_COMPONENT * norm;
        let keep = |comps: Vec<Complex64>| -> Vec<(usize, Complex64)> {
            comps.into_iter().enumerate().filter(|(_, a)| a.norm() > cut).collect()
        };
        PreparedBlock {
            even: keep(self.even.project(psi)),
            odd: keep(self.odd.project(psi)),
        }
    }

    fn propagate(&self, prepared: &PreparedBlock, t: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.size];
        self.even.propagate_into(&prepared.even, t, &mut out);
        self.odd.propagate_into(&prepared.odd, t, &mut out);
        out
    }

    /// `e^{−iH_p t} psi`.
    pub fn evolve(&self, psi: &[Complex64], t: f64) -> Vec<Complex64> {
        assert_eq!(psi.len(), self.size);
        self.propagate(&self.prepare(psi), t)
    }
}

#[derive(Debug, Clone)]
struct PreparedBlock {
    even: Vec<(usize, Complex64)>,
    odd: Vec<(usize, Complex64)>,
}

/// Amplitudes `C[p][k]` of the joint source–oscillator state.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    coeffs: DMatrix<Complex64>,
}

impl JointState {
    /// Arbitrary amplitudes; rows are photon numbers, columns Fock levels.
    pub fn from_coefficients(coeffs: DMatrix<Complex64>) -> Result<Self> {
        if coeffs.nrows() == 0 {
            return Err(Error::param("coefficients", "need at least one photon number"));
        }
        check_basis_size(coeffs.ncols())?;
        Ok(Self { coeffs })
    }

    /// `|α⟩ ⊗ |φ₀⟩`, the coherent source times the oscillator ground state.
    pub fn product_ground(source: &SourceState, basis_size: usize) -> Result<Self> {
        check_basis_size(basis_size)?;
        let c = source.coefficients();
        let mut coeffs = DMatrix::zeros(c.len(), basis_size);
        for (p, cp) in c.iter().enumerate() {
            coeffs[(p, 0)] = *cp;
        }
        Ok(Self { coeffs })
    }

    pub fn photon_dim(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn basis_size(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn amplitude(&self, p: usize, k: usize) -> Complex64 {
        self.coeffs[(p, k)]
    }

    pub fn block(&self, p: usize) -> Vec<Complex64> {
        self.coeffs.row(p).iter().copied().collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn block_norm_sqr(&self, p: usize) -> f64 {
        self.coeffs.row(p).iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest fraction of a block's population sitting in the top decile of
    /// the basis, with the block it occurs in.
    pub fn leakage(&self) -> (usize, f64) {
        let top = self.basis_size() - self.basis_size() / 10;
        let mut worst = (0, 0.0);
        for p in 0..self.photon_dim() {
            let total = self.block_norm_sqr(p);
            if total == 0.0 {
                continue;
            }
            let tail: f64 = (top..self.basis_size()).map(|k| self.coeffs[(p, k)].norm_sqr()).sum();
            if tail / total > worst.1 {
                worst = (p, tail / total);
            }
        }
        worst
    }

    fn from_blocks(blocks: Vec<Vec<Complex64>>) -> Self {
        let rows = blocks.len();
        let cols = blocks[0].len();
        Self {
            coeffs: DMatrix::from_fn(rows, cols, |p, k| blocks[p][k]),
        }
    }
}

/// Block Hamiltonians for photon numbers `0..=photon_max` at one basis size.
#[derive(Debug, Clone)]
pub struct Oracle {
    params: SpringParams,
    blocks: Vec<BlockHamiltonian>,
}

impl Oracle {
    pub fn new(params: &SpringParams, photon_max: usize, basis_size: usize) -> Result<Self> {
        check_basis_size(basis_size)?;
        let blocks = (0..=photon_max)
            .into_par_iter()
            .map(|p| build_block(params, p, basis_size))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params: *params,
            blocks,
        })
    }

    pub fn for_source(params: &SpringParams, source: &SourceState, basis_size: usize) -> Result<Self> {
        Self::new(params, source.p_max(), basis_size)
    }

    pub fn params(&self) -> &SpringParams {
        &self.params
    }

    pub fn basis_size(&self) -> usize {
        self.blocks[0].size()
    }

    pub fn block(&self, p: usize) -> &BlockHamiltonian {
        &self.blocks[p]
    }

    fn check_state(&self, state: &JointState) -> Result<()> {
        if state.basis_size() != self.basis_size() {
            return Err(Error::param(
                "basis_size",
                format!("state has {} levels, oracle {}", state.basis_size(), self.basis_size()),
            ));
        }
        if state.photon_dim() > self.blocks.len() {
            return Err(Error::DimensionTooLarge {
                requested: state.photon_dim(),
                available: self.blocks.len(),
            });
        }
        Ok(())
    }

    /// Decomposes `state` on the block eigenbases once, for repeated
    /// evaluation at many times.
    pub fn propagator(&self, state: &JointState) -> Result<Propagator<'_>> {
        self.check_state(state)?;
        let prepared = (0..state.photon_dim())
            .into_par_iter()
            .map(|p| self.blocks[p].prepare(&state.block(p)))
            .collect();
        Ok(Propagator { oracle: self, prepared })
    }

    /// `e^{−iHt}` applied to `state`, block by block. Fails if the evolved
    /// state leaks into the top decile of the basis.
    pub fn evolve(&self, state: &JointState, t: f64) -> Result<JointState> {
        let out = self.propagator(state)?.at(t);
        check_leakage(&out)?;
        Ok(out)
    }
}

pub fn check_leakage(state: &JointState) -> Result<()> {
    let (block, leakage) = state.leakage();
    if leakage > LEAKAGE_THRESHOLD {
        return Err(Error::BasisLeakage {
            block,
            leakage,
            threshold: LEAKAGE_THRESHOLD,
        });
    }
    Ok(())
}

/// A joint state decomposed on the block eigenbases.
pub struct Propagator<'a> {
    oracle: &'a Oracle,
    prepared: Vec<PreparedBlock>,
}

impl Propagator<'_> {
    pub fn at(&self, t: f64) -> JointState {
        let blocks = self
            .prepared
            .iter()
            .enumerate()
            .map(|(p, prep)| self.oracle.blocks[p].propagate(prep, t))
            .collect();
        JointState::from_blocks(blocks)
    }

    /// `⟨k=0|ψ_p(t)⟩` per block: only the even components at `k = 0` are
    /// needed, so this skips building the full state.
    pub fn ground_amplitudes(&self, t: f64) -> Vec<Complex64> {
        self.prepared
            .iter()
            .enumerate()
            .map(|(p, prep)| {
                let blk = &self.oracle.blocks[p].even;
                prep.even
                    .iter()
                    .map(|&(j, a)| a * blk.vectors[(0, j)] * Complex64::from_polar(1.0, -blk.energies[j] * t))
                    .sum()
            })
            .collect()
    }
}

/// Observables of an evolved joint state, computed without any closed form.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    /// `⟨φ₀|ρ_osc|φ₀⟩`
    pub survival: f64,
    /// `Var x(t) / ⟨x²(0)⟩`
    pub var_x: f64,
    /// `Var p(t) / ⟨p²(0)⟩`
    pub var_p: f64,
    /// `Tr(ρ_source a)`
    pub displacement: Complex64,
    pub source_density: Option<HermitianMatrix>,
    /// See [`JointState::leakage`].
    pub leakage: f64,
}

impl Oracle {
    /// Evolves `initial` to every time in `times` (in parallel) and reduces
    /// each state to its observables. The source density matrix is kept only
    /// when `keep_density` is set.
    pub fn snapshots(&self, initial: &JointState, times: &[f64], keep_density: bool) -> Result<Vec<Snapshot>> {
        let prop = self.propagator(initial)?;
        let omega = self.params.omega();
        let m0 = moments(initial, omega);
        Ok(times
            .par_iter()
            .map(|&t| {
                let state = prop.at(t);
                let m = moments(&state, omega);
                let rho = reduced_source(&state);
                let survival = (0..state.photon_dim()).map(|p| state.amplitude(p, 0).norm_sqr()).sum();
                Snapshot {
                    t,
                    survival,
                    var_x: m.var_x() / m0.x2,
                    var_p: m.var_p() / m0.p2,
                    displacement: rho.lowering_expectation(),
                    source_density: keep_density.then_some(rho),
                    leakage: state.leakage().1,
                }
            })
            .collect())
    }
}

/// Oscillator density matrix `ρ_{k,k'} = Σ_p C[p][k] C[p][k']*`.
pub fn reduced_oscillator(state: &JointState) -> HermitianMatrix {
    let c = &state.coeffs;
    HermitianMatrix::from_upper(state.basis_size(), |k, kp| {
        (0..state.photon_dim()).map(|p| c[(p, k)] * c[(p, kp)].conj()).sum()
    })
}

/// Source density matrix `ρ_{p,p'} = Σ_k C[p][k] C[p'][k]*`.
pub fn reduced_source(state: &JointState) -> HermitianMatrix {
    let c = &state.coeffs;
    HermitianMatrix::from_upper(state.photon_dim(), |p, pp| {
        c.row(p).iter().zip(c.row(pp).iter()).map(|(a, b)| a * b.conj()).sum()
    })
}

/// Oscillator moments of a joint state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub x: f64,
    pub p: f64,
    pub x2: f64,
    pub p2: f64,
    /// `⟨xp + px⟩`
    pub xp_px: f64,
}

impl Moments {
    pub fn var_x(&self) -> f64 {
        self.x2 - self.x * self.x
    }

    pub fn var_p(&self) -> f64 {
        self.p2 - self.p * self.p
    }
}

/// Moments from ladder-operator sums, with `x = (b + b†)/√(2ω)` and
/// `p = i√(ω/2)(b† − b)`.
pub fn moments(state: &JointState, omega: f64) -> Moments {
    let mut b = Complex64::new(0.0, 0.0); // ⟨b⟩
    let mut b2 = Complex64::new(0.0, 0.0); // ⟨b²⟩
    let mut number = 0.0; // ⟨b†b + 1/2⟩
    let size = state.basis_size();
    for p in 0..state.photon_dim() {
        let row = state.coeffs.row(p);
        for k in 0..size {
            let ck = row[k];
            number += ck.norm_sqr() * (k as f64 + 0.5);
            if k + 1 < size {
                b += row[k].conj() * row[k + 1] * ((k + 1) as f64).sqrt();
            }
            if k + 2 < size {
                b2 += row[k].conj() * row[k + 2] * (((k + 1) * (k + 2)) as f64).sqrt();
            }
        }
    }
    // x² = (b² + b†² + 2b†b + 1)/(2ω),  p² = −ω(b² + b†² − 2b†b − 1)/2
    Moments {
        x: 2.0 * b.re / (2.0 * omega).sqrt(),
        p: 2.0 * b.im * (omega / 2.0).sqrt(),
        x2: (2.0 * b2.re + 2.0 * number) / (2.0 * omega),
        p2: omega / 2.0 * (2.0 * number - 2.0 * b2.re),
        xp_px: 2.0 * b2.im,
    }
}

/// Position grid for [`overlap_quadrature`], in units of the ground-state
/// width `1/√ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureGrid {
    pub half_width: f64,
    /// Odd, for Simpson's rule.
    pub points: usize,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self {
            half_width: 12.0,
            points: 4001,
        }
    }
}

/// Normalized Hermite functions `h_0..=h_n` at `y`, by the three-term
/// recurrence.
pub fn hermite_functions(n: usize, y: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(std::f64::consts::PI.powf(-0.25) * (-0.5 * y * y).exp());
    if n >= 1 {
        h.push(std::f64::consts::SQRT_2 * y * h[0]);
    }
    for k in 1..n {
        let next = (2.0 / (k + 1) as f64).sqrt() * y * h[k] - (k as f64 / (k + 1) as f64).sqrt() * h[k - 1];
        h.push(next);
    }
    h
}

/// `∫ ψ_l^p(x) φ₀(x) dx` by Simpson's rule.
pub fn overlap_quadrature(branch: &FrequencyBranch, l: usize, grid: &QuadratureGrid) -> f64 {
    assert!(
        grid.points >= 3 && grid.points % 2 == 1,
        "Simpson needs an odd point count"
    );
    // inverse widths: √ω for φ₀, √ω_p for ψ^p
    let alpha_p = branch.omega_p.sqrt();
    let alpha = (branch.omega_p / branch.eta.sqrt()).sqrt();
    let x_max = grid.half_width / alpha;
    let h = 2.0 * x_max / (grid.points - 1) as f64;
    let mut sum = 0.0;
    for i in 0..grid.points {
        let x = -x_max + i as f64 * h;
        let psi = alpha_p.sqrt() * hermite_functions(l, alpha_p * x)[l];
        let phi = alpha.sqrt() * hermite_functions(0, alpha * x)[0];
        let w = if i == 0 || i == grid.points - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * psi * phi;
    }
    sum * h / 3.0
}

/// `⟨φ₀| e^{i h(n)} e^{−i h(l)} |φ₀⟩` from two truncated-basis evolutions.
pub fn x_matrix_element_oracle(
    params: &SpringParams,
    n: usize,
    l: usize,
    t: f64,
    basis_size: usize,
) -> Result<Complex64> {
    let mut ground = vec![Complex64::new(0.0, 0.0); basis_size];
    ground[0] = Complex64::new(1.0, 0.0);
    let evolved = |p: usize| -> Result<Vec<Complex64>> {
        let psi = build_block(params, p, basis_size)?.evolve(&ground, t);
        let state = JointState::from_blocks(vec![psi]);
        check_leakage(&state)?;
        Ok(state.block(0))
    };
    let bra = evolved(n)?;
    let ket = evolved(l)?;
    Ok(bra.iter().zip(&ket).map(|(a, b)| a.conj() * b).sum())
}

/// `Tr ρ²`.
pub fn purity(matrix: &HermitianMatrix) -> f64 {
    matrix.purity()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{frequency_branch, DEFAULT_TRUNCATION_EPS};

    fn params(mu: f64) -> SpringParams {
        SpringParams::with_mu(mu).unwrap()
    }

    #[test]
    fn unmodulated_block_is_diagonal() {
        for (mu, p) in [(0.0, 7), (0.3, 0)] {
            let b = build_block(&params(mu), p, 40).unwrap();
            let m = b.matrix();
            for r in 0..40 {
                for c in 0..40 {
                    if r != c {
                        assert_eq!(m[(r, c)], 0.0);
                    }
                }
            }
            for (k, e) in b.eigenvalues().iter().enumerate() {
                assert!((e - (k as f64 + 0.5)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn block_matches_dense_construction() {
        let b = build_block(&params(0.3), 25, 12).unwrap();
        let m = b.matrix();
        assert_eq!(m, m.transpose());
        // H = p²/2 + (1+μp) x²/2 with x, p from truncated ladder matrices,
        // compared on the interior where truncation does not touch b b†
        let n = 14;
        let mut a = DMatrix::<f64>::zeros(n, n);
        for k in 0..n - 1 {
            a[(k, k + 1)] = ((k + 1) as f64).sqrt();
        }
        let x = (&a + a.transpose()) / 2f64.sqrt();
        let pm = (a.transpose() - &a) / 2f64.sqrt(); // p = i·pm
        let h = -(&pm * &pm) / 2.0 + (&x * &x) * (1.0 + 0.3 * 25.0) / 2.0;
        for r in 0..12 {
            for c in 0..12 {
                assert!((h[(r, c)] - m[(r, c)]).abs() < 1e-12, "({r},{c})");
            }
        }
    }

    #[test]
    fn spectrum_reproduces_branch_frequency() {
        let b = build_block(&params(0.1), 4, 400).unwrap();
        let w = 1.4f64.sqrt();
        for (n, e) in b.eigenvalues().iter().take(50).enumerate() {
            let exact = w * (n as f64 + 0.5);
            assert!(((e - exact) / exact).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn eigenvectors_have_definite_parity() {
        let b = build_block(&params(0.3), 10, 30).unwrap();
        for (_, v) in b.eigenvectors() {
            let even: f64 = (0..30).step_by(2).map(|k| v[k] * v[k]).sum();
            let odd: f64 = (1..30).step_by(2).map(|k| v[k] * v[k]).sum();
            assert!(even == 0.0 || odd == 0.0);
            assert!((even + odd - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_basis_size() {
        assert!(build_block(&params(0.1), 1, 2).is_err());
        assert!(build_block(&params(0.1), 1, MAX_BASIS_SIZE + 1).is_err());
    }

    #[test]
    fn evolution_identity_norm_and_energy() {
        let p = params(0.3);
        let s = SourceState::from_nbar(4.0, DEFAULT_TRUNCATION_EPS).unwrap();
        let oracle = Oracle::for_source(&p, &s, 200).unwrap();
        let psi0 = JointState::product_ground(&s, 200).unwrap();
        let same = oracle.evolve(&psi0, 0.0).unwrap();
        for pp in 0..psi0.photon_dim() {
            for k in 0..200 {
                assert!((same.amplitude(pp, k) - psi0.amplitude(pp, k)).norm() < 1e-13);
            }
        }
        let later = oracle.evolve(&psi0, 23.7).unwrap();
        for pp in 0..psi0.photon_dim() {
            assert!((later.block_norm_sqr(pp).sqrt() - psi0.block_norm_sqr(pp).sqrt()).abs() < 1e-12);
            let e0 = oracle.block(pp).energy(&psi0.block(pp));
            let e1 = oracle.block(pp).energy(&later.block(pp));
            assert!((e1 - e0).abs() <= 1e-10 * e0.abs().max(1e-300), "p={pp}");
            // parity superselection
            for k in (1..200).step_by(2) {
                assert_eq!(later.amplitude(pp, k), Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn unmodulated_evolution_is_a_phase() {
        let p = params(0.0);
        let s = SourceState::from_nbar(4.0, DEFAULT_TRUNCATION_EPS).unwrap();
        let oracle = Oracle::for_source(&p, &s, 40).unwrap();
        let psi0 = JointState::product_ground(&s, 40).unwrap();
        let t = 3.1;
        let psi = oracle.evolve(&psi0, t).unwrap();
        let phase = Complex64::from_polar(1.0, -t / 2.0);
        for pp in 0..psi0.photon_dim() {
            assert!((psi.amplitude(pp, 0) - psi0.amplitude(pp, 0) * phase).norm() < 1e-14);
        }
        let m0 = moments(&psi0, 1.0);
        let m1 = moments(&psi, 1.0);
        assert!((m0.x2 - m1.x2).abs() < 1e-12 && (m0.p2 - m1.p2).abs() < 1e-12);
    }

    #[test]
    fn ground_state_moments() {
        let s = SourceState::from_nbar(4.0, DEFAULT_TRUNCATION_EPS).unwrap();
        let psi = JointState::product_ground(&s, 20).unwrap();
        let m = moments(&psi, 1.0);
        assert!(m.x.abs() < 1e-15 && m.p.abs() < 1e-15 && m.xp_px.abs() < 1e-15);
        assert!((m.x2 - 0.5).abs() < 1e-12);
        assert!((m.p2 - 0.5).abs() < 1e-12);
        let m2 = moments(&psi, 2.0);
        assert!((m2.x2 - 0.25).abs() < 1e-12 && (m2.p2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_oscillator_moments() {
        // displaced oscillator |β⟩ with β = 1 + 0.5i: ⟨x⟩ = √2 Re β, ⟨p⟩ = √2 Im β
        let beta = Complex64::new(1.0, 0.5);
        let size = 60;
        let mut c = DMatrix::zeros(1, size);
        let mut amp = Complex64::new((-beta.norm_sqr() / 2.0).exp(), 0.0);
        for k in 0..size {
            c[(0, k)] = amp;
            amp = amp * beta / ((k + 1) as f64).sqrt();
        }
        let m = moments(&JointState::from_coefficients(c).unwrap(), 1.0);
        assert!((m.x - 2f64.sqrt()).abs() < 1e-12);
        assert!((m.p - 2f64.sqrt() * 0.5).abs() < 1e-12);
        assert!((m.var_x() - 0.5).abs() < 1e-12 && (m.var_p() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn reduced_matrices_of_product_state() {
        let s = SourceState::from_nbar(4.0, DEFAULT_TRUNCATION_EPS).unwrap();
        let psi = JointState::product_ground(&s, 20).unwrap();
        let ro = reduced_oscillator(&psi);
        let rs = reduced_source(&psi);
        assert!((purity(&ro) - 1.0).abs() < 1e-10);
        assert!((purity(&rs) - 1.0).abs() < 1e-10);
        assert!((ro.trace().re - 1.0).abs() < 1e-12);
        assert!((rs.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_trivial_cases() {
        let g = QuadratureGrid::default();
        let b = frequency_branch(&params(0.0), 3);
        assert!((overlap_quadrature(&b, 0, &g) - 1.0).abs() < 1e-10);
        let b = frequency_branch(&params(0.3), 25);
        for l in [1, 3, 17, 41] {
            assert!(overlap_quadrature(&b, l, &g).abs() <= 1e-12);
        }
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let n = 30;
        let pts = 6001;
        let h = 24.0 / (pts - 1) as f64;
        let mut gram = vec![vec![0.0; n + 1]; n + 1];
        for i in 0..pts {
            let y = -12.0 + i as f64 * h;
            let v = hermite_functions(n, y);
            for (row, va) in gram.iter_mut().zip(&v) {
                for (g, vb) in row.iter_mut().zip(&v) {
                    *g += h * va * vb;
                }
            }
        }
        for (a, row) in gram.iter().enumerate() {
            for (b, g) in row.iter().enumerate() {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((g - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn x_oracle_anchors() {
        let p = params(0.3);
        assert!((x_matrix_element_oracle(&p, 25, 24, 0.0, 100).unwrap() - 1.0).norm() < 1e-14);
        assert!((x_matrix_element_oracle(&p, 25, 25, 2.0, 200).unwrap() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn leakage_is_flagged_for_tiny_basis() {
        let p = params(0.3);
        let s = SourceState::from_nbar(25.0, DEFAULT_TRUNCATION_EPS).unwrap();
        let oracle = Oracle::for_source(&p, &s, 20).unwrap();
        let psi0 = JointState::product_ground(&s, 20).unwrap();
        assert!(matches!(oracle.evolve(&psi0, 0.7), Err(Error::BasisLeakage { .. })));
    }
}
