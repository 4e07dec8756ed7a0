//! Self-check of the closed forms against the oracle, driven by
//! `qspring validate`.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;

use crate::backaction::{mean_displacement, source_density, x_matrix_element, BackactionMode};
use crate::dynamics::{amplitude_a, survival_probability, variance_p, variance_x};
use crate::error::{Error, Result};
use crate::model::{
    even_overlaps, frequency_branch, overlap_ground, SourceState, SpringParams, TimeGrid, BACKACTION_SCALING,
    DEFAULT_TRUNCATION_EPS, FIGURE_SCALING,
};
use crate::oracle::{build_block, overlap_quadrature, x_matrix_element_oracle, JointState, Oracle, QuadratureGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// μ = 0 smoke set plus the (μ = 0.1, n̄ = 4) parameters at L = 200.
    Quick,
    /// Adds (μ = 0.3, n̄ = 25), the full X lattice and the L = 400 → 800
    /// convergence check.
    Full,
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(Error::param(
                "level",
                format!("expected `quick` or `full`, got `{other}`"),
            )),
        }
    }
}

/// One comparison: the measured error and the bound it must not exceed.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.measured <= self.tolerance
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub level: Level,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = if c.passed() { "PASS" } else { "FAIL" };
            writeln!(
                out,
                "[{tag}] {:<58} error {:.3e}  tol {:.1e}",
                c.name, c.measured, c.tolerance
            )
            .unwrap();
        }
        let failed = self.failures().count();
        writeln!(
            out,
            "{} checks, {} failed ({:.1} s)",
            self.checks.len(),
            failed,
            self.seconds
        )
        .unwrap();
        out
    }
}

fn max_over<T>(items: impl IntoIterator<Item = T>, f: impl Fn(T) -> f64) -> f64 {
    items.into_iter().map(f).fold(0.0, f64::max)
}

/// `⟨a⟩` weights the truncated tail by `√n`, so exact anchors on it need a
/// tighter cut than the default mass budget.
pub const ANCHOR_EPS: f64 = 1e-14;

fn setup(mu: f64, nbar: f64) -> Result<(SpringParams, SourceState)> {
    Ok((
        SpringParams::with_mu(mu)?,
        SourceState::from_nbar(nbar, DEFAULT_TRUNCATION_EPS)?,
    ))
}

fn setup_anchor(mu: f64, nbar: f64) -> Result<(SpringParams, SourceState)> {
    Ok((SpringParams::with_mu(mu)?, SourceState::from_nbar(nbar, ANCHOR_EPS)?))
}

fn smoke_checks(checks: &mut Vec<Check>) -> Result<()> {
    let (params, source) = setup_anchor(0.0, 4.0)?;
    let grid = TimeGrid::uniform(20.0, 200, FIGURE_SCALING)?;
    let times = grid.times(params.omega());
    let alpha = source.alpha();
    let err = max_over(&times, |&t| {
        [
            (survival_probability(&params, &source, t) - 1.0).abs(),
            (variance_x(&params, &source, t) - 1.0).abs(),
            (variance_p(&params, &source, t) - 1.0).abs(),
            (mean_displacement(&params, &source, t, BackactionMode::PartialTrace) - alpha).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    });
    checks.push(Check::new("mu=0: P0, Vx, Vp, <a> constant", err, 1e-12));
    Ok(())
}

fn anchor_checks(checks: &mut Vec<Check>, mu: f64, nbar: f64) -> Result<()> {
    let (params, source) = setup_anchor(mu, nbar)?;
    let err = [
        (survival_probability(&params, &source, 0.0) - 1.0).abs(),
        (variance_x(&params, &source, 0.0) - 1.0).abs(),
        (variance_p(&params, &source, 0.0) - 1.0).abs(),
        (mean_displacement(&params, &source, 0.0, BackactionMode::PartialTrace) - source.alpha()).norm(),
        (x_matrix_element(&params, 3, 7, 0.0) - 1.0).norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    checks.push(Check::new(format!("t=0 anchors (mu={mu}, nbar={nbar})"), err, 1e-12));
    Ok(())
}

fn overlap_checks(checks: &mut Vec<Check>, mu: f64, photons: &[usize], l_max: usize) -> Result<()> {
    let params = SpringParams::with_mu(mu)?;
    let times: Vec<f64> = (0..50).map(|k| 0.37 * k as f64).collect();
    let mut spectral = 0.0f64;
    let mut completeness = 0.0f64;
    let mut quadrature = 0.0f64;
    let grid = QuadratureGrid::default();
    for &p in photons {
        let b = frequency_branch(&params, p);
        let ov = even_overlaps(&b, 200);
        completeness = completeness.max((ov.iter().map(|v| v * v).sum::<f64>() - 1.0).abs());
        for &t in &times {
            let sum: Complex64 = ov
                .iter()
                .enumerate()
                .map(|(m, o)| Complex64::from_polar(o * o, -2.0 * b.omega_p * t * m as f64))
                .sum();
            spectral = spectral.max((sum - amplitude_a(&b, t)).norm());
        }
        for l in 0..=l_max {
            quadrature = quadrature.max((overlap_quadrature(&b, l, &grid) - overlap_ground(&b, l)).abs());
        }
    }
    checks.push(Check::new(
        format!("A_p closed form vs spectral sum (mu={mu})"),
        spectral,
        1e-10,
    ));
    checks.push(Check::new(
        format!("overlap completeness, M=200 (mu={mu})"),
        completeness,
        1e-10,
    ));
    checks.push(Check::new(
        format!("overlaps vs quadrature, l<={l_max} (mu={mu})"),
        quadrature,
        1e-10,
    ));
    Ok(())
}

fn spectrum_check(checks: &mut Vec<Check>, mu: f64, photons: &[usize], basis: usize) -> Result<()> {
    let params = SpringParams::with_mu(mu)?;
    let mut worst = 0.0f64;
    for &p in photons {
        let b = build_block(&params, p, basis)?;
        let w = frequency_branch(&params, p).omega_p;
        for (n, e) in b.eigenvalues().iter().take(50).enumerate() {
            let exact = w * (n as f64 + 0.5);
            worst = worst.max(((e - exact) / exact).abs());
        }
    }
    checks.push(Check::new(
        format!("block spectrum, lowest 50 (mu={mu}, L={basis})"),
        worst,
        1e-9,
    ));
    Ok(())
}

/// Closed forms against oracle snapshots on `grid`; the source density is
/// compared at every `density_stride`-th sample.
fn oracle_checks(
    checks: &mut Vec<Check>,
    mu: f64,
    nbar: f64,
    grid: &TimeGrid,
    basis: usize,
    density_stride: usize,
    label: &str,
) -> Result<()> {
    let (params, source) = setup(mu, nbar)?;
    let oracle = Oracle::for_source(&params, &source, basis)?;
    let initial = JointState::product_ground(&source, basis)?;
    let times = grid.times(params.omega());
    let snaps = oracle.snapshots(&initial, &times, false)?;
    let tag = format!("{label} (mu={mu}, nbar={nbar}, L={basis})");
    checks.push(Check::new(
        format!("oracle P0 {tag}"),
        max_over(&snaps, |s| {
            (s.survival - survival_probability(&params, &source, s.t)).abs()
        }),
        1e-8,
    ));
    checks.push(Check::new(
        format!("oracle Vx {tag}"),
        max_over(&snaps, |s| (s.var_x - variance_x(&params, &source, s.t)).abs()),
        1e-8,
    ));
    checks.push(Check::new(
        format!("oracle Vp {tag}"),
        max_over(&snaps, |s| (s.var_p - variance_p(&params, &source, s.t)).abs()),
        1e-8,
    ));
    checks.push(Check::new(
        format!("oracle Im<a> {tag}"),
        max_over(&snaps, |s| {
            (s.displacement.im - mean_displacement(&params, &source, s.t, BackactionMode::PartialTrace).im).abs()
        }),
        1e-8,
    ));
    checks.push(Check::new(
        format!("oracle basis leakage {tag}"),
        max_over(&snaps, |s| s.leakage),
        crate::oracle::LEAKAGE_THRESHOLD,
    ));
    let sparse: Vec<f64> = times.iter().copied().step_by(density_stride.max(1)).collect();
    let dens = oracle.snapshots(&initial, &sparse, true)?;
    let mut worst = 0.0f64;
    for s in &dens {
        let closed = source_density(&params, &source, s.t, None)?;
        worst = worst.max(closed.max_abs_diff(s.source_density.as_ref().expect("kept")));
    }
    checks.push(Check::new(format!("oracle rho_source {tag}"), worst, 1e-8));
    Ok(())
}

fn x_lattice_check(checks: &mut Vec<Check>, mu: f64, indices: &[usize], wts: &[f64], basis: usize) -> Result<()> {
    let params = SpringParams::with_mu(mu)?;
    let mut worst = 0.0f64;
    for &n in indices {
        for &l in indices {
            for &t in wts {
                let brute = x_matrix_element_oracle(&params, n, l, t, basis)?;
                worst = worst.max((brute - x_matrix_element(&params, n, l, t)).norm());
            }
        }
    }
    checks.push(Check::new(
        format!("X(n,l) lattice {indices:?} x wt {wts:?} (mu={mu}, L={basis})"),
        worst,
        1e-8,
    ));
    Ok(())
}

fn convergence_check(checks: &mut Vec<Check>, mu: f64, nbar: f64, grid: &TimeGrid, basis: usize) -> Result<()> {
    let (params, source) = setup(mu, nbar)?;
    let times = grid.times(params.omega());
    let run = |l: usize| -> Result<Vec<crate::oracle::Snapshot>> {
        let oracle = Oracle::for_source(&params, &source, l)?;
        oracle.snapshots(&JointState::product_ground(&source, l)?, &times, false)
    };
    let a = run(basis)?;
    let b = run(2 * basis)?;
    let worst = max_over(a.iter().zip(&b), |(x, y)| {
        [
            (x.survival - y.survival).abs(),
            (x.var_x - y.var_x).abs(),
            (x.var_p - y.var_p).abs(),
            (x.displacement - y.displacement).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    });
    checks.push(Check::new(
        format!("oracle L={basis} vs L={} (mu={mu}, nbar={nbar})", 2 * basis),
        worst,
        1e-9,
    ));
    Ok(())
}

pub fn cmd_validate(level: Level) -> Result<ValidationReport> {
    let start = Instant::now();
    let mut checks = Vec::new();
    smoke_checks(&mut checks)?;
    anchor_checks(&mut checks, 0.1, 4.0)?;
    match level {
        Level::Quick => {
            overlap_checks(&mut checks, 0.1, &[0, 1, 4, 25], 40)?;
            spectrum_check(&mut checks, 0.1, &[4], 200)?;
            let grid = TimeGrid::uniform(20.0, 201, FIGURE_SCALING)?;
            oracle_checks(&mut checks, 0.1, 4.0, &grid, 200, 10, "fig1 window")?;
            x_lattice_check(&mut checks, 0.1, &[0, 1, 5], &[0.5, 2.0], 200)?;
        }
        Level::Full => {
            anchor_checks(&mut checks, 0.3, 25.0)?;
            for mu in [0.1, 0.3] {
                overlap_checks(&mut checks, mu, &[0, 1, 4, 25, 60], 80)?;
            }
            spectrum_check(&mut checks, 0.1, &[4, 25], 400)?;
            spectrum_check(&mut checks, 0.3, &[25, 68], 400)?;
            let fig1 = TimeGrid::uniform(20.0, 2001, FIGURE_SCALING)?;
            let fig2 = TimeGrid::uniform(30.0, 2001, FIGURE_SCALING)?;
            let fig5 = TimeGrid::uniform(1.0, 2001, BACKACTION_SCALING)?;
            oracle_checks(&mut checks, 0.1, 4.0, &fig1, 400, 20, "fig1/3 window")?;
            oracle_checks(&mut checks, 0.3, 25.0, &fig2, 400, 20, "fig2/4 window")?;
            oracle_checks(&mut checks, 0.3, 25.0, &fig5, 400, 20, "fig5 window")?;
            x_lattice_check(&mut checks, 0.3, &[0, 1, 5, 24, 25, 60], &[0.5, 2.0, 10.0, 50.0], 400)?;
            let coarse = TimeGrid::uniform(30.0, 41, FIGURE_SCALING)?;
            convergence_check(&mut checks, 0.3, 25.0, &coarse, 400)?;
        }
    }
    Ok(ValidationReport {
        level,
        checks,
        seconds: start.elapsed().as_secs_f64(),
    })
}
