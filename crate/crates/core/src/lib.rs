//! Simulation of a quantum optical spring: a harmonic oscillator whose squared
//! frequency is shifted by the photon number of a quantized source,
//!
//! ```text
//! H = p²/2 + ω² (1 + μ a†a) x² / 2        (ħ = m = 1)
//! ```
//!
//! The crate evaluates the closed-form survival probability, quadrature
//! variances and back-action on the source, and carries an independent
//! brute-force propagator in a truncated Fock basis ([`oracle`]) against which
//! every closed form is checked.
//!
//! ```
//! use qspring::{dynamics, SourceState, SpringParams, DEFAULT_TRUNCATION_EPS};
//!
//! let params = SpringParams::with_mu(0.1).unwrap();
//! let source = SourceState::from_nbar(4.0, DEFAULT_TRUNCATION_EPS).unwrap();
//! let p0 = dynamics::survival_probability(&params, &source, 0.0);
//! assert!((p0 - 1.0).abs() < 1e-12);
//! ```

pub mod backaction;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod oracle;

pub use backaction::{BackactionMode, HermitianMatrix};
pub use dynamics::{ComplexSeries, RealSeries};
pub use error::{Error, Result};
pub use model::{
    frequency_branch, overlap_ground, poisson_weights, FrequencyBranch, SourceState, SpringParams, TimeGrid,
    BACKACTION_SCALING, DEFAULT_TRUNCATION_EPS, FIGURE_SCALING,
};
