//! Brute-force evolution in a truncated Fock basis, compared sample by sample
//! with the closed forms.
//!
//! ```text
//! cargo run --release -p qspring --example oracle_crosscheck
//! ```

use qspring::backaction::{mean_displacement, source_density};
use qspring::dynamics::{survival_probability, variance_p, variance_x};
use qspring::oracle::{JointState, Oracle};
use qspring::{BackactionMode, SourceState, SpringParams, TimeGrid, DEFAULT_TRUNCATION_EPS, FIGURE_SCALING};

fn main() -> qspring::Result<()> {
    let params = SpringParams::with_mu(0.3)?;
    let source = SourceState::from_nbar(25.0, DEFAULT_TRUNCATION_EPS)?;
    let basis = 400;
    let oracle = Oracle::for_source(&params, &source, basis)?;
    let initial = JointState::product_ground(&source, basis)?;
    let times = TimeGrid::uniform(30.0, 7, FIGURE_SCALING)?.times(params.omega());

    println!(
        "{:>8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "t", "P0", "dP0", "dVx", "dVp", "d<a>", "d rho"
    );
    for s in oracle.snapshots(&initial, &times, true)? {
        let rho = source_density(&params, &source, s.t, None)?;
        println!(
            "{:>8.3} {:>10.6} {:>10.1e} {:>10.1e} {:>10.1e} {:>10.1e} {:>10.1e}",
            s.t,
            s.survival,
            (s.survival - survival_probability(&params, &source, s.t)).abs(),
            (s.var_x - variance_x(&params, &source, s.t)).abs(),
            (s.var_p - variance_p(&params, &source, s.t)).abs(),
            (s.displacement - mean_displacement(&params, &source, s.t, BackactionMode::PartialTrace)).norm(),
            rho.max_abs_diff(s.source_density.as_ref().unwrap()),
        );
    }
    Ok(())
}
