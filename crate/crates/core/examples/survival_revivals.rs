//! Collapse and revival of the ground-state survival probability P₀(τ) for
//! the two parameter sets of figures 1 and 2.
//!
//! ```text
//! cargo run -p qspring --example survival_revivals
//! ```

use qspring::dynamics::{survival_classical, survival_series};
use qspring::{SourceState, SpringParams, TimeGrid, DEFAULT_TRUNCATION_EPS, FIGURE_SCALING};

fn main() -> qspring::Result<()> {
    for (mu, nbar, tau_max) in [(0.1, 4.0, 20.0), (0.3, 25.0, 30.0)] {
        let params = SpringParams::with_mu(mu)?;
        let source = SourceState::from_nbar(nbar, DEFAULT_TRUNCATION_EPS)?;
        let grid = TimeGrid::uniform(tau_max, 4001, FIGURE_SCALING)?;
        let series = survival_series(&params, &source, &grid)?;
        let tau_rev = (1.0 + mu * nbar).sqrt() / mu;

        println!("mu={mu} nbar={nbar} (photon cut p<={})", source.p_max());
        println!(
            "  P0 range [{:.6}, {:.6}], expected revival near tau={tau_rev:.3}",
            series.min(),
            series.max()
        );

        // coarse envelope: the largest P0 in each unit of tau
        for start in 0..tau_max as usize {
            let top = grid
                .taus()
                .iter()
                .zip(&series.values)
                .filter(|(t, _)| **t >= start as f64 && **t < start as f64 + 1.0)
                .map(|(_, v)| *v)
                .fold(f64::NEG_INFINITY, f64::max);
            let bar = "#".repeat(((top - series.min()) / (1.0 - series.min()) * 50.0) as usize);
            println!("  tau {start:>2}-{:<2} {top:.5} {bar}", start + 1);
        }

        let t = grid.times(params.omega())[100];
        println!(
            "  classical drive at tau={:.3}: P0={:.6}\n",
            grid.taus()[100],
            survival_classical(&params, nbar, t)
        );
    }
    Ok(())
}
