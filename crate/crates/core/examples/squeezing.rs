//! Quadrature squeezing V_x(τ) < 1 against the classical-drive minimum
//! 1 − μn̄/(1+μn̄), as in figures 3 and 4.
//!
//! ```text
//! cargo run -p qspring --example squeezing
//! ```

use qspring::dynamics::{variance_p, variance_x_classical_min, variance_x_series};
use qspring::{SourceState, SpringParams, TimeGrid, DEFAULT_TRUNCATION_EPS, FIGURE_SCALING};

fn main() -> qspring::Result<()> {
    for (mu, nbar, tau_max) in [(0.1, 4.0, 20.0), (0.3, 25.0, 30.0)] {
        let params = SpringParams::with_mu(mu)?;
        let source = SourceState::from_nbar(nbar, DEFAULT_TRUNCATION_EPS)?;
        let grid = TimeGrid::uniform(tau_max, 2001, FIGURE_SCALING)?;
        let vx = variance_x_series(&params, &source, &grid)?;

        let times = grid.times(params.omega());
        let (i, _) = vx.values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let product = vx.values[i] * variance_p(&params, &source, times[i]);

        println!("mu={mu} nbar={nbar}");
        println!(
            "  quantum   min Vx = {:.6} at tau={:.3} (Vx*Vp there = {product:.4})",
            vx.values[i],
            grid.taus()[i]
        );
        println!("  classical min Vx = {:.6}", variance_x_classical_min(&params, nbar));
        println!("  max Vx = {:.12}", vx.max());
    }
    Ok(())
}
