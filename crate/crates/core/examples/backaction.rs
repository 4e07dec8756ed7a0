//! Back-action of the oscillator on the source: Im⟨a⟩(τ) in both modes, the
//! source purity, and the untouched photon-number populations (figure 5).
//!
//! ```text
//! cargo run -p qspring --example backaction
//! ```

use qspring::backaction::{conditional_density, mean_displacement, source_density};
use qspring::{BackactionMode, SourceState, SpringParams, TimeGrid, BACKACTION_SCALING, DEFAULT_TRUNCATION_EPS};

fn main() -> qspring::Result<()> {
    let params = SpringParams::with_mu(0.3)?;
    let source = SourceState::from_nbar(25.0, DEFAULT_TRUNCATION_EPS)?;
    let grid = TimeGrid::uniform(1.0, 11, BACKACTION_SCALING)?;

    println!(
        "{:>5} {:>12} {:>12} {:>10} {:>10} {:>12}",
        "tau", "Im d (trace)", "Im d (cond)", "purity", "cond pur.", "max|dρ_nn|"
    );
    for (tau, t) in grid.taus().iter().zip(grid.times(params.omega())) {
        let rho = source_density(&params, &source, t, None)?;
        let cond = conditional_density(&params, &source, t, None)?;
        let drift = rho
            .diagonal()
            .iter()
            .zip(source.weights())
            .map(|(d, w)| (d - w).abs())
            .fold(0.0, f64::max);
        println!(
            "{tau:>5.2} {:>12.6} {:>12.6} {:>10.6} {:>10.6} {drift:>12.1e}",
            mean_displacement(&params, &source, t, BackactionMode::PartialTrace).im,
            mean_displacement(&params, &source, t, BackactionMode::Conditional).im,
            rho.purity(),
            cond.purity(),
        );
    }
    Ok(())
}
