//! Long-format parameter sweep of P₀ over a small μ × n̄ lattice, printed to
//! stdout.
//!
//! ```text
//! cargo run -p qspring --example sweep
//! ```

use qspring::cli::{render_sweep, Observable, SweepSpec};

fn main() -> qspring::Result<()> {
    let mut spec = SweepSpec::new(Observable::Survival, vec![0.0, 0.1, 0.3], vec![4.0, 25.0]);
    spec.tau_max = 2.0;
    spec.points = 5;
    print!("{}", render_sweep(&spec)?);
    Ok(())
}
