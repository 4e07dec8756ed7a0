//! Disentangled SU(1,1) coefficients of one photon sector, and the quarter
//! root Γ₃^{1/4} followed continuously through several oscillation periods.
//!
//! ```text
//! cargo run -p qspring --example su11_coefficients
//! ```

use qspring::backaction::{su11_coefficients, track_quarter_roots, x_matrix_element};
use qspring::SpringParams;

fn main() -> qspring::Result<()> {
    let params = SpringParams::with_mu(0.3)?;
    let n = 25;
    let times: Vec<f64> = (0..=400).map(|k| k as f64 * 0.05).collect();
    let coeffs: Vec<_> = times.iter().map(|&t| su11_coefficients(&params, n, t)).collect();
    let tracked = track_quarter_roots(&coeffs.iter().map(|g| g.big_gamma_3).collect::<Vec<_>>());

    println!("n={n}, mu=0.3");
    println!(
        "{:>6} {:>24} {:>24} {:>24} {:>9}",
        "t", "Gamma+", "Gamma3", "Gamma3^(1/4)", "|track|"
    );
    for k in (0..times.len()).step_by(40) {
        let g = &coeffs[k];
        println!(
            "{:>6.2} {:>24.6} {:>24.6} {:>24.6} {:>9.1e}",
            times[k],
            g.big_gamma_plus,
            g.big_gamma_3,
            g.quarter_root_gamma_3,
            (tracked[k] - g.quarter_root_gamma_3).norm(),
        );
    }

    println!("\nX(n, l) at t=3:");
    for n in [0, 5, 25] {
        let row: Vec<String> = [0, 5, 25]
            .iter()
            .map(|&l| format!("{:>22.6}", x_matrix_element(&params, n, l, 3.0)))
            .collect();
        println!("  n={n:<3}{}", row.join(""));
    }
    Ok(())
}
