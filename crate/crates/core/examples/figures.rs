//! Writes all five figure CSVs and their plotting scripts into a directory
//! (default `figures/`), the same files the `qspring figure` command emits.
//!
//! ```text
//! cargo run -p qspring --example figures -- out_dir
//! ```

use std::path::PathBuf;

use qspring::cli::{cmd_figure, plot_script, write_atomic, Overrides};

fn main() -> qspring::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    std::fs::create_dir_all(&dir)?;
    for id in 1..=5 {
        let overrides = Overrides {
            out: Some(dir.join(format!("fig{id}.csv"))),
            ..Overrides::default()
        };
        let (path, fig) = cmd_figure(id, &overrides)?;
        let script = path.with_extension("py");
        write_atomic(&script, plot_script(&path, &fig).as_bytes())?;
        println!(
            "fig{id}: {} ({} rows, range [{:.4}, {:.4}])",
            path.display(),
            fig.series.values.len(),
            fig.series.min(),
            fig.series.max()
        );
    }
    Ok(())
}
