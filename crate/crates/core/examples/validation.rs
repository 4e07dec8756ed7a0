//! Runs the quick oracle validation suite and prints its report.
//!
//! ```text
//! cargo run -p qspring --example validation
//! ```

use qspring::cli::{cmd_validate, Level};

fn main() -> qspring::Result<()> {
    let report = cmd_validate(Level::Quick)?;
    print!("{}", report.render());
    if !report.passed() {
        std::process::exit(1);
    }
    Ok(())
}
