use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qspring::cli::{self, Level, Observable, Overrides, SweepSpec};
use qspring::BackactionMode;

/// Environment variable overriding the worker thread count.
const THREADS_ENV: &str = "QSPRING_THREADS";

#[derive(Parser)]
#[command(
    name = "qspring",
    version,
    about = "Quantum optical spring: figures, sweeps and validation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce one of the five figures as CSV.
    #[command(allow_negative_numbers = true)]
    Figure {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        figure: u8,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        nbar: Option<f64>,
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        tau_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// ω t = scaling · τ
        #[arg(long)]
        scaling: Option<f64>,
        #[arg(long)]
        basis_size: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        /// partial-trace | conditional
        #[arg(long)]
        mode: Option<BackactionMode>,
        #[arg(long)]
        observable: Option<Observable>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a matplotlib script next to the CSV.
        #[arg(long)]
        plot_script: bool,
    },
    /// Long-format sweep over μ and n̄ lists.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[arg(long, default_value = "p0")]
        observable: Observable,
        #[arg(long, value_delimiter = ',', required = true)]
        mu: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        nbar: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, default_value_t = 20.0)]
        tau_max: f64,
        #[arg(long, default_value_t = cli::DEFAULT_POINTS)]
        points: usize,
        #[arg(long, default_value_t = qspring::FIGURE_SCALING)]
        scaling: f64,
        #[arg(long, default_value_t = qspring::DEFAULT_TRUNCATION_EPS)]
        eps: f64,
        #[arg(long, default_value = "partial-trace")]
        mode: BackactionMode,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
    /// Check every closed form against the brute-force oracle.
    Validate {
        #[arg(long, default_value = "quick")]
        level: Level,
    },
}

fn run(cli: Cli) -> qspring::Result<bool> {
    match cli.command {
        Command::Figure {
            figure,
            mu,
            nbar,
            omega,
            tau_max,
            points,
            scaling,
            basis_size,
            eps,
            mode,
            observable,
            out,
            plot_script,
        } => {
            let overrides = Overrides {
                mu,
                nbar,
                omega,
                tau_max,
                points,
                scaling,
                basis_size,
                eps,
                out,
                observable,
                mode,
            };
            let (path, fig) = cli::cmd_figure(figure, &overrides)?;
            println!("wrote {}", path.display());
            if plot_script {
                let script = path.with_extension("py");
                cli::write_atomic(&script, cli::plot_script(&path, &fig).as_bytes())?;
                println!("wrote {}", script.display());
            }
            Ok(true)
        }
        Command::Sweep {
            observable,
            mu,
            nbar,
            omega,
            tau_max,
            points,
            scaling,
            eps,
            mode,
            out,
        } => {
            let spec = SweepSpec {
                observable,
                mus: mu,
                nbars: nbar,
                omega,
                tau_max,
                points,
                scaling,
                eps,
                mode,
            };
            cli::cmd_sweep(&spec, &out)?;
            println!("wrote {}", out.display());
            Ok(true)
        }
        Command::Validate { level } => {
            let report = cli::cmd_validate(level)?;
            print!("{}", report.render());
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
