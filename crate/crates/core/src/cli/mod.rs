//! Figure reproduction, parameter sweeps and the validation runner behind
//! the `qspring` binary.
//!
//! Output is CSV: `#`-prefixed metadata lines, then a header (`tau,value` for
//! figures, `mu,nbar,tau,value` for sweeps), then rows with every number
//! written with 17 significant digits. Files are written to a temporary file
//! in the destination directory and renamed into place.

mod csv;
pub mod validate;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::backaction::{mean_displacement_series, BackactionMode};
use crate::dynamics::{self, sample_real, RealSeries};
use crate::error::{Error, Result};
use crate::model::{SourceState, SpringParams, TimeGrid, BACKACTION_SCALING, DEFAULT_TRUNCATION_EPS, FIGURE_SCALING};
use crate::oracle::{DEFAULT_BASIS_SIZE, MAX_BASIS_SIZE, MIN_BASIS_SIZE};

pub use self::csv::{format_number, write_atomic};
pub use self::validate::{cmd_validate, Level, ValidationReport};

/// Number of samples per figure window.
pub const DEFAULT_POINTS: usize = 2001;

/// Quantity written to the `value` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    /// Survival probability of the oscillator ground state.
    Survival,
    SurvivalClassical,
    VarianceX,
    VarianceP,
    VarianceXClassical,
    /// Imaginary part of the source displacement `⟨a⟩`.
    DisplacementIm,
    DisplacementRe,
}

impl Observable {
    pub const ALL: [Observable; 7] = [
        Observable::Survival,
        Observable::SurvivalClassical,
        Observable::VarianceX,
        Observable::VarianceP,
        Observable::VarianceXClassical,
        Observable::DisplacementIm,
        Observable::DisplacementRe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Survival => "p0",
            Observable::SurvivalClassical => "p0-classical",
            Observable::VarianceX => "vx",
            Observable::VarianceP => "vp",
            Observable::VarianceXClassical => "vx-classical",
            Observable::DisplacementIm => "im-d",
            Observable::DisplacementRe => "re-d",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Observable::ALL.into_iter().find(|o| o.name() == s).ok_or_else(|| {
            let names: Vec<_> = Observable::ALL.iter().map(|o| o.name()).collect();
            Error::param(
                "observable",
                format!("unknown `{s}`, expected one of {}", names.join(", ")),
            )
        })
    }
}

/// Parameters of one run. [`RunConfig::figure`] gives the defaults of each
/// figure; [`Overrides`] changes individual fields.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mu: f64,
    pub nbar: f64,
    pub omega: f64,
    pub tau_max: f64,
    pub points: usize,
    /// `ω t = scaling · τ`
    pub scaling: f64,
    pub basis_size: usize,
    pub eps: f64,
    pub out: Option<PathBuf>,
    pub observable: Observable,
    pub mode: BackactionMode,
}

/// Figure defaults: (observable, μ, n̄, τ_max, scaling).
fn figure_defaults(id: u8) -> Option<(Observable, f64, f64, f64, f64)> {
    match id {
        1 => Some((Observable::Survival, 0.1, 4.0, 20.0, FIGURE_SCALING)),
        2 => Some((Observable::Survival, 0.3, 25.0, 30.0, FIGURE_SCALING)),
        3 => Some((Observable::VarianceX, 0.1, 4.0, 20.0, FIGURE_SCALING)),
        4 => Some((Observable::VarianceX, 0.3, 25.0, 30.0, FIGURE_SCALING)),
        5 => Some((Observable::DisplacementIm, 0.3, 25.0, 1.0, BACKACTION_SCALING)),
        _ => None,
    }
}

impl RunConfig {
    pub fn figure(id: u8) -> Result<Self> {
        let (observable, mu, nbar, tau_max, scaling) =
            figure_defaults(id).ok_or_else(|| Error::param("figure", format!("must be 1..=5, got {id}")))?;
        Ok(Self {
            mu,
            nbar,
            omega: 1.0,
            tau_max,
            points: DEFAULT_POINTS,
            scaling,
            basis_size: DEFAULT_BASIS_SIZE,
            eps: DEFAULT_TRUNCATION_EPS,
            out: None,
            observable,
            mode: BackactionMode::PartialTrace,
        })
    }

    pub fn validate(&self) -> Result<()> {
        SpringParams::new(self.mu, self.omega)?;
        if !(self.nbar.is_finite() && self.nbar >= 0.0) {
            return Err(Error::param(
                "nbar",
                format!("must be finite and >= 0, got {}", self.nbar),
            ));
        }
        if !(self.tau_max.is_finite() && self.tau_max > 0.0) {
            return Err(Error::param("tau_max", format!("must be > 0, got {}", self.tau_max)));
        }
        if self.points < 1 {
            return Err(Error::param("points", "must be >= 1"));
        }
        if !(self.scaling.is_finite() && self.scaling > 0.0) {
            return Err(Error::param("scaling", format!("must be > 0, got {}", self.scaling)));
        }
        if !(MIN_BASIS_SIZE..=MAX_BASIS_SIZE).contains(&self.basis_size) {
            return Err(Error::param(
                "basis_size",
                format!(
                    "must lie in [{MIN_BASIS_SIZE}, {MAX_BASIS_SIZE}], got {}",
                    self.basis_size
                ),
            ));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::param("eps", format!("must lie in (0, 1), got {}", self.eps)));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<SpringParams> {
        SpringParams::new(self.mu, self.omega)
    }

    pub fn source(&self) -> Result<SourceState> {
        SourceState::from_nbar(self.nbar, self.eps)
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::uniform(self.tau_max, self.points, self.scaling)
    }
}

/// Optional replacements for [`RunConfig`] fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub mu: Option<f64>,
    pub nbar: Option<f64>,
    pub omega: Option<f64>,
    pub tau_max: Option<f64>,
    pub points: Option<usize>,
    pub scaling: Option<f64>,
    pub basis_size: Option<usize>,
    pub eps: Option<f64>,
    pub out: Option<PathBuf>,
    pub observable: Option<Observable>,
    pub mode: Option<BackactionMode>,
}

impl Overrides {
    /// Applies the overrides and returns the names of the fields that
    /// changed.
    pub fn apply(&self, config: &mut RunConfig) -> Vec<&'static str> {
        let mut changed = Vec::new();
        macro_rules! set {
            ($field:ident) => {
                if let Some(v) = &self.$field {
                    if *v != config.$field {
                        config.$field = v.clone();
                        changed.push(stringify!($field));
                    }
                }
            };
        }
        set!(mu);
        set!(nbar);
        set!(omega);
        set!(tau_max);
        set!(points);
        set!(scaling);
        set!(basis_size);
        set!(eps);
        set!(observable);
        set!(mode);
        if let Some(out) = &self.out {
            config.out = Some(out.clone());
        }
        changed
    }
}

/// Samples `observable` on `grid` using the closed forms.
pub fn evaluate(
    observable: Observable,
    params: &SpringParams,
    source: &SourceState,
    grid: &TimeGrid,
    mode: BackactionMode,
) -> Result<RealSeries> {
    let omega = params.omega();
    let nbar = source.nbar();
    match observable {
        Observable::Survival => dynamics::survival_series(params, source, grid),
        Observable::SurvivalClassical => sample_real(grid, omega, "P0_classical", |t| {
            dynamics::survival_classical(params, nbar, t)
        }),
        Observable::VarianceX => dynamics::variance_x_series(params, source, grid),
        Observable::VarianceP => dynamics::variance_p_series(params, source, grid),
        Observable::VarianceXClassical => sample_real(grid, omega, "Vx_classical", |t| {
            dynamics::variance_x_classical(params, nbar, t)
        }),
        Observable::DisplacementIm => mean_displacement_series(params, source, grid, mode)?.map_real("Im<a>", |d| d.im),
        Observable::DisplacementRe => mean_displacement_series(params, source, grid, mode)?.map_real("Re<a>", |d| d.re),
    }
}

/// A rendered figure: its configuration, the sampled series and the CSV
/// text.
#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub id: u8,
    pub config: RunConfig,
    pub series: RealSeries,
    pub csv: String,
}

/// Renders figure `id` with `overrides` applied, without touching disk.
pub fn render_figure(id: u8, overrides: &Overrides) -> Result<FigureOutput> {
    let mut config = RunConfig::figure(id)?;
    let changed = overrides.apply(&mut config);
    config.validate()?;
    let params = config.params()?;
    let source = config.source()?;
    let series = evaluate(config.observable, &params, &source, &config.grid()?, config.mode)?;

    let mut meta = vec![
        format!("figure={id}"),
        format!("observable={}", config.observable),
        format!("mu={}", config.mu),
        format!("nbar={}", config.nbar),
        format!("omega={}", config.omega),
        format!("tau_max={}", config.tau_max),
        format!("points={}", config.points),
        format!("scaling={}", format_number(config.scaling)),
        format!("eps={:e}", config.eps),
        format!("p_max={}", source.p_max()),
        format!("mode={}", config.mode),
        format!(
            "overridden={}",
            if changed.is_empty() {
                "none".to_string()
            } else {
                changed.join(",")
            }
        ),
    ];
    if matches!(
        config.observable,
        Observable::VarianceX | Observable::VarianceXClassical
    ) {
        meta.push(format!(
            "classical_vx_min={}",
            format_number(dynamics::variance_x_classical_min(&params, config.nbar))
        ));
    }
    let rows = series
        .grid
        .taus()
        .iter()
        .zip(&series.values)
        .map(|(tau, v)| vec![*tau, *v]);
    let csv = csv::render(&meta, &["tau", "value"], rows);
    Ok(FigureOutput {
        id,
        config,
        series,
        csv,
    })
}

/// Renders figure `id` and writes it to `config.out` (default `figN.csv`).
/// Returns the path written.
pub fn cmd_figure(id: u8, overrides: &Overrides) -> Result<(PathBuf, FigureOutput)> {
    let fig = render_figure(id, overrides)?;
    let path = fig
        .config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("fig{id}.csv")));
    write_atomic(&path, fig.csv.as_bytes())?;
    Ok((path, fig))
}

/// A plotting script for a figure CSV written by [`cmd_figure`].
pub fn plot_script(csv_path: &Path, fig: &FigureOutput) -> String {
    let ylabel = match fig.config.observable {
        Observable::Survival | Observable::SurvivalClassical => "P0",
        Observable::VarianceX | Observable::VarianceXClassical => "V_x",
        Observable::VarianceP => "V_p",
        Observable::DisplacementIm => "Im <a>",
        Observable::DisplacementRe => "Re <a>",
    };
    let file = csv_path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let png = Path::new(&file).with_extension("png");
    format!(
        "import numpy as np\n\
         import matplotlib.pyplot as plt\n\
         \n\
         data = np.loadtxt({file:?}, delimiter=\",\", comments=\"#\", skiprows=1)\n\
         plt.plot(data[:, 0], data[:, 1], lw=0.8)\n\
         plt.xlabel(\"tau (omega t = {s} tau)\")\n\
         plt.ylabel({ylabel:?})\n\
         plt.title(\"mu = {mu}, nbar = {nbar}\")\n\
         plt.savefig({png:?}, dpi=150)\n",
        s = fig.config.scaling,
        mu = fig.config.mu,
        nbar = fig.config.nbar,
        png = png.display().to_string(),
    )
}

/// Long-format sweep over every `(μ, n̄)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub observable: Observable,
    pub mus: Vec<f64>,
    pub nbars: Vec<f64>,
    pub omega: f64,
    pub tau_max: f64,
    pub points: usize,
    pub scaling: f64,
    pub eps: f64,
    pub mode: BackactionMode,
}

impl SweepSpec {
    pub fn new(observable: Observable, mus: Vec<f64>, nbars: Vec<f64>) -> Self {
        Self {
            observable,
            mus,
            nbars,
            omega: 1.0,
            tau_max: 20.0,
            points: DEFAULT_POINTS,
            scaling: FIGURE_SCALING,
            eps: DEFAULT_TRUNCATION_EPS,
            mode: BackactionMode::PartialTrace,
        }
    }
}

pub fn render_sweep(spec: &SweepSpec) -> Result<String> {
    if spec.mus.is_empty() {
        return Err(Error::param("mu", "sweep needs at least one value"));
    }
    if spec.nbars.is_empty() {
        return Err(Error::param("nbar", "sweep needs at least one value"));
    }
    let grid = TimeGrid::uniform(spec.tau_max, spec.points, spec.scaling)?;
    let mut rows = Vec::new();
    for &mu in &spec.mus {
        let params = SpringParams::new(mu, spec.omega)?;
        for &nbar in &spec.nbars {
            let source = SourceState::from_nbar(nbar, spec.eps)?;
            let series = evaluate(spec.observable, &params, &source, &grid, spec.mode)?;
            rows.extend(
                grid.taus()
                    .iter()
                    .zip(&series.values)
                    .map(|(tau, v)| vec![mu, nbar, *tau, *v]),
            );
        }
    }
    let meta = vec![
        format!("sweep observable={}", spec.observable),
        format!("omega={}", spec.omega),
        format!("tau_max={}", spec.tau_max),
        format!("points={}", spec.points),
        format!("scaling={}", format_number(spec.scaling)),
        format!("eps={:e}", spec.eps),
        format!("mode={}", spec.mode),
    ];
    Ok(csv::render(&meta, &["mu", "nbar", "tau", "value"], rows.into_iter()))
}

pub fn cmd_sweep(spec: &SweepSpec, out: &Path) -> Result<()> {
    write_atomic(out, render_sweep(spec)?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_rows(csv: &str) -> Vec<Vec<f64>> {
        csv.lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect()
    }

    #[test]
    fn figure_defaults_follow_captions() {
        let f1 = RunConfig::figure(1).unwrap();
        assert_eq!((f1.mu, f1.nbar, f1.observable), (0.1, 4.0, Observable::Survival));
        let f4 = RunConfig::figure(4).unwrap();
        assert_eq!((f4.mu, f4.nbar, f4.observable), (0.3, 25.0, Observable::VarianceX));
        let f5 = RunConfig::figure(5).unwrap();
        assert_eq!(f5.scaling, BACKACTION_SCALING);
        assert_eq!(f5.observable, Observable::DisplacementIm);
        assert!(RunConfig::figure(0).is_err());
        assert!(RunConfig::figure(6).is_err());
    }

    #[test]
    fn invalid_overrides_name_the_field() {
        let o = Overrides {
            mu: Some(-1.0),
            ..Default::default()
        };
        match render_figure(1, &o) {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "mu"),
            other => panic!("unexpected {other:?}"),
        }
        let o = Overrides {
            basis_size: Some(3),
            ..Default::default()
        };
        assert!(matches!(
            render_figure(1, &o),
            Err(Error::InvalidParameter {
                field: "basis_size",
                ..
            })
        ));
    }

    #[test]
    fn figure_csv_layout_and_anchors() {
        let o = Overrides {
            points: Some(101),
            ..Default::default()
        };
        let f1 = render_figure(1, &o).unwrap();
        let header = f1.csv.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, "tau,value");
        assert!(f1.csv.contains("# overridden=points"));
        assert!(f1.csv.contains("# mode=partial-trace"));
        let rows = parse_rows(&f1.csv);
        assert_eq!(rows.len(), 101);
        assert_eq!(rows[0][0], 0.0);
        assert!((rows[0][1] - 1.0).abs() < 1e-12);

        let f5 = render_figure(5, &o).unwrap();
        let rows = parse_rows(&f5.csv);
        assert_eq!(rows[0][1], 0.0);
        assert!(rows.iter().skip(1).all(|r| r[1] != 0.0));
    }

    #[test]
    fn defaults_are_not_reported_as_overrides() {
        let o = Overrides {
            mu: Some(0.1),
            ..Default::default()
        };
        let f = render_figure(1, &Overrides { points: Some(3), ..o }).unwrap();
        assert!(f.csv.contains("# overridden=points\n"));
    }

    #[test]
    fn fig3_stays_above_classical_minimum() {
        let f3 = render_figure(3, &Overrides::default()).unwrap();
        assert!(f3.csv.contains("# classical_vx_min="));
        let min = f3.series.min();
        assert!(min >= 5.0 / 7.0 - 1e-12, "min = {min}");
    }

    #[test]
    fn sweep_matches_figure_and_unmodulated_block() {
        let mut spec = SweepSpec::new(Observable::Survival, vec![0.1], vec![4.0]);
        spec.points = 51;
        let sweep = render_sweep(&spec).unwrap();
        assert!(sweep.lines().any(|l| l == "mu,nbar,tau,value"));
        let fig = render_figure(
            1,
            &Overrides {
                points: Some(51),
                ..Default::default()
            },
        )
        .unwrap();
        let a = parse_rows(&sweep);
        let b = parse_rows(&fig.csv);
        assert_eq!(a.len(), b.len());
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra[2], rb[0]);
            assert_eq!(ra[3], rb[1]);
        }

        let mut spec = SweepSpec::new(Observable::VarianceX, vec![0.0, 0.3], vec![4.0, 25.0]);
        spec.points = 21;
        let rows = parse_rows(&render_sweep(&spec).unwrap());
        assert_eq!(rows.len(), 4 * 21);
        assert!(rows.iter().filter(|r| r[0] == 0.0).all(|r| r[3] == 1.0));
    }

    #[test]
    fn sweep_rejects_empty_lists() {
        assert!(render_sweep(&SweepSpec::new(Observable::Survival, vec![], vec![1.0])).is_err());
        assert!(render_sweep(&SweepSpec::new(Observable::Survival, vec![0.1], vec![])).is_err());
    }

    #[test]
    fn observable_names_round_trip() {
        for o in Observable::ALL {
            assert_eq!(o.name().parse::<Observable>().unwrap(), o);
        }
        assert!("nope".parse::<Observable>().is_err());
    }
}
