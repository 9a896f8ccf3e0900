//! Run configuration: JSON schema, experiment defaults and thread selection.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use heatcount_core::model::{ModelParams, RCParams};
use heatcount_core::quadrature::QuadratureSpec;
use heatcount_core::statistics::{linspace, step_grid, Window};
use heatcount_core::tolerances::DEFAULT_CHI_EPS;
use serde::{Deserialize, Serialize};

pub const THREADS_ENV: &str = "HEATCOUNT_THREADS";
pub const DEFAULT_OUTPUT_DIR: &str = "heatcount-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    BenchmarkDynamics,
    CfScan,
    Moments,
    Ergotropy,
    Distribution,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Self::BenchmarkDynamics,
        Self::CfScan,
        Self::Moments,
        Self::Ergotropy,
        Self::Distribution,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::BenchmarkDynamics => "benchmark-dynamics",
            Self::CfScan => "cf-scan",
            Self::Moments => "moments",
            Self::Ergotropy => "ergotropy",
            Self::Distribution => "distribution",
        }
    }

    fn uses_chi(self) -> bool {
        matches!(self, Self::CfScan | Self::Distribution)
    }

    fn default_grids(self) -> Grids {
        let range = |start, stop, step| Some(GridSpec::range(start, stop, step));
        let chi = Some(GridSpec::points(-3.0, 3.0, 241));
        match self {
            Self::BenchmarkDynamics => Grids {
                t: range(0.0, 300.0, 0.1),
                ..Grids::default()
            },
            Self::CfScan => Grids {
                t: Some(GridSpec::values(vec![1000.0])),
                chi,
                q: None,
            },
            Self::Moments => Grids {
                t: range(0.0, 500.0, 0.5),
                ..Grids::default()
            },
            Self::Ergotropy => Grids {
                t: range(0.0, 300.0, 0.05),
                ..Grids::default()
            },
            Self::Distribution => Grids {
                t: Some(GridSpec::values(vec![1000.0])),
                chi,
                q: Some(GridSpec::points(-1.0, 1.0, 401)),
            },
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A grid given either explicitly (`values`) or as `start`/`stop` with
/// exactly one of `step` or `points`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl GridSpec {
    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        Self {
            start: Some(start),
            stop: Some(stop),
            step: Some(step),
            ..Self::default()
        }
    }

    pub fn points(start: f64, stop: f64, points: usize) -> Self {
        Self {
            start: Some(start),
            stop: Some(stop),
            points: Some(points),
            ..Self::default()
        }
    }

    pub fn values(values: Vec<f64>) -> Self {
        Self {
            values: Some(values),
            ..Self::default()
        }
    }

    pub fn resolve(&self, name: &str) -> anyhow::Result<Vec<f64>> {
        let grid = match (self.values.as_ref(), self.start, self.stop, self.step, self.points) {
            (Some(v), None, None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(h), None) => step_grid(a, b, h)?,
            (None, Some(a), Some(b), None, Some(n)) => {
                if n < 2 && a != b {
                    bail!("grid `{name}`: `points` must be at least 2 for a nonempty range");
                }
                linspace(a, b, n)
            }
            _ => bail!("grid `{name}`: give either `values`, or `start`, `stop` and exactly one of `step`/`points`"),
        };
        if grid.is_empty() {
            bail!("grid `{name}` is empty");
        }
        if let Some(x) = grid.iter().find(|x| !x.is_finite()) {
            bail!("grid `{name}` contains the non-finite value {x}");
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    /// Times (ps).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<GridSpec>,
    /// Counting parameters (eV⁻¹).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<GridSpec>,
    /// Heat values (eV) for the distribution.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<GridSpec>,
}

/// Worker count: a positive integer or `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threads {
    Auto,
    Count(usize),
}

impl Serialize for Threads {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Threads::Auto => s.serialize_str("auto"),
            Threads::Count(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Threads {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(0) => Err(serde::de::Error::custom("threads must be positive")),
            Raw::Count(n) => Ok(Threads::Count(n)),
            Raw::Name(s) if s == "auto" => Ok(Threads::Auto),
            Raw::Name(s) => Err(serde::de::Error::custom(format!(
                "threads must be a positive integer or \"auto\", got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    /// Replaces the mapped reaction-coordinate parameters.
    pub overrides: Option<RCParams>,
    /// When present it must agree with the experiment requested on the
    /// command line.
    pub experiment: Option<Experiment>,
    pub grids: Grids,
    /// eV⁻¹
    pub chi_eps: f64,
    pub output_dir: Option<PathBuf>,
    pub threads: Threads,
    /// Also write an SVG quick-look plot.
    pub svg: bool,
    pub quadrature: QuadratureSpec,
    /// Apodization for the distribution; defaults to a Gaussian of half the
    /// χ range.
    pub window: Option<Window>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelParams::default(),
            overrides: None,
            experiment: None,
            grids: Grids::default(),
            chi_eps: DEFAULT_CHI_EPS,
            output_dir: None,
            threads: Threads::Auto,
            svg: false,
            quadrature: QuadratureSpec::default(),
            window: None,
        }
    }
}

/// Grids after defaults are applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedGrids {
    pub t: Vec<f64>,
    pub chi: Vec<f64>,
    pub q: Vec<f64>,
}

impl RunConfig {
    /// Parses JSON, reporting the failing field path and position.
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                anyhow::anyhow!("{inner}")
            } else {
                anyhow::anyhow!("field `{path}`: {inner}")
            }
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("config {}", path.display()))
    }

    /// Fixes the experiment and fills unset grids with its defaults.
    pub fn for_experiment(mut self, experiment: Experiment) -> anyhow::Result<Self> {
        if let Some(e) = self.experiment {
            if e != experiment {
                bail!("config is for `{e}` but `{experiment}` was requested");
            }
        }
        self.experiment = Some(experiment);
        let d = experiment.default_grids();
        let g = &mut self.grids;
        g.t = g.t.take().or(d.t);
        g.chi = g.chi.take().or(d.chi);
        g.q = g.q.take().or(d.q);
        Ok(self)
    }

    pub fn resolve_grids(&self) -> anyhow::Result<ResolvedGrids> {
        let experiment = self.experiment.context("no experiment selected")?;
        let get = |spec: &Option<GridSpec>, name: &str| -> anyhow::Result<Vec<f64>> {
            match spec {
                Some(s) => s.resolve(name),
                None => Ok(Vec::new()),
            }
        };
        let grids = ResolvedGrids {
            t: get(&self.grids.t, "t")?,
            chi: get(&self.grids.chi, "chi")?,
            q: get(&self.grids.q, "q")?,
        };
        if grids.t.is_empty() {
            bail!("grid `t` is required");
        }
        if grids.t[0] < 0.0 || grids.t.windows(2).any(|w| w[1] < w[0]) {
            bail!("grid `t` must be nonnegative and ascending");
        }
        if experiment.uses_chi() && grids.chi.is_empty() {
            bail!("grid `chi` is required for `{experiment}`");
        }
        if experiment == Experiment::Distribution && grids.q.is_empty() {
            bail!("grid `q` is required for `distribution`");
        }
        Ok(grids)
    }

    pub fn output_dir(&self, cli: Option<&Path>) -> PathBuf {
        cli.map(Path::to_path_buf)
            .or_else(|| self.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }
}

/// `--serial`, then `--threads`, then the config, then `HEATCOUNT_THREADS`,
/// then the number of available cores.
pub fn resolve_threads(serial: bool, cli: Option<usize>, config: Threads, env: Option<&str>) -> anyhow::Result<usize> {
    if serial {
        return Ok(1);
    }
    if let Some(n) = cli {
        if n == 0 {
            bail!("--threads must be positive");
        }
        return Ok(n);
    }
    if let Threads::Count(n) = config {
        return Ok(n);
    }
    if let Some(v) = env {
        let v = v.trim();
        if v != "auto" && !v.is_empty() {
            return match v.parse::<usize>() {
                Ok(n) if n > 0 => Ok(n),
                _ => bail!("{THREADS_ENV} must be a positive integer or \"auto\", got {v:?}"),
            };
        }
    }
    Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
}
