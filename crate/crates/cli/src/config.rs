//! Run configuration: one JSON document holding the model, numerical
//! settings, simulation settings, and the optional sweep and probe setup.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tsagg_core::analysis::QuadratureSettings;
use tsagg_core::model::{db_to_linear, enumerate_combinations};
use tsagg_core::simulator::SimSettings;
use tsagg_core::{
    validate_inputs, zipf_popularity, CacheDesign, Model, NetworkConfig, Popularity, SchemeConfig, Violation,
};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PopularitySpec {
    Zipf { gamma: f64 },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseEntry {
    /// One-based file indices.
    pub members: Vec<usize>,
    pub probability: f64,
}

/// Caching distribution over `K`-file combinations: either one probability
/// per combination in lexicographic order, or a list of the combinations
/// with non-zero probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CachingSpec {
    Dense(Vec<f64>),
    Sparse(Vec<SparseEntry>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Theta,
    PeriodT,
    LambdaU,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Theta => "theta",
            SweepAxis::PeriodT => "period_t",
            SweepAxis::LambdaU => "lambda_u",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "theta" => Ok(SweepAxis::Theta),
            "period_t" | "T" | "t" => Ok(SweepAxis::PeriodT),
            "lambda_u" => Ok(SweepAxis::LambdaU),
            _ => Err(format!(
                "unknown sweep axis {s:?} (expected theta, period_t or lambda_u)"
            )),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values {
        values: Vec<f64>,
    },
    Range {
        start: f64,
        stop: f64,
        points: usize,
        #[serde(default)]
        log: bool,
    },
}

impl Grid {
    /// Default rate grid: 20 log-spaced points in [1e5, 1e7] bit/s.
    pub fn default_theta() -> Self {
        Grid::Range {
            start: 1e5,
            stop: 1e7,
            points: 20,
            log: true,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match *self {
            Grid::Values { ref values } => values.clone(),
            Grid::Range {
                start,
                stop,
                points,
                log,
            } => {
                if points == 1 {
                    return vec![start];
                }
                (0..points)
                    .map(|i| {
                        let s = i as f64 / (points - 1) as f64;
                        if i == 0 {
                            start
                        } else if i == points - 1 {
                            stop
                        } else if log {
                            (start.ln() + s * (stop.ln() - start.ln())).exp()
                        } else {
                            start + s * (stop - start)
                        }
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    #[serde(flatten)]
    pub grid: Grid,
}

impl SweepSpec {
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if let Grid::Range {
            start,
            stop,
            points,
            log,
        } = self.grid
        {
            if points == 0 {
                v.push(Violation::new("sweep.points", "points >= 1"));
            }
            if log && !(start > 0.0 && stop > 0.0) {
                v.push(Violation::new("sweep", "log grid needs positive endpoints"));
            }
        }
        let values = self.grid.values();
        if values.is_empty() {
            v.push(Violation::new("sweep", "grid has at least one point"));
        }
        if values.iter().any(|x| !x.is_finite()) {
            v.push(Violation::new("sweep", "grid values are finite"));
        }
        let up = values.windows(2).all(|w| w[1] > w[0]);
        let down = values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            v.push(Violation::new("sweep", "grid is strictly monotone"));
        }
        if self.axis == SweepAxis::PeriodT
            && values
                .iter()
                .any(|&x| x < 1.0 || x.fract() != 0.0 || x > u32::MAX as f64)
        {
            v.push(Violation::new("sweep", "period_t grid holds positive integers"));
        }
        v
    }
}

/// Parses `AXIS:START:STOP:POINTS[:log]`.
impl FromStr for SweepSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(format!("sweep {s:?} is not AXIS:START:STOP:POINTS[:log]"));
        }
        let num = |x: &str| x.parse::<f64>().map_err(|e| format!("sweep value {x:?}: {e}"));
        let log = match parts.get(4) {
            None | Some(&"lin") => false,
            Some(&"log") => true,
            Some(other) => return Err(format!("sweep spacing {other:?} (expected log or lin)")),
        };
        Ok(SweepSpec {
            axis: parts[0].parse()?,
            grid: Grid::Range {
                start: num(parts[1])?,
                stop: num(parts[2])?,
                points: parts[3]
                    .parse()
                    .map_err(|e| format!("sweep points {:?}: {e}", parts[3]))?,
                log,
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    LargeT,
    Dense,
    Sparse,
    Synthetic,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::LargeT => "large-t",
            Regime::Dense => "dense",
            Regime::Sparse => "sparse",
            Regime::Synthetic => "synthetic",
        }
    }

    pub fn default_schedule(self) -> Vec<f64> {
        match self {
            Regime::LargeT => vec![8.0, 16.0, 32.0, 64.0],
            Regime::Dense => vec![1.0, 2.0, 4.0],
            Regime::Sparse => vec![4e-3, 2e-3, 1e-3],
            Regime::Synthetic => vec![4.0, 8.0, 16.0, 32.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSpec {
    pub regime: Regime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: Format,
    /// JSON-lines file receiving the snapshots of the first `dump_trials`
    /// trials of a simulation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario_dump: Option<PathBuf>,
    pub dump_trials: u64,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            path: None,
            format: Format::Csv,
            scenario_dump: None,
            dump_trials: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lambda_b: f64,
    pub lambda_u: f64,
    pub alpha: f64,
    pub bandwidth_w: f64,
    pub snr_ratio_db: f64,
    pub n_files: usize,
    pub cache_size: usize,
    pub popularity: PopularitySpec,
    pub caching: CachingSpec,
    pub period_t: u32,
    pub rate_theta: f64,
    #[serde(default)]
    pub quadrature: QuadratureSettings,
    #[serde(default)]
    pub simulation: SimSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asymptotic: Option<AsymptoticSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Reference parameter set: `λ_b = 0.01`, `λ_u = 0.1`, `N = 5`, `K = 4`,
    /// `W = 10 MHz`, `α = 4`, 30 dB, Zipf `γ = 2`, `T = 2`.
    pub fn reference() -> Self {
        RunConfig {
            lambda_b: 0.01,
            lambda_u: 0.1,
            alpha: 4.0,
            bandwidth_w: 1e7,
            snr_ratio_db: 30.0,
            n_files: 5,
            cache_size: 4,
            popularity: PopularitySpec::Zipf { gamma: 2.0 },
            caching: CachingSpec::Dense(vec![0.7, 0.2, 0.06, 0.02, 0.02]),
            period_t: 2,
            rate_theta: 1e6,
            quadrature: QuadratureSettings::default(),
            simulation: SimSettings::default(),
            sweep: None,
            asymptotic: None,
            output: OutputSpec::default(),
        }
    }

    fn popularity(&self) -> Result<Popularity> {
        match &self.popularity {
            PopularitySpec::Zipf { gamma } => {
                zipf_popularity(self.n_files, *gamma).map_err(CliError::core("popularity"))
            }
            PopularitySpec::Explicit(a) => Ok(Popularity::new(a.clone())),
        }
    }

    fn design(&self) -> Result<CacheDesign> {
        match &self.caching {
            CachingSpec::Dense(p) => {
                let combos =
                    enumerate_combinations(self.n_files, self.cache_size).map_err(CliError::core("caching"))?;
                CacheDesign::dense(&combos, p).map_err(CliError::core("caching"))
            }
            CachingSpec::Sparse(entries) => {
                let mut list = Vec::with_capacity(entries.len());
                for e in entries {
                    if e.members.contains(&0) {
                        return Err(CliError::Config("caching: file indices are one-based".into()));
                    }
                    list.push((e.members.iter().map(|m| m - 1).collect(), e.probability));
                }
                CacheDesign::sparse(self.n_files, self.cache_size, list).map_err(CliError::core("caching"))
            }
        }
    }

    /// Builds and validates the model; dB inputs are converted here.
    pub fn model(&self) -> Result<Model> {
        let net = NetworkConfig {
            lambda_b: self.lambda_b,
            lambda_u: self.lambda_u,
            alpha: self.alpha,
            bandwidth_w: self.bandwidth_w,
            snr_ratio: db_to_linear(self.snr_ratio_db),
        };
        let scheme = SchemeConfig {
            period_t: self.period_t,
            rate_theta: self.rate_theta,
        };
        let model =
            validate_inputs(net, self.popularity()?, self.design()?, scheme).map_err(CliError::core("model"))?;
        let mut v = self.quadrature.validate();
        if self.simulation.trials < 1 {
            v.push(Violation::new("simulation.trials", "trials >= 1"));
        }
        if let Some(s) = &self.sweep {
            v.extend(s.validate());
        }
        if v.is_empty() {
            Ok(model)
        } else {
            Err(CliError::Core {
                context: "config",
                source: tsagg_core::Error::Validation(v),
            })
        }
    }
}
