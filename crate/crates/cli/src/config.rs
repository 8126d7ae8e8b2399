//! Experiment configuration: one JSON file, unknown fields rejected,
//! defaults resolved at load time.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use svogs_core::hardinstances::HardKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: at `{field}`: {message}")]
    Schema { path: PathBuf, field: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub algorithm: AlgorithmSpec,
    /// Number of nodes, server included.
    pub n: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub stopping: StoppingSpec,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<MetricName>,
    #[serde(default = "default_cadence")]
    pub cadence: u64,
    /// Step of the gradient mapping; `1/L` when absent.
    #[serde(default)]
    pub tau: Option<f64>,
    /// Overrides for the estimated or declared constants.
    #[serde(default)]
    pub constants: ConstantsOverride,
    #[serde(default = "default_true")]
    pub cache: bool,
    /// Output directory for traces and metadata.
    pub output: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    RobustRegression(RegressionSpec),
    HardInstance(HardSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionSpec {
    /// LIBSVM file; exclusive with `synthetic`.
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Feature dimension override for `path`.
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub synthetic: Option<SyntheticSource>,
    pub variant: VariantSpec,
    #[serde(default)]
    pub partition_seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSource {
    pub rows: usize,
    pub dim: usize,
    #[serde(default = "one")]
    pub mean_norm: f64,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum VariantSpec {
    Constrained {
        #[serde(default = "default_r_x")]
        r_x: f64,
        #[serde(default = "default_r_y")]
        r_y: f64,
    },
    Regularized { lambda: f64, beta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardSpec {
    pub kind: String,
    pub d: usize,
    pub delta: f64,
    #[serde(default)]
    pub mu: f64,
    pub l: f64,
    /// Ball radius of both blocks for the convex-concave kinds.
    #[serde(default = "one")]
    pub r: f64,
}

impl HardSpec {
    pub fn kind(&self) -> Result<HardKind, ConfigError> {
        HardKind::parse(&self.kind).ok_or_else(|| invalid(format!("unknown hard instance kind `{}`", self.kind)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    Svogs(SvogsSpec),
    Eg {
        #[serde(default)]
        eta: Option<f64>,
    },
    Ogs {
        #[serde(default)]
        eta: Option<f64>,
        #[serde(default = "default_inner_eps")]
        eps: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SvogsSpec {
    /// Target accuracy `eps` of the convex-concave rule.
    AutoCc { eps: f64 },
    /// `r0` bounds `||z^0 - z*||`; computed from a reference solution when absent.
    AutoScsc {
        #[serde(default)]
        r0: Option<f64>,
    },
    Explicit { eta: f64, gamma: f64, p: f64, b: usize, alpha: f64, eps: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StoppingSpec {
    Rounds(u64),
    Threshold { metric: MetricName, value: f64, max_rounds: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    GradMapping,
    Gap,
    Distance,
    DistanceSq,
    Lyapunov,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsOverride {
    #[serde(default)]
    pub l: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_metrics() -> Vec<MetricName> {
    vec![MetricName::GradMapping]
}

fn default_cadence() -> u64 {
    1
}

fn default_true() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

fn default_r_x() -> f64 {
    2.0
}

fn default_r_y() -> f64 {
    0.05
}

fn default_inner_eps() -> f64 {
    1e-10
}

impl ExperimentConfig {
    /// Parses JSON text; relative paths stay as written.
    pub fn from_json(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Schema {
            path: origin.to_path_buf(),
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    /// Checks value ranges and that referenced files exist.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 {
            return Err(invalid("n must be positive"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds must not be empty"));
        }
        if self.cadence == 0 {
            return Err(invalid("cadence must be positive"));
        }
        if self.metrics.is_empty() {
            return Err(invalid("metrics must not be empty"));
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.seeds.len() {
            return Err(invalid("seeds must be distinct"));
        }
        match &self.problem {
            ProblemSpec::RobustRegression(r) => match (&r.path, &r.synthetic) {
                (Some(p), None) => {
                    if !p.is_file() {
                        return Err(invalid(format!("data file {} does not exist", p.display())));
                    }
                }
                (None, Some(_)) => {}
                _ => return Err(invalid("robust_regression needs exactly one of `path` and `synthetic`")),
            },
            ProblemSpec::HardInstance(h) => {
                h.kind()?;
            }
        }
        if let Some(tau) = self.tau {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(invalid("tau must be positive"));
            }
        }
        Ok(())
    }

    /// Resolves relative paths against `base`.
    pub fn rebase(&mut self, base: &Path) {
        if let ProblemSpec::RobustRegression(r) = &mut self.problem {
            if let Some(p) = &mut r.path {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        if self.output.is_relative() {
            self.output = base.join(&self.output);
        }
    }
}

/// Reads, rebases relative paths on the config's directory and validates.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    let mut cfg = ExperimentConfig::from_json(&text, path)?;
    cfg.rebase(path.parent().unwrap_or(Path::new(".")));
    cfg.validate()?;
    Ok(cfg)
}
