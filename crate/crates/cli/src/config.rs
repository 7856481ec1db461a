//! Run configuration, read from TOML.
//!
//! ```toml
//! scenario = "two-block"
//! n = 2000
//! dt = 1e-3
//! t_end = 3.0
//! output_times = [0.0, 0.64, 1.0, 1.5, 2.0, 3.0]
//!
//! [force]
//! alpha = 0.5
//! t_star = 1.0
//!
//! [integrator]
//! kind = "marching"
//!
//! [output]
//! path = "out/two_block"
//! format = "csv"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    TwoBlock,
    Heterogeneous,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub output_times: Vec<f64>,
    #[serde(default)]
    pub force: ForceConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    pub output: OutputConfig,
    #[serde(default)]
    pub two_block: Option<TwoBlockConfig>,
    #[serde(default)]
    pub heterogeneous: Option<HeterogeneousConfig>,
    #[serde(default)]
    pub custom: Option<CustomConfig>,
    /// Tolerance for the exclusion check; scaled by `M · max|U^free|` (at least 1).
    #[serde(default = "default_exclusion_tol")]
    pub exclusion_tol: f64,
}

fn default_exclusion_tol() -> f64 {
    1e-6
}

/// Force parameters. Which fields apply depends on the scenario; an explicit
/// `phases` table overrides them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceConfig {
    pub alpha: Option<f64>,
    pub t_star: Option<f64>,
    pub center: Option<f64>,
    pub magnitude: Option<f64>,
    pub phases: Option<Vec<PhaseConfig>>,
    pub spring: Option<SpringConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub t_start: f64,
    #[serde(default)]
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpringConfig {
    pub stiffness: f64,
    pub center: f64,
    pub reach: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorKind {
    #[default]
    Marching,
    Picard,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateRuleConfig {
    #[default]
    Incremental,
    FreePath,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default)]
    pub kind: IntegratorKind,
    #[serde(default)]
    pub update_rule: UpdateRuleConfig,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_picard_tol")]
    pub tol: f64,
}

fn default_max_iters() -> usize {
    50
}

fn default_picard_tol() -> f64 {
    1e-10
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            kind: IntegratorKind::default(),
            update_rule: UpdateRuleConfig::default(),
            max_iters: default_max_iters(),
            tol: default_picard_tol(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    JsonLines,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoBlockConfig {
    pub width: f64,
    pub gap: f64,
}

impl Default for TwoBlockConfig {
    fn default() -> Self {
        Self {
            width: 1.0,
            gap: 0.2048,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightingConfig {
    #[default]
    Direct,
    RhoStar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeterogeneousConfig {
    pub lo: f64,
    pub hi: f64,
    pub center: f64,
    pub amplitude: f64,
    pub fill: f64,
    pub weighting: WeightingConfig,
}

impl Default for HeterogeneousConfig {
    fn default() -> Self {
        let d = granular_core::heterogeneous::ConcentrationScenario::default();
        Self {
            lo: d.lo,
            hi: d.hi,
            center: d.center,
            amplitude: d.amplitude,
            fill: d.fill,
            weighting: WeightingConfig::default(),
        }
    }
}

/// A density made of constant pieces and an affine initial velocity `slope·x + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomConfig {
    pub pieces: Vec<PieceConfig>,
    #[serde(default)]
    pub velocity_slope: f64,
    #[serde(default)]
    pub velocity_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceConfig {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive and finite, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!(
                "t_end must be nonnegative and finite, got {}",
                self.t_end
            ));
        }
        if let Some(t) = self
            .output_times
            .iter()
            .find(|t| !(**t >= 0.0 && **t <= self.t_end))
        {
            return bad(format!("output time {t} is outside [0, {}]", self.t_end));
        }
        if !(self.exclusion_tol > 0.0 && self.exclusion_tol.is_finite()) {
            return bad("exclusion_tol must be positive".into());
        }
        if self.integrator.kind == IntegratorKind::Picard
            && (self.integrator.max_iters == 0 || !(self.integrator.tol > 0.0))
        {
            return bad("picard needs max_iters >= 1 and tol > 0".into());
        }
        let f = &self.force;
        for v in [f.alpha, f.t_star, f.center, f.magnitude]
            .into_iter()
            .flatten()
        {
            if !v.is_finite() {
                return bad("force parameters must be finite".into());
            }
        }
        if self.scenario == Scenario::Custom && self.custom.is_none() {
            return bad("scenario \"custom\" needs a [custom] section".into());
        }
        Ok(())
    }

    /// Output times, or just the final time when none are listed.
    pub fn effective_output_times(&self) -> Vec<f64> {
        if self.output_times.is_empty() {
            vec![self.t_end]
        } else {
            self.output_times.clone()
        }
    }
}
