//! Run configuration, read from sectioned `key = value` text (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensemble::PhysicalParams;
use crate::error::{ConfigError, Error, Result};
use crate::full::SplitStepConfig;
use crate::geometry::Vec2;
use crate::limit::IntegratorConfig;
use crate::stepping;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IcKind {
    GaussianBump,
    CosineBump,
    TwoStream,
}

/// Initial density `f_in`: a product of compactly supported bumps in each
/// phase-space coordinate. For `TwoStream` the velocity factor is the sum
/// of two bumps centred at `±center_v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    pub kind: IcKind,
    #[serde(default)]
    pub center_x: Vec2,
    #[serde(default)]
    pub center_v: Vec2,
    pub radius_x: f64,
    pub radius_v: f64,
    pub total_mass: f64,
}

impl InitialCondition {
    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        if !(self.radius_x.is_finite() && self.radius_x > 0.0) {
            return Err(ConfigError::RadiusX(self.radius_x));
        }
        if !(self.radius_v.is_finite() && self.radius_v > 0.0) {
            return Err(ConfigError::RadiusV(self.radius_v));
        }
        if !(self.total_mass.is_finite() && self.total_mass > 0.0) {
            return Err(ConfigError::TotalMass(self.total_mass));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Markers at cell centres.
    #[default]
    Grid,
    /// Markers displaced uniformly within their cells, seeded by `run.seed`.
    Jittered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    /// Cells per position coordinate, and per velocity coordinate unless
    /// `n_per_dim_v` is given.
    pub n_per_dim: usize,
    #[serde(default)]
    pub n_per_dim_v: Option<usize>,
    #[serde(default)]
    pub mode: SamplingMode,
}

impl SamplingConfig {
    pub fn cells_v(&self) -> usize {
        self.n_per_dim_v.unwrap_or(self.n_per_dim)
    }

    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        if self.n_per_dim < 2 {
            return Err(ConfigError::NPerDim(self.n_per_dim));
        }
        if let Some(n) = self.n_per_dim_v {
            if n < 1 {
                return Err(ConfigError::NPerDimV(n));
            }
        }
        Ok(())
    }
}

/// `[split]` section. Without `dt` the step is derived from `ε`: the
/// largest step dividing `snapshot_every` that resolves the fast period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub dt: Option<f64>,
    pub substeps_per_cyclotron_period: u32,
    pub field_enabled: bool,
}

impl Default for SplitSection {
    fn default() -> Self {
        Self {
            dt: None,
            substeps_per_cyclotron_period: 20,
            field_enabled: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub t_end: f64,
    pub snapshot_every: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub initial: InitialCondition,
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub split: SplitSection,
    pub run: RunSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, ConfigError> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::from_toml(&text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        self.params.validate()?;
        self.initial.validate()?;
        self.sampling.validate()?;
        self.integrator.validate()?;
        let run = &self.run;
        if !(run.t_end.is_finite() && run.t_end > 0.0) {
            return Err(ConfigError::TEnd(run.t_end));
        }
        if !(run.snapshot_every.is_finite() && run.snapshot_every > 0.0) {
            return Err(ConfigError::SnapshotEvery(run.snapshot_every));
        }
        stepping::snapshot_stride(run.snapshot_every, self.integrator.dt).map_err(as_config)?;
        self.split_for(&self.params)?;
        Ok(())
    }

    /// Split-step settings for a run at `params` (whose `ε` may differ from
    /// the configured one in an ε sweep).
    pub fn split_for(
        &self,
        params: &PhysicalParams,
    ) -> std::result::Result<SplitStepConfig, ConfigError> {
        let s = &self.split;
        let mut cfg = match s.dt {
            Some(dt) => SplitStepConfig {
                dt,
                substeps_per_cyclotron_period: s.substeps_per_cyclotron_period,
                field_enabled: true,
            },
            None => {
                if s.substeps_per_cyclotron_period < 20 {
                    return Err(ConfigError::Substeps(s.substeps_per_cyclotron_period));
                }
                SplitStepConfig::resolving(
                    params,
                    self.run.snapshot_every,
                    s.substeps_per_cyclotron_period,
                )
            }
        };
        cfg.field_enabled = s.field_enabled;
        cfg.validate_for(params)?;
        stepping::snapshot_stride(self.run.snapshot_every, cfg.dt).map_err(as_config)?;
        Ok(cfg)
    }
}

fn as_config(e: Error) -> ConfigError {
    match e {
        Error::Config(c) => c,
        other => ConfigError::Parse(other.to_string()),
    }
}

/// Parse a comma-separated ε list; it must be nonempty, positive and
/// strictly decreasing.
pub fn parse_eps_list(text: &str) -> std::result::Result<Vec<f64>, ConfigError> {
    let eps: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| ConfigError::EpsList))
        .collect::<std::result::Result<_, _>>()?;
    check_eps_list(&eps)?;
    Ok(eps)
}

pub fn check_eps_list(eps: &[f64]) -> std::result::Result<(), ConfigError> {
    let ok = !eps.is_empty()
        && eps.iter().all(|e| e.is_finite() && *e > 0.0)
        && eps.windows(2).all(|w| w[1] < w[0]);
    if ok {
        Ok(())
    } else {
        Err(ConfigError::EpsList)
    }
}
