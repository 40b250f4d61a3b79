//! Experiment configuration: TOML with defaults filled and unknown keys
//! rejected. A fixed seed makes every downstream CSV byte-identical.

use crate::chi::ChiVariant;
use crate::error::{Error, Result};
use crate::ode::IntegratorParams;
use crate::smooth3d_curve::DELTA0_DEFAULT;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Catalog id, e.g. "canonical-osgood" or "slope-field:<path>".
    pub family: String,
    pub domain: DomainConfig,
    pub smoothing: SmoothingConfig,
    pub integrator: IntegratorParams,
    pub sampling: SamplingConfig,
    pub output: OutputConfig,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            family: "canonical-osgood".into(),
            domain: DomainConfig::default(),
            smoothing: SmoothingConfig::default(),
            integrator: IntegratorParams::default(),
            sampling: SamplingConfig::default(),
            output: OutputConfig::default(),
            seed: 0,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    pub x: [f64; 2],
    pub y: [f64; 2],
    /// Second transversal axis, used by the 3D suites.
    pub y2: [f64; 2],
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            x: [-1.0, 1.0],
            y: [0.05, 0.95],
            y2: [0.05, 0.95],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SmoothingConfig {
    pub deltas: Vec<f64>,
    pub grid_j: Vec<u32>,
    pub tau: f64,
    pub chi: ChiVariant,
    pub delta0: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self {
            deltas: vec![0.1, 0.05, 0.025],
            grid_j: vec![16],
            tau: 0.5,
            chi: ChiVariant::Cubic,
            delta0: DELTA0_DEFAULT,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    /// Base-axis stations for sup-norm sweeps.
    pub nx: usize,
    /// Transversal stations per axis.
    pub ny: usize,
    /// Sampled leaves for leafwise sweeps.
    pub leaves: usize,
    pub random_pairs: usize,
    pub tol: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            nx: 64,
            ny: 64,
            leaves: 40,
            random_pairs: 2000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Emit per-check (x, measured, bound) plot-data files.
    pub plot_data: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            plot_data: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.family.is_empty() {
            return Err(Error::Config("family must be named".into()));
        }
        for &[lo, hi] in [&self.domain.x, &self.domain.y, &self.domain.y2] {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Config(format!(
                    "domain interval [{lo}, {hi}] is empty or non-finite"
                )));
            }
        }
        if self.smoothing.deltas.is_empty() {
            return Err(Error::Config("smoothing.deltas must be nonempty".into()));
        }
        for &d in &self.smoothing.deltas {
            if !(d > 0.0 && d < self.smoothing.delta0) {
                return Err(Error::Config(format!(
                    "smoothing.deltas entry {d} outside (0, {})",
                    self.smoothing.delta0
                )));
            }
        }
        if self.smoothing.grid_j.iter().any(|&j| j == 0) {
            return Err(Error::Config("smoothing.grid_j entries must be positive".into()));
        }
        if !(0.0 < self.smoothing.tau && self.smoothing.tau < 1.0) {
            return Err(Error::Config(format!(
                "smoothing.tau = {} outside (0, 1)",
                self.smoothing.tau
            )));
        }
        if self.sampling.nx < 2 || self.sampling.ny < 2 || self.sampling.leaves == 0 {
            return Err(Error::Config("sampling densities too small".into()));
        }
        if !(self.sampling.tol > 0.0) {
            return Err(Error::Config("sampling.tol must be positive".into()));
        }
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let config: ExperimentConfig = toml::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}
