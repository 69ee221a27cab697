//! TOML run configuration. Unknown keys are rejected everywhere
//! (fail-closed), and every command validates that the blocks it needs are
//! present before doing any work.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use w2s_core::datagen::{BoundedConfig, DatasetFormat, SpikedConfig, ToyPairConfig};
use w2s_core::projection::ThresholdMode;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeneratorBlock {
    Toy(ToyPairConfig),
    Spiked(SpikedConfig),
    Bounded(BoundedConfig),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaBlock {
    pub beta_w: f64,
    pub beta_s: f64,
    pub beta_eff_w: Option<f64>,
    pub beta_eff_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionModeCfg {
    Analytic,
    Pca,
    Variance,
}

impl ProjectionModeCfg {
    pub fn threshold_mode(self) -> Option<ThresholdMode> {
        match self {
            ProjectionModeCfg::Analytic => None,
            ProjectionModeCfg::Pca => Some(ThresholdMode::Pca),
            ProjectionModeCfg::Variance => Some(ThresholdMode::Variance),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionBlock {
    pub mode: ProjectionModeCfg,
    #[serde(default)]
    pub alpha_w: f64,
    #[serde(default)]
    pub alpha_s: f64,
    #[serde(default)]
    pub bias: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedsBlock {
    pub master: u64,
    pub count: usize,
}

impl SeedsBlock {
    /// Consecutive master seeds, overridable through `W2S_SEED`.
    pub fn seeds(&self) -> Vec<u64> {
        let master = std::env::var("W2S_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(self.master);
        (0..self.count as u64)
            .map(|i| master.wrapping_add(i))
            .collect()
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoBlock {
    pub out: Option<PathBuf>,
    pub out_weak: Option<PathBuf>,
    pub out_strong: Option<PathBuf>,
    pub in_weak: Option<PathBuf>,
    pub in_strong: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
    pub in_csv: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
    pub format: Option<DatasetFormat>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub eta_grid: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportBlock {
    pub metric: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub generator: Option<GeneratorBlock>,
    pub beta: Option<BetaBlock>,
    pub projection: Option<ProjectionBlock>,
    pub seeds: Option<SeedsBlock>,
    pub io: Option<IoBlock>,
    pub sweep: Option<SweepBlock>,
    pub report: Option<ReportBlock>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }

    pub fn generator(&self) -> Result<&GeneratorBlock, CliError> {
        self.generator
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [generator] block".into()))
    }

    pub fn toy_generator(&self) -> Result<&ToyPairConfig, CliError> {
        match self.generator()? {
            GeneratorBlock::Toy(cfg) => Ok(cfg),
            _ => Err(CliError::Config(
                "this command requires a toy generator".into(),
            )),
        }
    }

    pub fn beta(&self) -> Result<&BetaBlock, CliError> {
        self.beta
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [beta] block".into()))
    }

    pub fn projection(&self) -> Result<&ProjectionBlock, CliError> {
        self.projection
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [projection] block".into()))
    }

    pub fn seeds(&self) -> Result<&SeedsBlock, CliError> {
        self.seeds
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [seeds] block".into()))
    }

    pub fn io(&self) -> Result<&IoBlock, CliError> {
        self.io
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [io] block".into()))
    }
}

pub fn require_path<'a>(field: &str, value: &'a Option<PathBuf>) -> Result<&'a Path, CliError> {
    value
        .as_deref()
        .ok_or_else(|| CliError::Config(format!("missing io.{field} path")))
}
