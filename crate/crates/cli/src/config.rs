//! One TOML file drives every subcommand: generation, model, loss, and
//! training knobs plus optional default paths. Unknown keys are
//! rejected so typos fail loudly instead of silently using a default.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use cgr_core::corpus::SynthConfig;
use cgr_core::model::ModelConfig;
use cgr_core::training::{LossConfig, TrainConfig};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Default corpus location for subcommands that read one.
    pub corpus: Option<PathBuf>,
    /// Default output directory for training artifacts.
    pub out_dir: Option<PathBuf>,
}

/// Everything a run needs. Any subset of the sections may appear in the
/// file; the rest fall back to the built-in defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed. When set (here or via --seed) it overrides the
    /// seed in [train] and also drives corpus generation.
    pub seed: Option<u64>,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub loss: LossConfig,
    pub synth: SynthConfig,
    pub paths: PathsConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig = toml::from_str(&text)
            .map_err(|e| anyhow::anyhow!("{}", e.message().replace('\n', " ")))
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.model.validate().context("model config")?;
        self.train.validate().context("train config")?;
        self.loss.validate().context("loss config")?;
        Ok(())
    }

    pub fn master_seed(&self) -> u64 {
        self.seed.unwrap_or(self.train.seed)
    }

    /// The training configuration with the master seed applied.
    pub fn effective_train(&self) -> TrainConfig {
        TrainConfig { seed: self.master_seed(), ..self.train.clone() }
    }
}
