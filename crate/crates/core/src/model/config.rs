use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::corpus::tag_class_count;
use crate::mrg::MrgVariant;

/// Structural hyperparameters. The defaults are the desk-scale settings
/// used across the test suite; `hidden` trades quality for speed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Hidden width d of every clause/node state.
    pub hidden: usize,
    /// Maximum clause span between an emotion and its cause.
    pub gamma: usize,
    /// Number of reasoning steps L.
    pub steps: usize,
    /// Hidden width of the two-layer decoder MLPs.
    pub mlp_hidden: usize,
    /// Token embedding width (before projection to `hidden`).
    pub embed: usize,
    /// Vocabulary size; filled in from the actual vocabulary at
    /// initialization and carried in checkpoints.
    pub vocab_size: usize,
    /// Dropout rate on the encoded clause states; 0 disables it and keeps
    /// runs deterministic.
    pub dropout: f64,
    pub graph_variant: MrgVariant,
    /// Skip the label-projection feedback (superimpose nothing).
    pub disable_pred_interactions: bool,
    /// Replace the graph transformation with identity.
    pub disable_rlgt: bool,
    /// Replace the per-task sequence transformation with identity.
    pub disable_nlst: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden: 32,
            gamma: 3,
            steps: 3,
            mlp_hidden: 256,
            embed: 32,
            vocab_size: 0,
            dropout: 0.0,
            graph_variant: MrgVariant::Full,
            disable_pred_interactions: false,
            disable_rlgt: false,
            disable_nlst: false,
        }
    }
}

impl ModelConfig {
    /// Tag class count 2(gamma+1): the outside class plus one cause class
    /// per signed distance in [-gamma, gamma].
    pub fn tag_classes(&self) -> usize {
        tag_class_count(self.gamma)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |reason: String| Err(ModelError::Config(reason));
        if self.hidden == 0 || self.hidden % 2 != 0 {
            return fail(format!(
                "hidden width must be positive and even for the two LSTM directions, got {}",
                self.hidden
            ));
        }
        if self.gamma == 0 {
            return fail("gamma must be at least 1".into());
        }
        if self.steps == 0 {
            return fail("need at least one reasoning step".into());
        }
        if self.mlp_hidden == 0 {
            return fail("mlp_hidden must be positive".into());
        }
        if self.embed == 0 {
            return fail("embed width must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        Ok(())
    }
}
