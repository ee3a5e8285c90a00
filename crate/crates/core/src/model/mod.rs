//! The network: clause encoding, per-task document encoding, initial
//! estimation, and a recurrent reasoning cell that alternates label
//! projection, relational local graph transformation (RLGT), non-local
//! self-transformation (NLST) and decoding for a configured number of
//! steps. Parameters are shared across steps.

mod checkpoint;
mod config;
mod forward;
mod graph;
mod vocab;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use config::ModelConfig;
pub use forward::{
    decode_distributions, document_encode, encode_clauses, forward, forward_on_tape, nlst,
    predict_pairs, predict_pairs_from_tags, project_labels, register_params, rlgt, superimpose,
    try_per_task, ForwardTrace, PerTask, StepOutputs,
};
pub use graph::{GraphCache, GraphContext};
pub use vocab::Vocab;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model config: {0}")]
    Config(String),
    #[error("document {id}: {reason}")]
    BadDocument { id: String, reason: String },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Numerics(#[from] crate::numerics::NumericsError),
}
