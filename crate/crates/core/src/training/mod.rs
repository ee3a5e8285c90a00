//! Losses, the training loop, and model evaluation.

mod eval;
mod loss;
mod train;

pub use eval::{evaluate_model, evaluate_split, SplitLoss};
pub use loss::{
    document_loss, estimate_loss, harness_loss, margin_loss, one_hot_binary, one_hot_tags,
    prediction_loss, total_loss, LossConfig, LossReport, TaskLossReport,
};
pub use train::{
    history_to_csv, split_corpus, train, write_history_csv, EpochRow, TrainConfig, TrainOutcome,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Numerics(#[from] crate::numerics::NumericsError),
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
    #[error("history file: {0}")]
    Io(#[from] std::io::Error),
}
