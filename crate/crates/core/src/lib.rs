//! Co-evolving graph reasoning for emotion-cause pair extraction (ECPE).
//!
//! The crate is organized along the pipeline:
//!
//! * [`corpus`] - documents, the cause-centric tag codec, pair metrics,
//!   JSONL corpus I/O and a synthetic corpus generator.
//! * [`mrg`] - the multi-task relational graph built over the cause, tag
//!   and emotion nodes of a document, with its ablation variants.
//! * [`numerics`] - a small dense-tensor library with tape-based
//!   reverse-mode differentiation, LSTM primitives and an Adam optimizer.
//! * [`model`] - the forward computation: clause encoding, per-task
//!   document encoding, initial estimation and the recurrent reasoning
//!   cell (label projection, relational local graph transformation,
//!   non-local self-transformation, decoding).
//! * [`training`] - the loss family (estimate, margin, harness,
//!   prediction, weighted total), the training loop and evaluation.

pub mod corpus;
pub mod model;
pub mod mrg;
pub mod numerics;
pub mod training;

pub use corpus::{Clause, Document, EmotionCausePair, Metrics, TagLabel, TaskLabels};
pub use model::{ModelConfig, StepOutputs, Vocab};
pub use mrg::{Mrg, MrgVariant, NodeId, Relation, Task};
pub use numerics::{Gradients, ParamStore, Tape, Tensor, ValueId};
pub use training::{LossConfig, TrainConfig, TrainOutcome};
