//! Dense 64-bit tensor algebra with tape-based reverse-mode
//! differentiation, LSTM primitives, parameter storage with an Adam
//! optimizer, and a finite-difference gradient checker.
//!
//! Everything is two-dimensional: vectors are 1-row matrices and scalars
//! are 1x1. A [`Tape`] records each primitive as it computes forward
//! values; [`Tape::backward`] replays the record in reverse to accumulate
//! exact adjoints for every reachable parameter. Nodes that no parameter
//! feeds into carry a `needs_grad = false` mark and are skipped on the
//! way back, which keeps constant-heavy graphs cheap.

mod gradcheck;
mod lstm;
mod params;
mod tape;
mod tensor;

pub use gradcheck::grad_check;
pub use lstm::{bilstm, lstm_step, DirectionWeights};
pub use params::{AdamConfig, ParamSnapshot, ParamStore};
pub use tape::{Gradients, Tape, ValueId};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("shape mismatch in {op}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    ShapeMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("{op} expects a scalar, got {rows}x{cols}")]
    NotScalar { op: &'static str, rows: usize, cols: usize },
    #[error("invalid {op} range {start}..{end} for extent {extent}")]
    BadRange { op: &'static str, start: usize, end: usize, extent: usize },
    #[error("non-finite gradient for parameter '{name}'")]
    NonFiniteGradient { name: String },
    #[error("unknown parameter '{name}'")]
    UnknownParameter { name: String },
    #[error("parameter '{name}' already registered with shape {existing_rows}x{existing_cols}")]
    ShapeConflict { name: String, existing_rows: usize, existing_cols: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
