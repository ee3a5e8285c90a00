//! Document data model, cause-centric tag codec, pair-level evaluation
//! metrics, JSONL corpus I/O and synthetic corpus generation.
//!
//! A document is a sequence of clauses indexed `1..=n` together with a set
//! of gold emotion-cause pairs. All operations here are pure functions over
//! immutable inputs and are safe to call concurrently.

mod codec;
mod io;
mod metrics;
mod synth;

pub use codec::{decode_pairs, encode_labels, tag_class_count, TagLabel, TaskLabels};
pub use io::{load_corpus, save_corpus};
pub use metrics::{evaluate, Metrics, MetricsAccumulator, PairCounts, TaskMetrics};
pub use synth::{generate_synthetic, SynthConfig};

use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("document {id}: {reason}")]
    MalformedDocument { id: String, reason: String },
    #[error("line {line}: {reason}")]
    InvalidLine { line: usize, reason: String },
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One clause: a non-empty token sequence. Clauses are the atomic
/// prediction unit; the crate never tokenizes raw text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub tokens: Vec<String>,
}

impl Clause {
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Clause {
            tokens: tokens.into_iter().map(Into::into).collect(),
        }
    }
}

/// An (emotion clause, cause clause) pair, both 1-based clause indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EmotionCausePair {
    pub emotion: usize,
    pub cause: usize,
}

impl EmotionCausePair {
    pub fn new(emotion: usize, cause: usize) -> Self {
        EmotionCausePair { emotion, cause }
    }

    /// Signed distance from the cause clause to its emotion clause.
    pub fn span(&self) -> i64 {
        self.emotion as i64 - self.cause as i64
    }
}

/// A document: clauses indexed `1..=n` plus the gold emotion-cause pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub clauses: Vec<Clause>,
    pub pairs: BTreeSet<EmotionCausePair>,
}

impl Document {
    /// Builds a document, rejecting empty clause lists, empty clauses and
    /// out-of-range pair indices.
    pub fn new<I>(id: impl Into<String>, clauses: Vec<Clause>, pairs: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = EmotionCausePair>,
    {
        let doc = Document {
            id: id.into(),
            clauses,
            pairs: pairs.into_iter().collect(),
        };
        doc.validate()?;
        Ok(doc)
    }

    pub fn n(&self) -> usize {
        self.clauses.len()
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let malformed = |reason: String| CorpusError::MalformedDocument {
            id: self.id.clone(),
            reason,
        };
        if self.clauses.is_empty() {
            return Err(malformed("document has no clauses".into()));
        }
        for (i, clause) in self.clauses.iter().enumerate() {
            if clause.tokens.is_empty() {
                return Err(malformed(format!("clause {} is empty", i + 1)));
            }
        }
        let n = self.n();
        for pair in &self.pairs {
            if pair.emotion < 1 || pair.emotion > n || pair.cause < 1 || pair.cause > n {
                return Err(malformed(format!(
                    "pair ({}, {}) out of range 1..={}",
                    pair.emotion, pair.cause, n
                )));
            }
        }
        Ok(())
    }
}
