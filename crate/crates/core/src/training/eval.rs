//! Forward-only scoring of a parameter set over a document collection.

use super::{document_loss, LossConfig, TrainError};
use crate::corpus::{encode_labels, Document, Metrics, MetricsAccumulator};
use crate::model::{forward_on_tape, predict_pairs_from_tags, GraphCache, ModelConfig, Vocab};
use crate::numerics::{ParamStore, Tape};

/// Mean per-document loss components of one split.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SplitLoss {
    pub total: f64,
    pub tag: f64,
    pub cause: f64,
    pub emotion: f64,
}

/// Scores every document: mean losses plus micro-averaged pair metrics.
/// Documents are visited in order and reduced in order, so results do not
/// depend on timing.
pub fn evaluate_split(
    store: &ParamStore,
    config: &ModelConfig,
    vocab: &Vocab,
    cache: &mut GraphCache,
    loss_config: &LossConfig,
    documents: &[Document],
) -> Result<(SplitLoss, Metrics), TrainError> {
    let mut losses = SplitLoss::default();
    let mut accumulator = MetricsAccumulator::new();
    for document in documents {
        let labels = encode_labels(document, config.gamma)?;
        let graph = cache.get(document.clauses.len());
        let mut tape = Tape::new();
        let trace = forward_on_tape(&mut tape, store, config, vocab, &graph, document, None)?;
        let (_, report) = document_loss(&mut tape, &trace, &labels, config.gamma, loss_config)?;
        losses.total += report.total;
        losses.tag += report.tag.total;
        losses.cause += report.cause.total;
        losses.emotion += report.emotion.total;

        let predicted = predict_pairs_from_tags(tape.value(trace.probs.last().unwrap().tag));
        accumulator.add_document(&predicted, &document.pairs);
    }
    let count = documents.len().max(1) as f64;
    losses.total /= count;
    losses.tag /= count;
    losses.cause /= count;
    losses.emotion /= count;
    Ok((losses, accumulator.finish()))
}

/// Micro-averaged pair metrics over a corpus; emotion-only and cause-only
/// scores are derived from the extracted pairs.
pub fn evaluate_model(
    store: &ParamStore,
    config: &ModelConfig,
    vocab: &Vocab,
    documents: &[Document],
) -> Result<Metrics, TrainError> {
    let mut cache = GraphCache::new(config.gamma, config.graph_variant);
    evaluate_split(store, config, vocab, &mut cache, &LossConfig::default(), documents)
        .map(|(_, metrics)| metrics)
}
