//! Mini-batch gradient descent with per-epoch dev scoring, early stopping
//! on the dev pair F1, and a best-epoch parameter snapshot.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{document_loss, evaluate_split, LossConfig, SplitLoss, TrainError};
use crate::corpus::{encode_labels, Document, MetricsAccumulator};
use crate::model::{
    forward_on_tape, predict_pairs_from_tags, register_params, GraphCache, ModelConfig, Vocab,
};
use crate::numerics::{AdamConfig, Gradients, ParamStore, Tape};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Extra epochs tolerated without a dev improvement; 0 stops right
    /// after the first flat epoch.
    pub patience: usize,
    pub seed: u64,
    /// Fraction of the corpus held out as the dev split.
    pub eval_split: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            batch_size: 4,
            epochs: 10,
            patience: 3,
            seed: 17,
            eval_split: 0.2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(TrainError::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(TrainError::Config("batch_size must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be at least 1".into()));
        }
        if !(self.eval_split > 0.0 && self.eval_split < 1.0) {
            return Err(TrainError::Config(format!(
                "eval_split must lie strictly between 0 and 1, got {}",
                self.eval_split
            )));
        }
        Ok(())
    }
}

/// One history line; every epoch emits a train row and a dev row.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRow {
    pub epoch: usize,
    pub split: &'static str,
    pub loss: SplitLoss,
    pub f1_ecpe: f64,
    pub f1_ee: f64,
    pub f1_ce: f64,
}

#[derive(Debug)]
pub struct TrainOutcome {
    /// Parameters restored from the best dev epoch.
    pub store: ParamStore,
    pub vocab: Vocab,
    pub history: Vec<EpochRow>,
    pub best_epoch: usize,
    pub best_dev_f1: f64,
    pub epochs_run: usize,
}

/// Deterministic shuffled split; the dev side gets
/// `round(len * eval_split)` documents, at least one of each on any
/// corpus with two or more documents.
pub fn split_corpus(
    documents: &[Document],
    eval_split: f64,
    seed: u64,
) -> (Vec<Document>, Vec<Document>) {
    let mut order: Vec<usize> = (0..documents.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd1b5_4a32_d192_ed03);
    order.shuffle(&mut rng);
    let mut dev_count = ((documents.len() as f64) * eval_split).round() as usize;
    dev_count = dev_count.clamp(
        usize::from(documents.len() >= 2),
        documents.len().saturating_sub(1),
    );
    let (dev_idx, train_idx) = order.split_at(dev_count);
    let pick = |idx: &[usize]| idx.iter().map(|i| documents[*i].clone()).collect();
    (pick(train_idx), pick(dev_idx))
}

/// Trains from scratch: builds the vocabulary from the train split,
/// initializes parameters from the seed, and runs Adam over shuffled
/// mini-batches (batch gradient = mean over its documents). Each epoch
/// logs train and dev rows; training stops early once the dev pair F1
/// fails to improve for more than `patience` consecutive epochs. The
/// returned parameters are the best dev epoch's, not the last.
pub fn train(
    corpus: &[Document],
    model: &ModelConfig,
    config: &TrainConfig,
    loss_config: &LossConfig,
) -> Result<TrainOutcome, TrainError> {
    model.validate()?;
    config.validate()?;
    loss_config.validate()?;
    let (train_docs, dev_docs) = split_corpus(corpus, config.eval_split, config.seed);
    if train_docs.is_empty() || dev_docs.is_empty() {
        return Err(TrainError::Config(format!(
            "need at least two documents to form train and dev splits, got {}",
            corpus.len()
        )));
    }

    let vocab = Vocab::build(&train_docs);
    let mut store = ParamStore::new();
    register_params(&mut store, model, vocab.len(), config.seed)?;
    let labels = train_docs
        .iter()
        .map(|d| encode_labels(d, model.gamma))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cache = GraphCache::new(model.gamma, model.graph_variant);
    let adam = AdamConfig::with_learning_rate(config.learning_rate);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x2545_f491_4f6c_dd1d);

    let mut history = Vec::new();
    let mut best_f1 = f64::NEG_INFINITY;
    let mut best_epoch = 0;
    let mut best_params = store.snapshot();
    let mut stale = 0usize;
    let mut epochs_run = 0usize;

    for epoch in 1..=config.epochs {
        epochs_run = epoch;
        let mut order: Vec<usize> = (0..train_docs.len()).collect();
        order.shuffle(&mut shuffle_rng);

        let mut train_loss = SplitLoss::default();
        let mut train_metrics = MetricsAccumulator::new();
        for (batch_index, chunk) in order.chunks(config.batch_size).enumerate() {
            let mut batch_grads = Gradients::default();
            for &doc_index in chunk {
                let document = &train_docs[doc_index];
                let graph = cache.get(document.clauses.len());
                let mut tape = Tape::new();
                let trace = forward_on_tape(
                    &mut tape,
                    &store,
                    model,
                    &vocab,
                    &graph,
                    document,
                    Some(&mut dropout_rng),
                )?;
                let (total, report) =
                    document_loss(&mut tape, &trace, &labels[doc_index], model.gamma, loss_config)?;
                if !report.total.is_finite() {
                    return Err(TrainError::NonFiniteLoss { epoch, batch: batch_index + 1 });
                }
                let grads = tape.backward(total)?;
                batch_grads.add_scaled(&grads, 1.0 / chunk.len() as f64);

                train_loss.total += report.total;
                train_loss.tag += report.tag.total;
                train_loss.cause += report.cause.total;
                train_loss.emotion += report.emotion.total;
                let predicted =
                    predict_pairs_from_tags(tape.value(trace.probs.last().unwrap().tag));
                train_metrics.add_document(&predicted, &document.pairs);
            }
            store.adam_step(&batch_grads, &adam)?;
        }

        let count = train_docs.len() as f64;
        train_loss.total /= count;
        train_loss.tag /= count;
        train_loss.cause /= count;
        train_loss.emotion /= count;
        let tm = train_metrics.finish();
        history.push(EpochRow {
            epoch,
            split: "train",
            loss: train_loss,
            f1_ecpe: tm.ecpe.f1,
            f1_ee: tm.ee.f1,
            f1_ce: tm.ce.f1,
        });

        let (dev_loss, dev_metrics) =
            evaluate_split(&store, model, &vocab, &mut cache, loss_config, &dev_docs)?;
        history.push(EpochRow {
            epoch,
            split: "dev",
            loss: dev_loss,
            f1_ecpe: dev_metrics.ecpe.f1,
            f1_ee: dev_metrics.ee.f1,
            f1_ce: dev_metrics.ce.f1,
        });

        if dev_metrics.ecpe.f1 > best_f1 {
            best_f1 = dev_metrics.ecpe.f1;
            best_epoch = epoch;
            best_params = store.snapshot();
            stale = 0;
        } else {
            stale += 1;
            if stale > config.patience {
                break;
            }
        }
    }

    Ok(TrainOutcome {
        store: ParamStore::from_snapshot(best_params)?,
        vocab,
        history,
        best_epoch,
        best_dev_f1: best_f1,
        epochs_run,
    })
}

/// Renders history rows as CSV (six-decimal floats).
pub fn history_to_csv(rows: &[EpochRow]) -> String {
    let mut out =
        String::from("epoch,split,loss_total,loss_tag,loss_cau,loss_emo,f1_ecpe,f1_ee,f1_ce\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            r.epoch,
            r.split,
            r.loss.total,
            r.loss.tag,
            r.loss.cause,
            r.loss.emotion,
            r.f1_ecpe,
            r.f1_ee,
            r.f1_ce,
        ));
    }
    out
}

pub fn write_history_csv(path: impl AsRef<Path>, rows: &[EpochRow]) -> Result<(), TrainError> {
    std::fs::write(path, history_to_csv(rows))?;
    Ok(())
}
