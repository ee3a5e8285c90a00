//! Precision/recall/F1 for pair extraction and its two subtasks.
//!
//! The pair task scores exact (emotion, cause) matches. The emotion and
//! cause subtasks score the clause sets derived from the extracted pairs.
//! Aggregation across documents is micro: global correct/predicted/gold
//! counts, with 0/0 ratios defined as 0.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::EmotionCausePair;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub ecpe: TaskMetrics,
    pub ee: TaskMetrics,
    pub ce: TaskMetrics,
}

/// Raw match counts for one task.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairCounts {
    pub correct: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl PairCounts {
    pub fn metrics(&self) -> TaskMetrics {
        let precision = ratio(self.correct, self.predicted);
        let recall = ratio(self.correct, self.gold);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        TaskMetrics {
            precision,
            recall,
            f1,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Micro-aggregates pair predictions over any number of documents.
#[derive(Debug, Clone, Copy, Default)]
pub struct MetricsAccumulator {
    pub ecpe: PairCounts,
    pub ee: PairCounts,
    pub ce: PairCounts,
}

impl MetricsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_document(
        &mut self,
        predicted: &BTreeSet<EmotionCausePair>,
        gold: &BTreeSet<EmotionCausePair>,
    ) {
        self.ecpe.correct += predicted.intersection(gold).count();
        self.ecpe.predicted += predicted.len();
        self.ecpe.gold += gold.len();

        let pred_emotions: BTreeSet<usize> = predicted.iter().map(|p| p.emotion).collect();
        let gold_emotions: BTreeSet<usize> = gold.iter().map(|p| p.emotion).collect();
        self.ee.correct += pred_emotions.intersection(&gold_emotions).count();
        self.ee.predicted += pred_emotions.len();
        self.ee.gold += gold_emotions.len();

        let pred_causes: BTreeSet<usize> = predicted.iter().map(|p| p.cause).collect();
        let gold_causes: BTreeSet<usize> = gold.iter().map(|p| p.cause).collect();
        self.ce.correct += pred_causes.intersection(&gold_causes).count();
        self.ce.predicted += pred_causes.len();
        self.ce.gold += gold_causes.len();
    }

    pub fn finish(&self) -> Metrics {
        Metrics {
            ecpe: self.ecpe.metrics(),
            ee: self.ee.metrics(),
            ce: self.ce.metrics(),
        }
    }
}

/// Scores one document's predicted pairs against the gold pairs.
pub fn evaluate(
    predicted: &BTreeSet<EmotionCausePair>,
    gold: &BTreeSet<EmotionCausePair>,
) -> Metrics {
    let mut acc = MetricsAccumulator::new();
    acc.add_document(predicted, gold);
    acc.finish()
}
