//! The loss family: per-step estimate losses, hinge penalties on
//! gold-probability drops between consecutive steps, their weighted
//! harness sum, the final-step prediction loss, and the three-task total.

use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::corpus::{tag_class_count, TaskLabels};
use crate::model::ForwardTrace;
use crate::mrg::Task;
use crate::numerics::{Tape, Tensor, ValueId};

/// Loss weighting and ablation switches. `alpha` balances the tagging
/// head against the two auxiliary heads; `beta` scales the margin terms
/// inside the harness. Each `disable_*` switch removes its term from the
/// objective entirely, so nothing reached only through that term receives
/// gradient.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossConfig {
    pub alpha: f64,
    pub beta: f64,
    pub disable_emotion: bool,
    pub disable_cause: bool,
    pub disable_estimate: bool,
    pub disable_margin: bool,
    pub disable_harness: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            alpha: 0.5,
            beta: 1e-3,
            disable_emotion: false,
            disable_cause: false,
            disable_estimate: false,
            disable_margin: false,
            disable_harness: false,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(TrainError::Config(format!("alpha must be in [0, 1], got {}", self.alpha)));
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(TrainError::Config(format!("beta must be >= 0, got {}", self.beta)));
        }
        Ok(())
    }
}

/// One head's loss decomposition (all values unweighted).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TaskLossReport {
    /// Intermediate-step estimate losses, steps 0 through L-1.
    pub estimate: Vec<f64>,
    /// Margin penalties for the step pairs (1,0) through (L, L-1).
    pub margin: Vec<f64>,
    pub prediction: f64,
    pub harness: f64,
    /// prediction + harness.
    pub total: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossReport {
    pub tag: TaskLossReport,
    pub cause: TaskLossReport,
    pub emotion: TaskLossReport,
    /// The weighted grand total actually optimized.
    pub total: f64,
}

impl LossReport {
    pub fn for_task(&self, task: Task) -> &TaskLossReport {
        match task {
            Task::Cause => &self.cause,
            Task::Tag => &self.tag,
            Task::Emotion => &self.emotion,
        }
    }
}

/// Mean over clauses of the negative log-likelihood of the gold one-hot
/// rows; probabilities are clamped at 1e-12 before the log.
pub fn estimate_loss(
    tape: &mut Tape,
    probs: ValueId,
    gold: ValueId,
) -> Result<ValueId, TrainError> {
    let nll = tape.cross_entropy_rows(probs, gold)?;
    Ok(tape.mean_all(nll))
}

/// Mean over clauses of max(0, previous gold probability - current gold
/// probability): any drop of the gold class between consecutive steps is
/// penalized, and gradient flows into both steps.
pub fn margin_loss(
    tape: &mut Tape,
    current: ValueId,
    previous: ValueId,
    gold: ValueId,
) -> Result<ValueId, TrainError> {
    let n = tape.value(current).rows();
    let drop = tape.sub(previous, current)?;
    let hinged = tape.relu(drop);
    let at_gold = tape.mul(hinged, gold)?;
    let sum = tape.sum_all(at_gold);
    Ok(tape.scale(sum, 1.0 / n as f64))
}

/// Sum of the intermediate estimate losses plus beta times the summed
/// margin penalties.
pub fn harness_loss(
    tape: &mut Tape,
    estimates: &[ValueId],
    margins: &[ValueId],
    beta: f64,
) -> Result<ValueId, TrainError> {
    let mut total = tape.scalar(0.0);
    for e in estimates {
        total = tape.add(total, *e)?;
    }
    if beta != 0.0 && !margins.is_empty() {
        let mut summed = tape.scalar(0.0);
        for m in margins {
            summed = tape.add(summed, *m)?;
        }
        let weighted = tape.scale(summed, beta);
        total = tape.add(total, weighted)?;
    }
    Ok(total)
}

/// Final-step counterpart of [`estimate_loss`]; identical formula, kept
/// separate because it is never subject to the harness switches.
pub fn prediction_loss(
    tape: &mut Tape,
    final_probs: ValueId,
    gold: ValueId,
) -> Result<ValueId, TrainError> {
    estimate_loss(tape, final_probs, gold)
}

/// Scalar combination of the three head totals: alpha on the tagging head
/// and (1 - alpha) / 2 on each auxiliary head, with disabled heads
/// contributing zero.
pub fn total_loss(tag: f64, cause: f64, emotion: f64, config: &LossConfig) -> f64 {
    let aux = (1.0 - config.alpha) / 2.0;
    let mut total = config.alpha * tag;
    if !config.disable_cause {
        total += aux * cause;
    }
    if !config.disable_emotion {
        total += aux * emotion;
    }
    total
}

/// One-hot tag rows, one per clause, using the cause-centric class index.
pub fn one_hot_tags(labels: &TaskLabels, gamma: usize) -> Tensor {
    let mut rows = Tensor::zeros(labels.tag.len(), tag_class_count(gamma));
    for (i, tag) in labels.tag.iter().enumerate() {
        rows.set(i, tag.class_index(gamma), 1.0);
    }
    rows
}

/// Binary one-hot rows; column 1 is the positive class.
pub fn one_hot_binary(flags: &[u8]) -> Tensor {
    let mut rows = Tensor::zeros(flags.len(), 2);
    for (i, flag) in flags.iter().enumerate() {
        rows.set(i, usize::from(*flag != 0), 1.0);
    }
    rows
}

/// Assembles the full objective for one document on the tape. Disabled
/// terms are skipped rather than multiplied by zero, so their parameters
/// are genuinely absent from the gradient. Returns the scalar to
/// differentiate plus a plain-number report of every component.
pub fn document_loss(
    tape: &mut Tape,
    trace: &ForwardTrace,
    labels: &TaskLabels,
    gamma: usize,
    config: &LossConfig,
) -> Result<(ValueId, LossReport), TrainError> {
    config.validate()?;
    let steps = trace.probs.len() - 1;
    let mut report = LossReport::default();
    let mut grand: Option<ValueId> = None;

    for task in Task::ALL {
        let weight = match task {
            Task::Tag => config.alpha,
            Task::Cause if config.disable_cause => 0.0,
            Task::Emotion if config.disable_emotion => 0.0,
            _ => (1.0 - config.alpha) / 2.0,
        };
        if weight == 0.0 {
            continue;
        }
        let gold_rows = match task {
            Task::Tag => one_hot_tags(labels, gamma),
            Task::Cause => one_hot_binary(&labels.cause),
            Task::Emotion => one_hot_binary(&labels.emotion),
        };
        let gold = tape.constant(gold_rows);

        let mut task_report = TaskLossReport::default();
        let mut estimates = Vec::new();
        if !config.disable_harness && !config.disable_estimate {
            for l in 0..steps {
                let e = estimate_loss(tape, *trace.probs[l].get(task), gold)?;
                task_report.estimate.push(tape.value(e).item());
                estimates.push(e);
            }
        }
        let mut margins = Vec::new();
        if !config.disable_harness && !config.disable_margin && config.beta != 0.0 {
            for l in 1..=steps {
                let m = margin_loss(
                    tape,
                    *trace.probs[l].get(task),
                    *trace.probs[l - 1].get(task),
                    gold,
                )?;
                task_report.margin.push(tape.value(m).item());
                margins.push(m);
            }
        }

        let prediction = prediction_loss(tape, *trace.probs[steps].get(task), gold)?;
        task_report.prediction = tape.value(prediction).item();
        let mut task_total = prediction;
        if !config.disable_harness {
            let harness = harness_loss(tape, &estimates, &margins, config.beta)?;
            task_report.harness = tape.value(harness).item();
            task_total = tape.add(task_total, harness)?;
        }
        task_report.total = tape.value(task_total).item();

        let weighted = tape.scale(task_total, weight);
        grand = Some(match grand {
            None => weighted,
            Some(acc) => tape.add(acc, weighted)?,
        });
        match task {
            Task::Cause => report.cause = task_report,
            Task::Tag => report.tag = task_report,
            Task::Emotion => report.emotion = task_report,
        }
    }

    let total = grand.unwrap_or_else(|| tape.scalar(0.0));
    report.total = tape.value(total).item();
    Ok((total, report))
}
