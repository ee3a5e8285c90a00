//! Forward computation, from raw clauses to per-step label distributions.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{GraphContext, ModelConfig, ModelError, Vocab};
use crate::corpus::{decode_pairs, Document, EmotionCausePair, TagLabel};
use crate::mrg::{Relation, Task};
use crate::numerics::{bilstm, DirectionWeights, ParamStore, Tape, Tensor, ValueId};

/// One value per task, in cause, tag, emotion order.
#[derive(Debug, Clone)]
pub struct PerTask<T> {
    pub cause: T,
    pub tag: T,
    pub emotion: T,
}

impl<T> PerTask<T> {
    pub fn get(&self, task: Task) -> &T {
        match task {
            Task::Cause => &self.cause,
            Task::Tag => &self.tag,
            Task::Emotion => &self.emotion,
        }
    }

    pub fn as_array(&self) -> [&T; 3] {
        [&self.cause, &self.tag, &self.emotion]
    }
}

/// Builds a [`PerTask`] by running a fallible constructor once per task.
pub fn try_per_task<U, E>(mut f: impl FnMut(Task) -> Result<U, E>) -> Result<PerTask<U>, E> {
    Ok(PerTask {
        cause: f(Task::Cause)?,
        tag: f(Task::Tag)?,
        emotion: f(Task::Emotion)?,
    })
}

/// Tape handles for every step's states and distributions; index 0 is the
/// initial estimation, index `steps` the final one.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub hidden: Vec<PerTask<ValueId>>,
    pub probs: Vec<PerTask<ValueId>>,
}

/// Materialized forward results (no tape attached).
#[derive(Debug, Clone)]
pub struct StepOutputs {
    pub hidden: Vec<PerTask<Tensor>>,
    pub probs: Vec<PerTask<Tensor>>,
}

impl StepOutputs {
    pub fn steps(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn final_probs(&self) -> &PerTask<Tensor> {
        self.probs.last().expect("at least the initial step exists")
    }
}

fn param(tape: &mut Tape, store: &ParamStore, name: &str) -> Result<ValueId, ModelError> {
    let tensor = store
        .get(name)
        .ok_or_else(|| crate::numerics::NumericsError::UnknownParameter { name: name.into() })?;
    Ok(tape.param(name, tensor.clone()))
}

fn class_count(config: &ModelConfig, task: Task) -> usize {
    match task {
        Task::Tag => config.tag_classes(),
        _ => 2,
    }
}

/// Registers every parameter the configured model needs. Initialization is
/// name-keyed, so registration order does not matter, and the inventory is
/// independent of the step count (weights are shared across steps).
pub fn register_params(
    store: &mut ParamStore,
    config: &ModelConfig,
    vocab_size: usize,
    seed: u64,
) -> Result<(), ModelError> {
    let d = config.hidden;
    let half = d / 2;
    store.register("embed.tokens", vocab_size, config.embed, seed)?;
    store.register("encoder.proj.w", config.embed, d, seed)?;
    store.register("encoder.proj.b", 1, d, seed)?;
    for task in Task::ALL {
        let t = task.letter();
        for role in ["doc", "nlst"] {
            for dir in ["fwd", "bwd"] {
                store.register(&format!("{role}.{t}.{dir}.wx"), d, 4 * half, seed)?;
                store.register(&format!("{role}.{t}.{dir}.wh"), half, 4 * half, seed)?;
                store.register(&format!("{role}.{t}.{dir}.b"), 1, 4 * half, seed)?;
            }
        }
        let classes = class_count(config, task);
        store.register(&format!("dec.{t}.l1.w"), d, config.mlp_hidden, seed)?;
        store.register(&format!("dec.{t}.l1.b"), 1, config.mlp_hidden, seed)?;
        store.register(&format!("dec.{t}.l2.w"), config.mlp_hidden, classes, seed)?;
        store.register(&format!("dec.{t}.l2.b"), 1, classes, seed)?;
        store.register(&format!("label.{t}"), classes, d, seed)?;
    }
    store.register("rlgt.self", d, d, seed)?;
    for relation in Relation::all(config.gamma, config.graph_variant) {
        store.register(&format!("rlgt.rel.{}", relation.label()), d, d, seed)?;
    }
    Ok(())
}

/// Mean-pools each clause's token embeddings and projects to width d.
/// Unknown tokens hit the reserved embedding row 0.
pub fn encode_clauses(
    tape: &mut Tape,
    store: &ParamStore,
    vocab: &Vocab,
    document: &Document,
) -> Result<ValueId, ModelError> {
    let n = document.clauses.len();
    let mut pool = Tensor::zeros(n, vocab.len());
    for (i, clause) in document.clauses.iter().enumerate() {
        let weight = 1.0 / clause.tokens.len() as f64;
        for token in &clause.tokens {
            let j = vocab.index_of(token);
            pool.set(i, j, pool.get(i, j) + weight);
        }
    }
    let pool = tape.constant(pool);
    let embed = param(tape, store, "embed.tokens")?;
    let pooled = tape.matmul(pool, embed)?;
    let w = param(tape, store, "encoder.proj.w")?;
    let b = param(tape, store, "encoder.proj.b")?;
    let projected = tape.matmul(pooled, w)?;
    Ok(tape.add_row(projected, b)?)
}

/// Runs the named BiLSTM over the rows of an n x d matrix, producing n x d.
fn run_bilstm(
    tape: &mut Tape,
    store: &ParamStore,
    prefix: &str,
    states: ValueId,
) -> Result<ValueId, ModelError> {
    let n = tape.value(states).rows();
    let rows: Result<Vec<ValueId>, _> = (0..n).map(|i| tape.slice_rows(states, i, i + 1)).collect();
    let rows = rows?;
    let direction = |tape: &mut Tape, dir: &str| -> Result<DirectionWeights, ModelError> {
        Ok(DirectionWeights {
            wx: param(tape, store, &format!("{prefix}.{dir}.wx"))?,
            wh: param(tape, store, &format!("{prefix}.{dir}.wh"))?,
            b: param(tape, store, &format!("{prefix}.{dir}.b"))?,
        })
    };
    let fwd = direction(tape, "fwd")?;
    let bwd = direction(tape, "bwd")?;
    let outputs = bilstm(tape, &rows, &fwd, &bwd)?;
    Ok(tape.concat_rows(&outputs)?)
}

/// Three task-specific BiLSTMs over the shared clause encodings.
pub fn document_encode(
    tape: &mut Tape,
    store: &ParamStore,
    encoded: ValueId,
) -> Result<PerTask<ValueId>, ModelError> {
    try_per_task(|task| {
        run_bilstm(tape, store, &format!("doc.{}", task.letter()), encoded)
    })
}

/// Two-layer MLP decoder with a row softmax; shared by the initial
/// estimation and every reasoning step of one task.
pub fn decode_distributions(
    tape: &mut Tape,
    store: &ParamStore,
    states: ValueId,
    task: Task,
) -> Result<ValueId, ModelError> {
    let t = task.letter();
    let w1 = param(tape, store, &format!("dec.{t}.l1.w"))?;
    let b1 = param(tape, store, &format!("dec.{t}.l1.b"))?;
    let w2 = param(tape, store, &format!("dec.{t}.l2.w"))?;
    let b2 = param(tape, store, &format!("dec.{t}.l2.b"))?;
    let pre = tape.matmul(states, w1)?;
    let pre = tape.add_row(pre, b1)?;
    let mid = tape.tanh(pre);
    let logits = tape.matmul(mid, w2)?;
    let logits = tape.add_row(logits, b2)?;
    Ok(tape.softmax_rows(logits))
}

/// Projects each task's distributions through its label embedding matrix
/// and sums the three results into one n x d feedback matrix.
pub fn project_labels(
    tape: &mut Tape,
    store: &ParamStore,
    probs: &PerTask<ValueId>,
) -> Result<ValueId, ModelError> {
    let mut combined: Option<ValueId> = None;
    for task in Task::ALL {
        let matrix = param(tape, store, &format!("label.{}", task.letter()))?;
        let projected = tape.matmul(*probs.get(task), matrix)?;
        combined = Some(match combined {
            None => projected,
            Some(acc) => tape.add(acc, projected)?,
        });
    }
    Ok(combined.expect("three tasks always contribute"))
}

/// Adds the shared label feedback onto each task's hidden states.
pub fn superimpose(
    tape: &mut Tape,
    hidden: &PerTask<ValueId>,
    feedback: ValueId,
) -> Result<PerTask<ValueId>, ModelError> {
    try_per_task(|task| Ok(tape.add(*hidden.get(task), feedback)?))
}

/// Relational local graph transformation over the stacked 3n x d states
/// (task-major row order). Each node keeps a self message through the
/// shared self matrix and receives, per relation, the mean of its
/// in-neighbors' states through that relation's matrix.
pub fn rlgt(
    tape: &mut Tape,
    store: &ParamStore,
    graph: &GraphContext,
    stacked: ValueId,
) -> Result<ValueId, ModelError> {
    let w1 = param(tape, store, "rlgt.self")?;
    let mut total = tape.matmul(stacked, w1)?;
    for (relation, matrix) in &graph.adjacency {
        if matrix.max_abs() == 0.0 {
            continue;
        }
        let adjacency = tape.constant(matrix.clone());
        let messages = tape.matmul(adjacency, stacked)?;
        let w2 = param(tape, store, &format!("rlgt.rel.{}", relation.label()))?;
        let transformed = tape.matmul(messages, w2)?;
        total = tape.add(total, transformed)?;
    }
    Ok(total)
}

/// Task-specific BiLSTM over the n node states of one task.
pub fn nlst(
    tape: &mut Tape,
    store: &ParamStore,
    states: ValueId,
    task: Task,
) -> Result<ValueId, ModelError> {
    run_bilstm(tape, store, &format!("nlst.{}", task.letter()), states)
}

/// Full forward pass on a caller-provided tape. `dropout_rng` enables the
/// clause-encoding dropout mask (training only); pass `None` for the
/// deterministic path.
pub fn forward_on_tape(
    tape: &mut Tape,
    store: &ParamStore,
    config: &ModelConfig,
    vocab: &Vocab,
    graph: &GraphContext,
    document: &Document,
    mut dropout_rng: Option<&mut ChaCha8Rng>,
) -> Result<ForwardTrace, ModelError> {
    document
        .validate()
        .map_err(|e| ModelError::BadDocument { id: document.id.clone(), reason: e.to_string() })?;
    let n = document.clauses.len();
    assert_eq!(graph.mrg.n, n, "graph must match the document length");

    let mut encoded = encode_clauses(tape, store, vocab, document)?;
    if config.dropout > 0.0 {
        if let Some(rng) = dropout_rng.as_deref_mut() {
            let keep = 1.0 - config.dropout;
            let mut mask = Tensor::zeros(n, config.hidden);
            for v in mask.values_mut() {
                if rng.gen_bool(keep) {
                    *v = 1.0 / keep;
                }
            }
            let mask = tape.constant(mask);
            encoded = tape.mul(encoded, mask)?;
        }
    }

    let mut hidden = vec![document_encode(tape, store, encoded)?];
    let mut probs = vec![try_per_task(|task| {
        decode_distributions(tape, store, *hidden[0].get(task), task)
    })?];

    for _ in 1..=config.steps {
        let prev_hidden = hidden.last().unwrap().clone();
        let prev_probs = probs.last().unwrap().clone();

        let hat = if config.disable_pred_interactions {
            prev_hidden
        } else {
            let feedback = project_labels(tape, store, &prev_probs)?;
            superimpose(tape, &prev_hidden, feedback)?
        };

        let bar = if config.disable_rlgt {
            hat
        } else {
            let stacked = tape.concat_rows(&[hat.cause, hat.tag, hat.emotion])?;
            let updated = rlgt(tape, store, graph, stacked)?;
            PerTask {
                cause: tape.slice_rows(updated, 0, n)?,
                tag: tape.slice_rows(updated, n, 2 * n)?,
                emotion: tape.slice_rows(updated, 2 * n, 3 * n)?,
            }
        };

        let next_hidden = if config.disable_nlst {
            bar
        } else {
            try_per_task(|task| nlst(tape, store, *bar.get(task), task))?
        };
        let next_probs = try_per_task(|task| {
            decode_distributions(tape, store, *next_hidden.get(task), task)
        })?;
        hidden.push(next_hidden);
        probs.push(next_probs);
    }

    Ok(ForwardTrace { hidden, probs })
}

/// Forward pass that owns its tape and returns plain tensors.
pub fn forward(
    store: &ParamStore,
    config: &ModelConfig,
    vocab: &Vocab,
    graph: &GraphContext,
    document: &Document,
) -> Result<StepOutputs, ModelError> {
    let mut tape = Tape::new();
    let trace = forward_on_tape(&mut tape, store, config, vocab, graph, document, None)?;
    let materialize = |ids: &[PerTask<ValueId>]| {
        ids.iter()
            .map(|step| PerTask {
                cause: tape.value(step.cause).clone(),
                tag: tape.value(step.tag).clone(),
                emotion: tape.value(step.emotion).clone(),
            })
            .collect()
    };
    Ok(StepOutputs { hidden: materialize(&trace.hidden), probs: materialize(&trace.probs) })
}

/// Reads pairs off the final tag distributions: per clause, the argmax
/// class (ties resolved toward the lowest index, so a fully uniform row
/// yields the outside class), then the tag-to-pair decoding.
pub fn predict_pairs(outputs: &StepOutputs) -> BTreeSet<EmotionCausePair> {
    predict_pairs_from_tags(&outputs.final_probs().tag)
}

/// Same decoding applied directly to an n x 2(gamma + 1) tag matrix.
pub fn predict_pairs_from_tags(tags_matrix: &Tensor) -> BTreeSet<EmotionCausePair> {
    let gamma = tags_matrix.cols() / 2 - 1;
    let mut tags = Vec::with_capacity(tags_matrix.rows());
    for i in 0..tags_matrix.rows() {
        let row = tags_matrix.row(i);
        let mut best = 0;
        for (k, value) in row.iter().enumerate().skip(1) {
            if *value > row[best] {
                best = k;
            }
        }
        tags.push(TagLabel::from_class_index(best, gamma).expect("argmax is a valid class"));
    }
    decode_pairs(&tags).0
}
