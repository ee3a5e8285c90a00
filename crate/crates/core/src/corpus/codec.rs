//! Cause-centric tag codec.
//!
//! Each clause carries a two-part tag: a cause flag (C/O) and, for cause
//! clauses, the signed distance to the triggered emotion clause. The
//! distance is bounded by the max span `gamma`, so the tag task has
//! `2 * (gamma + 1)` classes: one (O, none) class plus (C, d) for every
//! d in `-gamma..=gamma`.

use std::collections::BTreeSet;

use super::{CorpusError, Document, EmotionCausePair};

/// Per-clause tag. `Outside` is the (O, none) tag; `Cause { distance }`
/// marks a cause clause whose emotion clause sits `distance` clauses away.
/// The "distance only with C" rule holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagLabel {
    Outside,
    Cause { distance: i64 },
}

impl TagLabel {
    pub fn is_cause(&self) -> bool {
        matches!(self, TagLabel::Cause { .. })
    }

    /// Canonical class index: 0 is (O, none), then (C, d) for
    /// d = -gamma..=gamma in ascending order.
    pub fn class_index(&self, gamma: usize) -> usize {
        match self {
            TagLabel::Outside => 0,
            TagLabel::Cause { distance } => {
                debug_assert!(distance.unsigned_abs() as usize <= gamma);
                (distance + gamma as i64) as usize + 1
            }
        }
    }

    /// Inverse of [`TagLabel::class_index`]. Returns `None` when the index
    /// is outside `0..2 * (gamma + 1)`.
    pub fn from_class_index(index: usize, gamma: usize) -> Option<TagLabel> {
        if index == 0 {
            Some(TagLabel::Outside)
        } else if index < tag_class_count(gamma) {
            Some(TagLabel::Cause {
                distance: index as i64 - 1 - gamma as i64,
            })
        } else {
            None
        }
    }
}

/// Number of tag classes under span limit `gamma`: `2 * (gamma + 1)`.
pub fn tag_class_count(gamma: usize) -> usize {
    2 * (gamma + 1)
}

/// Gold labels for the three tasks over one document.
///
/// `tag[i]`, `cause[i]` and `emotion[i]` describe clause `i + 1`.
/// `dropped_pairs` counts gold pairs the codec could not represent, either
/// because their span exceeds `gamma` or because another pair already
/// claimed the same cause clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskLabels {
    pub tag: Vec<TagLabel>,
    pub cause: Vec<u8>,
    pub emotion: Vec<u8>,
    pub dropped_pairs: usize,
}

/// Derives gold task labels for a document under span limit `gamma`.
///
/// Every gold pair with span at most `gamma` yields a (C, d) tag on its
/// cause clause; when several such pairs share a cause clause the one with
/// the smallest absolute distance wins, ties broken toward the positive
/// (emotion after cause) side. The emotion vector marks the emotion clause
/// of every gold pair, including span-dropped ones; the cause vector stays
/// consistent with the tag sequence.
pub fn encode_labels(document: &Document, gamma: usize) -> Result<TaskLabels, CorpusError> {
    if gamma == 0 {
        return Err(CorpusError::Config("gamma must be >= 1".into()));
    }
    document.validate()?;
    let n = document.n();
    let mut tag = vec![TagLabel::Outside; n];
    let mut cause = vec![0u8; n];
    let mut emotion = vec![0u8; n];
    let mut dropped = 0usize;

    for pair in &document.pairs {
        emotion[pair.emotion - 1] = 1;
    }

    for c in 1..=n {
        let mut in_span: Vec<i64> = document
            .pairs
            .iter()
            .filter(|p| p.cause == c)
            .map(|p| p.span())
            .collect();
        if in_span.is_empty() {
            continue;
        }
        let total = in_span.len();
        in_span.retain(|d| d.unsigned_abs() as usize <= gamma);
        dropped += total - in_span.len();
        if in_span.is_empty() {
            continue;
        }
        // Smallest |d| wins; on a tie prefer the positive distance.
        let best = *in_span
            .iter()
            .min_by_key(|d| (d.unsigned_abs(), std::cmp::Reverse(**d)))
            .expect("non-empty");
        dropped += in_span.len() - 1;
        tag[c - 1] = TagLabel::Cause { distance: best };
        cause[c - 1] = 1;
    }

    Ok(TaskLabels {
        tag,
        cause,
        emotion,
        dropped_pairs: dropped,
    })
}

/// Inverts a tag sequence into emotion-cause pairs.
///
/// A (C, d) tag at clause `i` emits the pair (emotion = i + d, cause = i)
/// when the emotion index stays in `1..=n`; out-of-range emotions are
/// dropped silently and counted in the second return value.
pub fn decode_pairs(tags: &[TagLabel]) -> (BTreeSet<EmotionCausePair>, usize) {
    let n = tags.len() as i64;
    let mut pairs = BTreeSet::new();
    let mut dropped = 0usize;
    for (idx, tag) in tags.iter().enumerate() {
        if let TagLabel::Cause { distance } = tag {
            let cause = idx as i64 + 1;
            let emotion = cause + distance;
            if emotion >= 1 && emotion <= n {
                pairs.insert(EmotionCausePair::new(emotion as usize, cause as usize));
            } else {
                dropped += 1;
            }
        }
    }
    (pairs, dropped)
}
