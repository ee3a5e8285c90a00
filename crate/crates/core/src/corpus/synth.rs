//! Synthetic corpus generator.
//!
//! Documents are sequences of background-token clauses. Each emotion-cause
//! pair plants a signal token (`emoK` in the emotion clause, `cauK` in the
//! cause clause) with the two clauses at most `span_max` apart. Distinct
//! pairs are kept well separated so proximity alone determines the gold
//! pairing. Decoy signals can be sprinkled into unlabeled clauses, but only
//! where no counterpart signal sits within `span_max`, so a model that
//! checks for nearby counterpart evidence can always reject them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Clause, CorpusError, Document, EmotionCausePair};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    /// Number of documents to generate.
    pub docs: usize,
    pub clauses_min: usize,
    pub clauses_max: usize,
    /// Background tokens per clause, before signal insertion.
    pub clause_len_min: usize,
    pub clause_len_max: usize,
    pub pairs_min: usize,
    pub pairs_max: usize,
    /// Maximum |emotion - cause| clause distance for generated pairs.
    pub span_max: usize,
    /// Size of the background vocabulary (`w0` .. `w{n-1}`).
    pub background_vocab: usize,
    /// Number of distinct emotion signal tokens (`emo0` ..).
    pub emotion_signals: usize,
    /// Number of distinct cause signal tokens (`cau0` ..).
    pub cause_signals: usize,
    /// Per-clause probability of planting a decoy signal in an unlabeled
    /// clause (skipped where it would create an ambiguous pairing).
    pub decoy_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            docs: 500,
            clauses_min: 8,
            clauses_max: 16,
            clause_len_min: 2,
            clause_len_max: 4,
            pairs_min: 1,
            pairs_max: 2,
            span_max: 3,
            background_vocab: 80,
            emotion_signals: 4,
            cause_signals: 4,
            decoy_rate: 0.1,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<(), CorpusError> {
        let fail = |reason: &str| Err(CorpusError::Config(reason.to_string()));
        if self.clauses_min == 0 {
            return fail("clauses_min must be at least 1");
        }
        if self.clauses_min > self.clauses_max {
            return fail("clauses_min exceeds clauses_max");
        }
        if self.clause_len_min == 0 {
            return fail("clause_len_min must be at least 1");
        }
        if self.clause_len_min > self.clause_len_max {
            return fail("clause_len_min exceeds clause_len_max");
        }
        if self.pairs_min > self.pairs_max {
            return fail("pairs_min exceeds pairs_max");
        }
        if self.background_vocab == 0 {
            return fail("background_vocab must be at least 1");
        }
        if self.emotion_signals == 0 || self.cause_signals == 0 {
            return fail("signal vocabularies must be non-empty");
        }
        if !(0.0..=1.0).contains(&self.decoy_rate) {
            return fail("decoy_rate must lie in [0, 1]");
        }
        // Worst case every pair occupies one clause and pair clauses must sit
        // more than span_max apart, so check the tightest packing fits.
        if self.pairs_min > 0 {
            let needed = self.pairs_min + (self.pairs_min - 1) * self.span_max;
            if self.clauses_max < needed {
                return fail("clauses_max too small to separate pairs_min pairs");
            }
        }
        Ok(())
    }
}

struct PlacedPair {
    emotion: usize,
    cause: usize,
    emotion_signal: usize,
    cause_signal: usize,
}

/// Tries to place `target` separated pairs in a document of `n` clauses.
/// Returns None when fewer than `min` fit.
fn place_pairs(
    rng: &mut ChaCha8Rng,
    n: usize,
    min: usize,
    target: usize,
    config: &SynthConfig,
) -> Option<Vec<PlacedPair>> {
    let span = config.span_max as i64;
    let mut used: Vec<usize> = Vec::new();
    let mut pairs: Vec<PlacedPair> = Vec::new();
    for _ in 0..target {
        let mut placed = false;
        for _ in 0..120 {
            let emotion = rng.gen_range(1..=n);
            let d = rng.gen_range(-span..=span);
            let cause = emotion as i64 - d;
            if cause < 1 || cause > n as i64 {
                continue;
            }
            let cause = cause as usize;
            let far = |x: usize| {
                used.iter()
                    .all(|&p| (x as i64 - p as i64).abs() > span)
            };
            if !far(emotion) || !far(cause) {
                continue;
            }
            used.push(emotion);
            if cause != emotion {
                used.push(cause);
            }
            pairs.push(PlacedPair {
                emotion,
                cause,
                emotion_signal: rng.gen_range(0..config.emotion_signals),
                cause_signal: rng.gen_range(0..config.cause_signals),
            });
            placed = true;
            break;
        }
        if !placed {
            break;
        }
    }
    (pairs.len() >= min).then_some(pairs)
}

fn generate_document(
    rng: &mut ChaCha8Rng,
    id: String,
    config: &SynthConfig,
) -> Result<Document, CorpusError> {
    let span = config.span_max as i64;
    let mut layout = None;
    for _ in 0..60 {
        let n = rng.gen_range(config.clauses_min..=config.clauses_max);
        let target = rng.gen_range(config.pairs_min..=config.pairs_max);
        if let Some(pairs) = place_pairs(rng, n, config.pairs_min, target, config) {
            layout = Some((n, pairs));
            break;
        }
    }
    let Some((n, pairs)) = layout else {
        return Err(CorpusError::Config(
            "document layout infeasible; loosen pair or clause bounds".into(),
        ));
    };

    // Signal positions, gold and decoy alike, used for the ambiguity checks.
    let mut emo_at: Vec<usize> = pairs.iter().map(|p| p.emotion).collect();
    let mut cau_at: Vec<usize> = pairs.iter().map(|p| p.cause).collect();
    let labeled: Vec<usize> = pairs
        .iter()
        .flat_map(|p| [p.emotion, p.cause])
        .collect();

    // clause index (1-based) -> extra signal tokens to weave in
    let mut extras: Vec<Vec<String>> = vec![Vec::new(); n + 1];
    for p in &pairs {
        extras[p.emotion].push(format!("emo{}", p.emotion_signal));
        extras[p.cause].push(format!("cau{}", p.cause_signal));
    }
    for i in 1..=n {
        if labeled.contains(&i) || !rng.gen_bool(config.decoy_rate) {
            continue;
        }
        let near = |set: &[usize]| set.iter().any(|&p| (i as i64 - p as i64).abs() <= span);
        if rng.gen_bool(0.5) {
            // Emotion decoy: only valid with no cause signal in reach.
            if !near(&cau_at) {
                extras[i].push(format!("emo{}", rng.gen_range(0..config.emotion_signals)));
                emo_at.push(i);
            }
        } else if !near(&emo_at) {
            extras[i].push(format!("cau{}", rng.gen_range(0..config.cause_signals)));
            cau_at.push(i);
        }
    }

    let mut clauses = Vec::with_capacity(n);
    for i in 1..=n {
        let len = rng.gen_range(config.clause_len_min..=config.clause_len_max);
        let mut tokens: Vec<String> = (0..len)
            .map(|_| format!("w{}", rng.gen_range(0..config.background_vocab)))
            .collect();
        for signal in &extras[i] {
            let at = rng.gen_range(0..=tokens.len());
            tokens.insert(at, signal.clone());
        }
        clauses.push(Clause { tokens });
    }

    let pair_set = pairs
        .iter()
        .map(|p| EmotionCausePair::new(p.emotion, p.cause))
        .collect::<std::collections::BTreeSet<_>>();
    Document::new(id, clauses, pair_set)
}

pub fn generate_synthetic(config: &SynthConfig, seed: u64) -> Result<Vec<Document>, CorpusError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::with_capacity(config.docs);
    for i in 0..config.docs {
        docs.push(generate_document(&mut rng, format!("synth-{i:04}"), config)?);
    }
    Ok(docs)
}
