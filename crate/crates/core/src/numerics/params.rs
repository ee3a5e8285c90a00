//! Named parameter tensors, their optimizer state, and checkpoint I/O.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Gradients, NumericsError, Tensor};

/// Adam hyperparameters. `weight_decay` is decoupled: applied directly to
/// the parameter, not mixed into the moments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> AdamConfig {
        AdamConfig { learning_rate, ..AdamConfig::default() }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
struct Moments {
    m: Tensor,
    v: Tensor,
    step: u64,
}

/// Map of parameter name to tensor, with per-parameter Adam moments.
/// Shapes are fixed at registration; re-registering a name returns the
/// existing tensor untouched so model construction is idempotent.
#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    params: BTreeMap<String, Tensor>,
    moments: BTreeMap<String, Moments>,
}

/// 64-bit FNV-1a, used to derive one RNG stream per parameter name.
fn fnv1a64(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in text.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

impl ParamStore {
    pub fn new() -> ParamStore {
        ParamStore::default()
    }

    /// Registers `name` with shape `rows x cols`, drawing initial values
    /// uniformly from ±sqrt(6 / (rows + cols)) on a stream seeded by the
    /// master seed and the name. Existing entries are kept as they are,
    /// provided the shape matches.
    pub fn register(
        &mut self,
        name: &str,
        rows: usize,
        cols: usize,
        master_seed: u64,
    ) -> Result<&Tensor, NumericsError> {
        if let Some(existing) = self.params.get(name) {
            if existing.shape() != (rows, cols) {
                return Err(NumericsError::ShapeConflict {
                    name: name.to_string(),
                    existing_rows: existing.rows(),
                    existing_cols: existing.cols(),
                });
            }
            return Ok(&self.params[name]);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed ^ fnv1a64(name));
        let bound = (6.0 / (rows + cols) as f64).sqrt();
        let values = (0..rows * cols).map(|_| rng.gen_range(-bound..bound)).collect();
        self.params.insert(name.to_string(), Tensor::new(rows, cols, values));
        Ok(&self.params[name])
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.params.get(name)
    }

    pub fn values_mut(&mut self, name: &str) -> Result<&mut Tensor, NumericsError> {
        self.params
            .get_mut(name)
            .ok_or_else(|| NumericsError::UnknownParameter { name: name.to_string() })
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.params.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Tensor)> {
        self.params.iter()
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Total scalar count across all parameters.
    pub fn scalar_count(&self) -> usize {
        self.params.values().map(Tensor::len).sum()
    }

    /// One bias-corrected Adam update over every parameter. Parameters
    /// absent from `grads` see a zero gradient, so their moments decay but
    /// fresh parameters stay put.
    pub fn adam_step(
        &mut self,
        grads: &Gradients,
        config: &AdamConfig,
    ) -> Result<(), NumericsError> {
        for (name, param) in self.params.iter_mut() {
            let zero;
            let grad = match grads.get(name) {
                Some(g) => g,
                None => {
                    zero = Tensor::zeros(param.rows(), param.cols());
                    &zero
                }
            };
            if !grad.is_finite() {
                return Err(NumericsError::NonFiniteGradient { name: name.clone() });
            }
            let state = self.moments.entry(name.clone()).or_insert_with(|| Moments {
                m: Tensor::zeros(param.rows(), param.cols()),
                v: Tensor::zeros(param.rows(), param.cols()),
                step: 0,
            });
            state.step += 1;
            let t = state.step as i32;
            let m_corr = 1.0 - config.beta1.powi(t);
            let v_corr = 1.0 - config.beta2.powi(t);
            for k in 0..param.len() {
                let g = grad.values()[k];
                let m = &mut state.m.values_mut()[k];
                *m = config.beta1 * *m + (1.0 - config.beta1) * g;
                let v = &mut state.v.values_mut()[k];
                *v = config.beta2 * *v + (1.0 - config.beta2) * g * g;
                let m_hat = *m / m_corr;
                let v_hat = *v / v_corr;
                let p = &mut param.values_mut()[k];
                *p -= config.learning_rate
                    * (m_hat / (v_hat.sqrt() + config.epsilon) + config.weight_decay * *p);
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TensorWire {
    shape: [usize; 2],
    values: Vec<f64>,
}

/// Serializable view of all parameter tensors (optimizer state excluded).
#[derive(Serialize, Deserialize, Default)]
pub struct ParamSnapshot(BTreeMap<String, TensorWire>);

impl ParamStore {
    pub fn snapshot(&self) -> ParamSnapshot {
        ParamSnapshot(
            self.params
                .iter()
                .map(|(name, t)| {
                    (
                        name.clone(),
                        TensorWire { shape: [t.rows(), t.cols()], values: t.values().to_vec() },
                    )
                })
                .collect(),
        )
    }

    pub fn from_snapshot(snapshot: ParamSnapshot) -> Result<ParamStore, NumericsError> {
        let mut store = ParamStore::new();
        for (name, wire) in snapshot.0 {
            let [rows, cols] = wire.shape;
            if rows == 0 || cols == 0 || wire.values.len() != rows * cols {
                return Err(NumericsError::Checkpoint(format!(
                    "parameter '{name}' has {} values for shape {rows}x{cols}",
                    wire.values.len()
                )));
            }
            store.params.insert(name, Tensor::new(rows, cols, wire.values));
        }
        Ok(store)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), NumericsError> {
        let json = serde_json::to_string(&self.snapshot())
            .map_err(|e| NumericsError::Checkpoint(e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ParamStore, NumericsError> {
        let text = std::fs::read_to_string(path)?;
        let snapshot: ParamSnapshot =
            serde_json::from_str(&text).map_err(|e| NumericsError::Checkpoint(e.to_string()))?;
        ParamStore::from_snapshot(snapshot)
    }
}
