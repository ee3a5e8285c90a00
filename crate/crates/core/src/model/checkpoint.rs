//! Whole-model persistence: configuration, vocabulary, and parameters in
//! one JSON file, restoring bit-identical weights.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ModelConfig, ModelError, Vocab};
use crate::numerics::{ParamSnapshot, ParamStore};

#[derive(Serialize, Deserialize)]
struct CheckpointWire {
    config: ModelConfig,
    vocab: Vec<String>,
    params: ParamSnapshot,
}

pub fn save_checkpoint(
    path: impl AsRef<Path>,
    config: &ModelConfig,
    vocab: &Vocab,
    store: &ParamStore,
) -> Result<(), ModelError> {
    let wire = CheckpointWire {
        config: config.clone(),
        vocab: vocab.tokens().to_vec(),
        params: store.snapshot(),
    };
    let json = serde_json::to_string(&wire)
        .map_err(|e| ModelError::Checkpoint(format!("encode failed: {e}")))?;
    std::fs::write(path, json).map_err(|e| ModelError::Checkpoint(format!("write failed: {e}")))?;
    Ok(())
}

pub fn load_checkpoint(
    path: impl AsRef<Path>,
) -> Result<(ModelConfig, Vocab, ParamStore), ModelError> {
    let text = std::fs::read_to_string(&path)
        .map_err(|e| ModelError::Checkpoint(format!("read failed: {e}")))?;
    let wire: CheckpointWire = serde_json::from_str(&text)
        .map_err(|e| ModelError::Checkpoint(format!("decode failed: {e}")))?;
    wire.config.validate().map_err(|e| ModelError::Checkpoint(e.to_string()))?;
    let vocab = Vocab::from_tokens(wire.vocab)
        .map_err(|e| ModelError::Checkpoint(e.to_string()))?;
    let store = ParamStore::from_snapshot(wire.params)
        .map_err(|e| ModelError::Checkpoint(e.to_string()))?;
    Ok((wire.config, vocab, store))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Clause, Document};
    use crate::model::register_params;

    fn scratch_path(name: &str) -> std::path::PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("cgr-checkpoint-{name}-{}", std::process::id()));
        p
    }

    #[test]
    fn round_trip_preserves_everything_exactly() {
        let config = ModelConfig { hidden: 8, gamma: 2, mlp_hidden: 6, embed: 4, ..Default::default() };
        let docs = vec![Document::new(
            "d",
            vec![Clause::new(["only", "clause"])],
            [],
        )
        .unwrap()];
        let vocab = Vocab::build(&docs);
        let mut store = ParamStore::new();
        register_params(&mut store, &config, vocab.len(), 77).unwrap();

        let path = scratch_path("roundtrip");
        save_checkpoint(&path, &config, &vocab, &store).unwrap();
        let (config2, vocab2, store2) = load_checkpoint(&path).unwrap();
        std::fs::remove_file(&path).ok();

        assert_eq!(config2.hidden, config.hidden);
        assert_eq!(config2.gamma, config.gamma);
        assert_eq!(vocab2.tokens(), vocab.tokens());
        assert_eq!(store2.len(), store.len());
        for (name, tensor) in store.iter() {
            let restored = store2.get(name).unwrap();
            assert_eq!(restored.values(), tensor.values(), "parameter {name}");
        }
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let path = scratch_path("corrupt");
        std::fs::write(&path, "{ not json").unwrap();
        let err = load_checkpoint(&path).unwrap_err();
        std::fs::remove_file(&path).ok();
        assert!(matches!(err, ModelError::Checkpoint(_)));
    }

    #[test]
    fn missing_file_is_a_checkpoint_error() {
        let err = load_checkpoint("/nonexistent/cgr-definitely-missing.json").unwrap_err();
        assert!(matches!(err, ModelError::Checkpoint(_)));
    }
}
