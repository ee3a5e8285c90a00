use std::collections::BTreeMap;

use super::ModelError;
use crate::corpus::Document;

/// Token to index map. Index 0 is the reserved unknown slot; every token
/// absent from the table maps there. Construction sorts tokens, so the
/// same corpus always produces the same vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: BTreeMap<String, usize>,
}

pub const UNKNOWN_TOKEN: &str = "<unk>";

impl Vocab {
    pub fn build(corpus: &[Document]) -> Vocab {
        let mut unique: std::collections::BTreeSet<&str> = std::collections::BTreeSet::new();
        for doc in corpus {
            for clause in &doc.clauses {
                unique.extend(clause.tokens.iter().map(String::as_str));
            }
        }
        let mut tokens = vec![UNKNOWN_TOKEN.to_string()];
        tokens.extend(unique.into_iter().filter(|t| *t != UNKNOWN_TOKEN).map(String::from));
        Vocab::from_tokens(tokens).expect("slot 0 was just set")
    }

    /// Rebuild from a stored token list (first entry must be the unknown
    /// slot, as produced by `tokens()`).
    pub fn from_tokens(tokens: Vec<String>) -> Result<Vocab, ModelError> {
        if tokens.first().map(String::as_str) != Some(UNKNOWN_TOKEN) {
            return Err(ModelError::Config(format!(
                "vocabulary slot 0 must be the reserved token {UNKNOWN_TOKEN:?}"
            )));
        }
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Vocab { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(0)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Clause;

    fn doc(id: &str, clauses: &[&[&str]]) -> Document {
        Document::new(
            id,
            clauses.iter().map(|c| Clause::new(c.iter().copied())).collect(),
            [],
        )
        .unwrap()
    }

    #[test]
    fn build_is_sorted_and_deterministic() {
        let corpus = vec![doc("a", &[&["zebra", "apple"], &["mango"]])];
        let v = Vocab::build(&corpus);
        assert_eq!(v.tokens(), &["<unk>", "apple", "mango", "zebra"]);
        assert_eq!(v.index_of("mango"), 2);
        assert_eq!(v.index_of("never-seen"), 0);

        let reordered = vec![doc("a", &[&["mango"], &["apple", "zebra"]])];
        assert_eq!(Vocab::build(&reordered), v);
    }

    #[test]
    fn round_trips_through_token_list() {
        let corpus = vec![doc("a", &[&["x", "y"]])];
        let v = Vocab::build(&corpus);
        let rebuilt = Vocab::from_tokens(v.tokens().to_vec()).unwrap();
        assert_eq!(rebuilt, v);
    }

    #[test]
    fn token_lists_without_the_reserved_slot_are_rejected() {
        assert!(Vocab::from_tokens(vec![]).is_err());
        assert!(Vocab::from_tokens(vec!["apple".into()]).is_err());
    }
}
