//! JSONL corpus files: one document object per line, UTF-8.
//!
//! Wire format per line:
//! `{"id": "...", "clauses": [["tok", ...], ...], "pairs": [[emotion, cause], ...]}`
//! with 1-based clause indices. Loading rejects out-of-range indices,
//! duplicate pairs and empty clauses, reporting the offending line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Clause, CorpusError, Document, EmotionCausePair};

#[derive(Serialize, Deserialize)]
struct DocumentWire {
    id: String,
    clauses: Vec<Vec<String>>,
    pairs: Vec<[usize; 2]>,
}

impl From<&Document> for DocumentWire {
    fn from(doc: &Document) -> Self {
        DocumentWire {
            id: doc.id.clone(),
            clauses: doc.clauses.iter().map(|c| c.tokens.clone()).collect(),
            // BTreeSet iteration gives a canonical sorted order.
            pairs: doc.pairs.iter().map(|p| [p.emotion, p.cause]).collect(),
        }
    }
}

fn document_from_wire(wire: DocumentWire, line: usize) -> Result<Document, CorpusError> {
    let mut pairs = std::collections::BTreeSet::new();
    for [emotion, cause] in &wire.pairs {
        if !pairs.insert(EmotionCausePair::new(*emotion, *cause)) {
            return Err(CorpusError::InvalidLine {
                line,
                reason: format!("duplicate pair [{emotion}, {cause}]"),
            });
        }
    }
    let doc = Document {
        id: wire.id,
        clauses: wire.clauses.into_iter().map(|t| Clause { tokens: t }).collect(),
        pairs,
    };
    doc.validate().map_err(|e| CorpusError::InvalidLine {
        line,
        reason: e.to_string(),
    })?;
    Ok(doc)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>, CorpusError> {
    let reader = BufReader::new(File::open(path)?);
    let mut docs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let text = line?;
        if text.trim().is_empty() {
            continue;
        }
        let wire: DocumentWire = serde_json::from_str(&text).map_err(|source| CorpusError::Parse {
            line: line_no,
            source,
        })?;
        docs.push(document_from_wire(wire, line_no)?);
    }
    Ok(docs)
}

pub fn save_corpus(corpus: &[Document], path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let mut writer = BufWriter::new(File::create(path)?);
    for doc in corpus {
        let wire = DocumentWire::from(doc);
        let line = serde_json::to_string(&wire).expect("document serialization cannot fail");
        writeln!(writer, "{line}")?;
    }
    writer.flush()?;
    Ok(())
}
