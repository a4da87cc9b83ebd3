//! Frozen token features: a shared word/emoji table looked up per token.

use serde_json::{json, Value};

use super::{ModelError, Result};
use crate::corpus::Corpus;
use crate::embed::{train_skipgram, EmbeddingTable, WalkConfig};
use crate::textproc::tokenize;

/// Token sequences for word-vector training: every post, description and
/// location in corpus order.
pub fn word_sequences(corpus: &Corpus) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for user in &corpus.users {
        for text in [&user.description, &user.location] {
            let toks = tokenize(text);
            if !toks.is_empty() {
                out.push(toks);
            }
        }
        for post in &user.posts {
            let toks = tokenize(&post.text);
            if !toks.is_empty() {
                out.push(toks);
            }
        }
    }
    out
}

/// Skip-gram vectors over [`word_sequences`]; words and emoji share one table.
pub fn train_word_table(corpus: &Corpus, cfg: &WalkConfig) -> Result<EmbeddingTable> {
    Ok(train_skipgram(&word_sequences(corpus), cfg)?.table)
}

/// Out-of-vocabulary tokens read as zeros.
pub(crate) fn lookup<S: AsRef<str>>(table: &EmbeddingTable, tokens: &[S]) -> Vec<Vec<f64>> {
    tokens.iter().map(|t| table.get_or_zeros(t.as_ref()).to_vec()).collect()
}

pub fn table_to_value(table: &EmbeddingTable) -> Value {
    json!({ "dim": table.dim(), "keys": table.keys(), "matrix": table.matrix() })
}

pub fn table_from_value(v: &Value) -> Result<EmbeddingTable> {
    let bad = |m: &str| ModelError::Checkpoint(format!("embedding table: {m}"));
    let dim = v.get("dim").and_then(Value::as_u64).ok_or_else(|| bad("missing dim"))? as usize;
    let keys: Vec<String> = serde_json::from_value(v.get("keys").cloned().ok_or_else(|| bad("missing keys"))?)
        .map_err(|e| bad(&e.to_string()))?;
    let matrix: Vec<f64> = serde_json::from_value(v.get("matrix").cloned().ok_or_else(|| bad("missing matrix"))?)
        .map_err(|e| bad(&e.to_string()))?;
    Ok(EmbeddingTable::new(keys, matrix, dim)?)
}
