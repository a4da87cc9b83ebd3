//! Random-walk node embeddings and skip-gram training.

mod skipgram;
mod table;
mod walks;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use skipgram::{train_skipgram, SkipGram};
pub use table::{cosine, EmbeddingTable};
pub use walks::{generate_walks, walks_to_sequences};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("invalid walk config: {0}")]
    Config(String),
    #[error("vocabulary has {0} keys after min_count filtering; at least 2 are needed")]
    Vocabulary(usize),
    #[error("no sequences to train on")]
    NoSequences,
    #[error("non-finite embedding after epoch {0}")]
    NonFinite(usize),
    #[error("vector file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkConfig {
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub window: usize,
    pub dim: usize,
    pub min_count: usize,
    /// Return bias: weight 1/p for stepping back to the previous node.
    pub p: f64,
    /// In-out bias: weight 1/q for moving two hops away.
    pub q: f64,
    pub negatives: usize,
    pub epochs: usize,
    /// Initial learning rate, decayed linearly to `lr * 1e-4`.
    pub lr: f64,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            walks_per_node: 10,
            walk_length: 80,
            window: 10,
            dim: 32,
            min_count: 1,
            p: 1.0,
            q: 1.0,
            negatives: 5,
            epochs: 5,
            lr: 0.025,
            seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<(), EmbedError> {
        let counts = [
            ("walks_per_node", self.walks_per_node),
            ("walk_length", self.walk_length),
            ("window", self.window),
            ("dim", self.dim),
            ("min_count", self.min_count),
            ("negatives", self.negatives),
            ("epochs", self.epochs),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(EmbedError::Config(format!("{name} must be >= 1")));
            }
        }
        for (name, v) in [("p", self.p), ("q", self.q), ("lr", self.lr)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(EmbedError::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Walks over `graph` and trains skip-gram on them; keys are node names.
pub fn embed_graph(graph: &crate::graph::MentionGraph, cfg: &WalkConfig) -> Result<SkipGram, EmbedError> {
    cfg.validate()?;
    let walks = generate_walks(graph, cfg);
    train_skipgram(&walks_to_sequences(graph, &walks), cfg)
}

/// SplitMix64 finalizer, used to derive independent per-walk seeds.
pub(crate) fn mix_seed(parts: &[u64]) -> u64 {
    let mut h = 0x9E37_79B9_7F4A_7C15u64;
    for &p in parts {
        let mut z = h ^ p.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}
