use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EmbedError, EmbeddingTable, WalkConfig};

const MIN_LR_FRACTION: f64 = 1e-4;

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Trained skip-gram model: input (center) vectors form the embedding table,
/// output (context) vectors are kept for scoring pairs.
#[derive(Clone, Debug)]
pub struct SkipGram {
    pub table: EmbeddingTable,
    pub context: Vec<f64>,
    /// Mean negative-sampling loss per (center, context) pair, per epoch.
    pub epoch_losses: Vec<f64>,
}

impl SkipGram {
    /// Negative-sampling loss term `-ln σ(v_center · u_context)`.
    pub fn pair_loss(&self, center: &str, context: &str) -> Option<f64> {
        let v = self.table.get(center)?;
        let j = self.table.keys().iter().position(|k| k == context)?;
        let d = self.table.dim();
        let u = &self.context[j * d..(j + 1) * d];
        let s: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
        Some(-sigmoid(s).max(1e-300).ln())
    }
}

/// Vocabulary sorted by descending count, ties by key.
fn build_vocab(sequences: &[Vec<String>], min_count: usize) -> (Vec<String>, Vec<u64>) {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for seq in sequences {
        for k in seq {
            *counts.entry(k.as_str()).or_default() += 1;
        }
    }
    let mut vocab: Vec<(&str, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count as u64)
        .collect();
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    vocab.into_iter().map(|(k, c)| (k.to_string(), c)).unzip()
}

/// Skip-gram with negative sampling from the unigram^0.75 distribution.
/// Single-threaded; deterministic for a given config.
pub fn train_skipgram(sequences: &[Vec<String>], cfg: &WalkConfig) -> Result<SkipGram, EmbedError> {
    cfg.validate()?;
    if sequences.iter().all(Vec::is_empty) {
        return Err(EmbedError::NoSequences);
    }
    let (keys, counts) = build_vocab(sequences, cfg.min_count);
    if keys.len() < 2 {
        return Err(EmbedError::Vocabulary(keys.len()));
    }
    let index: HashMap<&str, usize> = keys.iter().enumerate().map(|(i, k)| (k.as_str(), i)).collect();
    let encoded: Vec<Vec<usize>> = sequences
        .iter()
        .map(|s| s.iter().filter_map(|k| index.get(k.as_str()).copied()).collect())
        .collect();
    let noise = WeightedIndex::new(counts.iter().map(|&c| (c as f64).powf(0.75)))
        .expect("positive counts");

    let d = cfg.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut input: Vec<f64> = (0..keys.len() * d)
        .map(|_| (rng.random::<f64>() - 0.5) / d as f64)
        .collect();
    let mut output = vec![0.0; keys.len() * d];

    let total_tokens: usize = encoded.iter().map(Vec::len).sum::<usize>() * cfg.epochs;
    let mut processed = 0usize;
    let mut grad = vec![0.0; d];
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let (mut loss_sum, mut pairs) = (0.0, 0usize);
        for seq in &encoded {
            for (pos, &center) in seq.iter().enumerate() {
                let lr = cfg.lr
                    * (1.0 - processed as f64 / total_tokens as f64).max(MIN_LR_FRACTION);
                processed += 1;
                let lo = pos.saturating_sub(cfg.window);
                let hi = (pos + cfg.window + 1).min(seq.len());
                for (cpos, &ctx) in seq.iter().enumerate().take(hi).skip(lo) {
                    if cpos == pos {
                        continue;
                    }
                    let v = &mut input[center * d..(center + 1) * d];
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    for k in 0..=cfg.negatives {
                        let (target, label) = if k == 0 {
                            (ctx, 1.0)
                        } else {
                            let t = noise.sample(&mut rng);
                            if t == ctx {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let u = &mut output[target * d..(target + 1) * d];
                        let s: f64 = v.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
                        let sig = sigmoid(s);
                        let prob = if label == 1.0 { sig } else { 1.0 - sig };
                        loss_sum -= prob.max(1e-300).ln();
                        let g = lr * (label - sig);
                        for i in 0..d {
                            grad[i] += g * u[i];
                            u[i] += g * v[i];
                        }
                    }
                    for (vi, gi) in v.iter_mut().zip(&grad) {
                        *vi += gi;
                    }
                    pairs += 1;
                }
            }
        }
        if input.iter().chain(&output).any(|x| !x.is_finite()) {
            return Err(EmbedError::NonFinite(epoch));
        }
        epoch_losses.push(if pairs == 0 { 0.0 } else { loss_sum / pairs as f64 });
    }
    Ok(SkipGram {
        table: EmbeddingTable::new(keys, input, d)?,
        context: output,
        epoch_losses,
    })
}
