//! GRU emotion baseline with a trainable, randomly initialized embedding.

use std::collections::{BTreeMap, HashMap};

use affectlag_neural::{Checkpoint, Embedding, Gru, Init, Linear, NeuralError, NodeId, OptimizerConfig, Params, Tape};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{argmax, fit, Classifier, History, LoopConfig, ModelError, Result};
use crate::corpus::Emotion;
use crate::textproc::tokenize;

pub const KIND: &str = "gru_emo";
pub const UNK: &str = "<unk>";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GruConfig {
    pub hidden: usize,
    pub embed_dim: usize,
    pub min_count: usize,
    pub max_tokens: usize,
    pub optimizer: OptimizerConfig,
    pub batch_size: usize,
    pub epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for GruConfig {
    fn default() -> Self {
        Self {
            hidden: 1024,
            embed_dim: 300,
            min_count: 1,
            max_tokens: 64,
            optimizer: OptimizerConfig::adam(1e-3, 0.0),
            batch_size: 64,
            epochs: 30,
            patience: 3,
            seed: 0,
        }
    }
}

impl GruConfig {
    pub fn desk() -> Self {
        Self { hidden: 64, embed_dim: 16, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("hidden", self.hidden),
            ("embed_dim", self.embed_dim),
            ("min_count", self.min_count),
            ("max_tokens", self.max_tokens),
            ("batch_size", self.batch_size),
        ] {
            if v == 0 {
                return Err(ModelError::Config(format!("{name} must be >= 1")));
            }
        }
        self.optimizer.validate()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GruModel {
    pub cfg: GruConfig,
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    params: Params,
    embed: Embedding,
    rnn: Gru,
    out: Linear,
}

/// `<unk>` first, then tokens with at least `min_count` occurrences in
/// sorted order.
fn build_vocab<'a>(texts: impl Iterator<Item = &'a str>, cfg: &GruConfig) -> Vec<String> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for t in texts {
        for tok in tokenize(t) {
            *counts.entry(tok).or_default() += 1;
        }
    }
    let mut vocab = vec![UNK.to_string()];
    vocab.extend(counts.into_iter().filter(|&(_, c)| c >= cfg.min_count).map(|(k, _)| k));
    vocab
}

impl GruModel {
    pub fn new(cfg: GruConfig, vocab: Vec<String>) -> Result<Self> {
        cfg.validate()?;
        if vocab.first().map(String::as_str) != Some(UNK) {
            return Err(ModelError::Config(format!("vocabulary must start with {UNK}")));
        }
        let index: HashMap<String, usize> = vocab.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        if index.len() != vocab.len() {
            return Err(ModelError::Config("duplicate vocabulary entry".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut params = Params::new();
        let embed = Embedding::new(&mut params, "embed", vocab.len(), cfg.embed_dim, &mut rng);
        let rnn = Gru::new(&mut params, "rnn", cfg.embed_dim, cfg.hidden, &mut rng);
        let out = Linear::new(&mut params, "out", cfg.hidden, Emotion::ALL.len(), Init::Zeros, &mut rng);
        Ok(Self { cfg, vocab, index, params, embed, rnn, out })
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    /// Token ids; an empty text becomes a single `<unk>`.
    pub fn encode(&self, text: &str) -> Vec<usize> {
        let mut ids: Vec<usize> = tokenize(text)
            .iter()
            .take(self.cfg.max_tokens)
            .map(|t| self.index.get(t).copied().unwrap_or(0))
            .collect();
        if ids.is_empty() {
            ids.push(0);
        }
        ids
    }

    pub fn predict(&self, text: &str) -> Result<Vec<f64>> {
        Ok(self.probs(&self.encode(text))?)
    }

    pub fn classify(&self, text: &str) -> Result<Emotion> {
        Ok(Emotion::ALL[argmax(&self.predict(text)?)])
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let cfg = serde_json::to_value(&self.cfg).expect("config serializes");
        let mut ckpt = Checkpoint::new(KIND, cfg, Emotion::label_names(), &self.params);
        ckpt.extras.insert("vocab".into(), Value::from(self.vocab.clone()));
        ckpt
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        ckpt.expect_kind(KIND)?;
        let expected = Emotion::label_names();
        if ckpt.labels != expected {
            return Err(ModelError::LabelMismatch { expected, found: ckpt.labels.clone() });
        }
        let bad = |e: serde_json::Error| ModelError::Checkpoint(e.to_string());
        let cfg: GruConfig = serde_json::from_value(ckpt.config.clone()).map_err(bad)?;
        let vocab: Vec<String> = serde_json::from_value(
            ckpt.extras.get("vocab").cloned().ok_or_else(|| ModelError::Checkpoint("missing vocab".into()))?,
        )
        .map_err(bad)?;
        let mut model = Self::new(cfg, vocab)?;
        ckpt.restore_into(&mut model.params)?;
        Ok(model)
    }
}

impl Classifier for GruModel {
    type Input = Vec<usize>;

    fn classes(&self) -> usize {
        Emotion::ALL.len()
    }

    fn params(&self) -> &Params {
        &self.params
    }

    fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    fn forward(&self, tape: &mut Tape, ids: &Vec<usize>) -> Result<NodeId, NeuralError> {
        let xs = ids
            .iter()
            .map(|&i| self.embed.forward(tape, &self.params, i))
            .collect::<Result<Vec<_>, _>>()?;
        let hs = self.rnn.forward(tape, &self.params, &xs)?;
        let z = self.out.forward(tape, &self.params, *hs.last().expect("non-empty"));
        Ok(tape.softmax(z))
    }
}

/// Vocabulary is taken from the training texts.
pub fn train_gru_baseline(
    train: &[(String, Emotion)],
    valid: &[(String, Emotion)],
    cfg: &GruConfig,
) -> Result<(GruModel, History)> {
    let vocab = build_vocab(train.iter().map(|(t, _)| t.as_str()), cfg);
    let mut model = GruModel::new(cfg.clone(), vocab)?;
    let enc = |data: &[(String, Emotion)]| -> Vec<(Vec<usize>, usize)> {
        data.iter().map(|(t, e)| (model.encode(t), e.index())).collect()
    };
    let (tr, va) = (enc(train), enc(valid));
    let loop_cfg = LoopConfig {
        optimizer: cfg.optimizer.clone(),
        batch_size: cfg.batch_size,
        epochs: cfg.epochs,
        patience: cfg.patience,
        seed: cfg.seed,
    };
    let history = fit(&mut model, &tr, &va, &loop_cfg)?;
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocab_and_encoding() {
        let cfg = GruConfig { hidden: 3, embed_dim: 2, ..GruConfig::desk() };
        let vocab = build_vocab(["b a", "a c"].into_iter(), &cfg);
        assert_eq!(vocab, vec![UNK, "a", "b", "c"]);
        let m = GruModel::new(cfg, vocab).unwrap();
        assert_eq!(m.encode("c zzz a"), vec![3, 0, 1]);
        assert_eq!(m.encode(""), vec![0]);
        let p = m.predict("a b").unwrap();
        assert!(p.iter().all(|&v| (v - 1.0 / 6.0).abs() < 1e-15));
        let back = GruModel::from_checkpoint(&m.to_checkpoint()).unwrap();
        assert_eq!(back.vocab(), m.vocab());
    }
}
