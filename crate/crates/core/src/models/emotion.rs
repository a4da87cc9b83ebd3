//! Bi-LSTM + attention emotion classifier and its zero-shot application to
//! target posts.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use affectlag_neural::{Attention, BiLstm, Checkpoint, Init, Linear, NeuralError, NodeId, OptimizerConfig, Params, Tape};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{lookup, table_from_value, table_to_value};
use super::{argmax, fit, Classifier, History, LoopConfig, ModelError, Result};
use crate::corpus::{Corpus, Emotion};
use crate::embed::EmbeddingTable;
use crate::series::EmotionMap;
use crate::textproc::tokenize;

pub const KIND: &str = "bilstm_att_emo";
/// Label for posts whose top probability falls below the threshold.
pub const NO_EMOTION: &str = "ne";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmotionConfig {
    pub classes: usize,
    pub lstm_unit: usize,
    pub attn_dim: usize,
    pub max_tokens: usize,
    pub optimizer: OptimizerConfig,
    pub batch_size: usize,
    pub epochs: usize,
    pub patience: usize,
    pub seed: u64,
    /// Posts whose top probability is below this get [`NO_EMOTION`]; 0 disables.
    pub ne_threshold: f64,
}

impl Default for EmotionConfig {
    fn default() -> Self {
        Self {
            classes: Emotion::ALL.len(),
            lstm_unit: 150,
            attn_dim: 300,
            max_tokens: 64,
            optimizer: OptimizerConfig::adam(0.01, 1e-4),
            batch_size: 32,
            epochs: 30,
            patience: 3,
            seed: 0,
            ne_threshold: 0.0,
        }
    }
}

impl EmotionConfig {
    pub fn desk() -> Self {
        Self { lstm_unit: 16, attn_dim: 16, batch_size: 16, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes != Emotion::ALL.len() {
            return Err(ModelError::Config(format!("classes must be {}", Emotion::ALL.len())));
        }
        if !(0.0..=1.0).contains(&self.ne_threshold) {
            return Err(ModelError::Config("ne_threshold must lie in [0, 1]".into()));
        }
        for (name, v) in [
            ("lstm_unit", self.lstm_unit),
            ("attn_dim", self.attn_dim),
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
pub struct EmotionModel {
    pub cfg: EmotionConfig,
    words: EmbeddingTable,
    params: Params,
    rnn: BiLstm,
    attn: Attention,
    out: Linear,
}

impl EmotionModel {
    pub fn new(cfg: EmotionConfig, words: EmbeddingTable) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut params = Params::new();
        let rnn = BiLstm::new(&mut params, "rnn", words.dim(), cfg.lstm_unit, &mut rng);
        let attn = Attention::new(&mut params, "attn", rnn.out_dim(), cfg.attn_dim, &mut rng);
        let out = Linear::new(&mut params, "out", rnn.out_dim(), cfg.classes, Init::Zeros, &mut rng);
        Ok(Self { cfg, words, params, rnn, attn, out })
    }

    pub fn words(&self) -> &EmbeddingTable {
        &self.words
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn prepare(&self, text: &str) -> Vec<Vec<f64>> {
        let mut toks = tokenize(text);
        toks.truncate(self.cfg.max_tokens);
        lookup(&self.words, &toks)
    }

    /// Probabilities in [`Emotion::ALL`] order.
    pub fn predict(&self, text: &str) -> Result<Vec<f64>> {
        Ok(self.probs(&self.prepare(text))?)
    }

    /// Attention weights over the tokens of `text` (empty for no tokens).
    pub fn attention(&self, text: &str) -> Result<Vec<f64>> {
        let x = self.prepare(text);
        if x.is_empty() {
            return Ok(Vec::new());
        }
        let hs = self.rnn.run(&self.params, &x)?;
        Ok(self.attn.run(&self.params, &hs)?.0)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let cfg = serde_json::to_value(&self.cfg).expect("config serializes");
        let mut ckpt = Checkpoint::new(KIND, cfg, Emotion::label_names(), &self.params);
        ckpt.extras.insert("words".into(), table_to_value(&self.words));
        ckpt
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        ckpt.expect_kind(KIND)?;
        let expected = Emotion::label_names();
        if ckpt.labels != expected {
            return Err(ModelError::LabelMismatch { expected, found: ckpt.labels.clone() });
        }
        let cfg: EmotionConfig =
            serde_json::from_value(ckpt.config.clone()).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        let words = table_from_value(
            ckpt.extras.get("words").ok_or_else(|| ModelError::Checkpoint("missing words table".into()))?,
        )?;
        let mut model = Self::new(cfg, words)?;
        ckpt.restore_into(&mut model.params)?;
        Ok(model)
    }
}

impl Classifier for EmotionModel {
    type Input = Vec<Vec<f64>>;

    fn classes(&self) -> usize {
        self.cfg.classes
    }

    fn params(&self) -> &Params {
        &self.params
    }

    fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    fn forward(&self, tape: &mut Tape, x: &Vec<Vec<f64>>) -> Result<NodeId, NeuralError> {
        let pooled = if x.is_empty() {
            tape.zeros(self.rnn.out_dim())
        } else {
            let xs: Vec<NodeId> = x.iter().map(|v| tape.input(v.clone())).collect();
            let hs = self.rnn.forward(tape, &self.params, &xs)?;
            self.attn.forward(tape, &self.params, &hs)?.pooled
        };
        let z = self.out.forward(tape, &self.params, pooled);
        Ok(tape.softmax(z))
    }
}

/// `(text, label)` for every labelled post, in corpus order.
pub fn emotion_examples(corpus: &Corpus) -> Vec<(String, Emotion)> {
    corpus
        .posts()
        .filter_map(|p| p.emotion_label.map(|e| (p.text.clone(), e)))
        .collect()
}

pub fn train_emotion(
    train: &[(String, Emotion)],
    valid: &[(String, Emotion)],
    words: EmbeddingTable,
    cfg: &EmotionConfig,
) -> Result<(EmotionModel, History)> {
    let mut model = EmotionModel::new(cfg.clone(), words)?;
    let prep = |data: &[(String, Emotion)]| -> Vec<(Vec<Vec<f64>>, usize)> {
        data.par_iter().map(|(t, e)| (model.prepare(t), e.index())).collect()
    };
    let (tr, va) = (prep(train), prep(valid));
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

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmotionPrediction {
    pub post_id: String,
    pub user_id: String,
    /// An emotion name or [`NO_EMOTION`].
    pub label: String,
    pub probs: Vec<f64>,
}

/// Labels every post of `corpus` with the source model, unchanged. A post
/// whose top probability is below `ne_threshold` gets [`NO_EMOTION`].
pub fn transfer_classify_emotion(
    corpus: &Corpus,
    model: &EmotionModel,
    ne_threshold: f64,
) -> Result<Vec<EmotionPrediction>> {
    let posts: Vec<_> = corpus.posts().collect();
    posts
        .par_iter()
        .map(|p| {
            let probs = model.predict(&p.text)?;
            let k = argmax(&probs);
            let label = if probs[k] < ne_threshold {
                NO_EMOTION.to_string()
            } else {
                Emotion::ALL[k].as_str().to_string()
            };
            Ok(EmotionPrediction { post_id: p.post_id.clone(), user_id: p.user_id.clone(), label, probs })
        })
        .collect()
}

/// One JSON object per line.
pub fn write_emotion_predictions<W: Write>(mut w: W, preds: &[EmotionPrediction]) -> Result<()> {
    for p in preds {
        serde_json::to_writer(&mut w, p).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads predictions back as a post → emotion map; [`NO_EMOTION`] posts are
/// left out.
pub fn read_emotion_predictions<R: BufRead>(r: R) -> Result<EmotionMap> {
    let mut out = HashMap::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| ModelError::Predictions { line: i + 1, message };
        let p: EmotionPrediction = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        if p.label == NO_EMOTION {
            continue;
        }
        let e = Emotion::parse(&p.label).ok_or_else(|| bad(format!("unknown label {:?}", p.label)))?;
        if out.insert(p.post_id.clone(), e).is_some() {
            return Err(bad(format!("duplicate post_id {:?}", p.post_id)));
        }
    }
    Ok(out)
}
