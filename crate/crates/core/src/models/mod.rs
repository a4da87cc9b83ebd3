//! Trainable classifiers: the joint user-type model, the attention emotion
//! model, a GRU baseline, and zero-shot emotion transfer.

pub mod emotion;
pub mod features;
pub mod gru;
pub mod metrics;
pub mod yun;

use std::io::Write;

use affectlag_neural::{
    cross_entropy, mean_cross_entropy, NeuralError, NodeId, Optimizer, OptimizerConfig, Params, Tape,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::EmbedError;

pub use emotion::{
    emotion_examples,
    read_emotion_predictions, train_emotion, transfer_classify_emotion, write_emotion_predictions,
    EmotionConfig, EmotionModel, EmotionPrediction, NO_EMOTION,
};
pub use features::{table_from_value, table_to_value, train_word_table, word_sequences};
pub use gru::{train_gru_baseline, GruConfig, GruModel};
pub use metrics::{accuracy, argmax, confusion_matrix, macro_f1};
pub use yun::{classify_users, train_yun, UserPrediction, UserRepresentation, YunConfig, YunModel};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{0}")]
    Neural(#[from] NeuralError),
    #[error("{0}")]
    Embed(#[from] EmbedError),
    #[error("invalid model config: {0}")]
    Config(String),
    #[error("{0} split is empty")]
    EmptySplit(&'static str),
    #[error("user {0} has no user type label")]
    MissingLabel(String),
    #[error("checkpoint labels {found:?} do not match {expected:?}")]
    LabelMismatch { expected: Vec<String>, found: Vec<String> },
    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
    #[error("non-finite parameters after epoch {0}")]
    NonFinite(usize),
    #[error("predictions line {line}: {message}")]
    Predictions { line: usize, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

/// One row of a training history. Epoch 0 is the untrained model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub valid_loss: f64,
    pub valid_acc: f64,
    pub valid_macro_f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
}

impl History {
    pub fn best(&self) -> &EpochRecord {
        &self.epochs[self.best_epoch]
    }

    pub fn initial(&self) -> &EpochRecord {
        &self.epochs[0]
    }

    pub fn max_train_acc(&self) -> f64 {
        self.epochs.iter().map(|e| e.train_acc).fold(0.0, f64::max)
    }

    /// `epoch,train_loss,valid_loss,valid_acc,valid_macro_f1`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["epoch", "train_loss", "valid_loss", "valid_acc", "valid_macro_f1"])?;
        for e in &self.epochs {
            wtr.write_record([
                e.epoch.to_string(),
                e.train_loss.to_string(),
                e.valid_loss.to_string(),
                e.valid_acc.to_string(),
                e.valid_macro_f1.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Loop settings shared by every classifier.
#[derive(Clone, Debug)]
pub(crate) struct LoopConfig {
    pub optimizer: OptimizerConfig,
    pub batch_size: usize,
    pub epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

/// A softmax classifier over prepared inputs.
pub(crate) trait Classifier: Sync {
    type Input: Sync;

    fn classes(&self) -> usize;
    fn params(&self) -> &Params;
    fn params_mut(&mut self) -> &mut Params;
    /// Probability node for one input.
    fn forward(&self, tape: &mut Tape, input: &Self::Input) -> Result<NodeId, NeuralError>;

    fn probs(&self, input: &Self::Input) -> Result<Vec<f64>, NeuralError> {
        let mut tape = Tape::new();
        let p = self.forward(&mut tape, input)?;
        Ok(tape.value(p).to_vec())
    }
}

pub(crate) struct Eval {
    pub loss: f64,
    pub acc: f64,
    pub macro_f1: f64,
}

pub(crate) fn evaluate<M: Classifier>(model: &M, data: &[(M::Input, usize)]) -> Result<Eval> {
    let probs: Vec<Vec<f64>> = data
        .par_iter()
        .map(|(x, _)| model.probs(x))
        .collect::<Result<_, _>>()?;
    let gold: Vec<usize> = data.iter().map(|d| d.1).collect();
    let pred: Vec<usize> = probs.iter().map(|p| argmax(p)).collect();
    Ok(Eval {
        loss: cross_entropy(&probs, &gold)?,
        acc: accuracy(&pred, &gold),
        macro_f1: macro_f1(&pred, &gold, model.classes()),
    })
}

/// Mini-batch training with early stopping on validation loss. Leaves the
/// model at its best-validation parameters.
pub(crate) fn fit<M: Classifier>(
    model: &mut M,
    train: &[(M::Input, usize)],
    valid: &[(M::Input, usize)],
    cfg: &LoopConfig,
) -> Result<History> {
    if train.is_empty() {
        return Err(ModelError::EmptySplit("train"));
    }
    if valid.is_empty() {
        return Err(ModelError::EmptySplit("valid"));
    }
    if cfg.batch_size == 0 {
        return Err(ModelError::Config("batch_size must be >= 1".into()));
    }
    let mut opt = Optimizer::new(cfg.optimizer.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0f_7a1e);
    let record = |model: &M, epoch: usize| -> Result<EpochRecord> {
        let t = evaluate(model, train)?;
        let v = evaluate(model, valid)?;
        Ok(EpochRecord {
            epoch,
            train_loss: t.loss,
            train_acc: t.acc,
            valid_loss: v.loss,
            valid_acc: v.acc,
            valid_macro_f1: v.macro_f1,
        })
    };

    let mut epochs = vec![record(model, 0)?];
    let mut best_epoch = 0;
    let mut best_params = model.params().clone();
    let mut rises = 0;
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            model.params_mut().zero_grad();
            for &i in batch {
                let (x, y) = &train[i];
                let mut tape = Tape::new();
                let p = model.forward(&mut tape, x)?;
                let loss = mean_cross_entropy(&mut tape, &[p], &[*y])?;
                tape.backward(loss, model.params_mut());
            }
            model.params_mut().scale_grads(1.0 / batch.len() as f64);
            opt.step(model.params_mut());
        }
        if !model.params().all_finite() {
            return Err(ModelError::NonFinite(epoch));
        }
        let rec = record(model, epoch)?;
        let prev = epochs.last().expect("epoch 0 recorded").valid_loss;
        rises = if rec.valid_loss > prev { rises + 1 } else { 0 };
        if rec.valid_loss < epochs[best_epoch].valid_loss {
            best_epoch = epoch;
            best_params = model.params().clone();
        }
        epochs.push(rec);
        if rises >= cfg.patience {
            break;
        }
    }
    model.params_mut().copy_values_from(&best_params)?;
    Ok(History { epochs, best_epoch })
}
