//! Minimal `f64` autodiff core for recurrent text classifiers.
//!
//! The building blocks are deliberately small: a [`Tape`] of eagerly
//! evaluated vector operations, parameter storage in [`Params`], a handful of
//! layers, cross-entropy, and three optimizers.

pub mod checkpoint;
pub mod error;
pub mod gradcheck;
pub mod layers;
pub mod loss;
pub mod optim;
pub mod tape;
pub mod tensor;

pub use checkpoint::{Checkpoint, NamedTensor, CHECKPOINT_MAGIC};
pub use error::{NeuralError, Result};
pub use layers::{Attention, AttentionOut, BiLstm, Embedding, Gru, Init, Linear, Lstm};
pub use loss::{cross_entropy, mean_cross_entropy};
pub use optim::{Optimizer, OptimizerConfig, OptimizerKind};
pub use tape::{softmax, NodeId, Tape};
pub use tensor::{ParamId, Params, Tensor};
