//! First-order optimizers: Adadelta, Adam, and SGD with momentum.
//!
//! L2 regularization is folded into the gradient (`g += weight_decay * w`)
//! before each update rule runs.

use serde::{Deserialize, Serialize};

use crate::error::{NeuralError, Result};
use crate::tensor::Params;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adadelta,
    Adam,
    SgdMomentum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub rho: f64,
    pub eps: f64,
    pub momentum: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self::adam(1e-3, 0.0)
    }
}

impl OptimizerConfig {
    pub fn adam(lr: f64, weight_decay: f64) -> Self {
        Self {
            kind: OptimizerKind::Adam,
            lr,
            weight_decay,
            beta1: 0.9,
            beta2: 0.999,
            rho: 0.9,
            eps: 1e-8,
            momentum: 0.0,
        }
    }

    pub fn adadelta(lr: f64, weight_decay: f64) -> Self {
        Self {
            kind: OptimizerKind::Adadelta,
            eps: 1e-6,
            ..Self::adam(lr, weight_decay)
        }
    }

    pub fn sgd_momentum(lr: f64, momentum: f64) -> Self {
        Self {
            kind: OptimizerKind::SgdMomentum,
            momentum,
            ..Self::adam(lr, 0.0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(NeuralError::InvalidConfig(msg.to_string()));
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr must be positive");
        }
        if !(self.weight_decay >= 0.0) {
            return bad("weight_decay must be non-negative");
        }
        if !(self.eps > 0.0) {
            return bad("eps must be positive");
        }
        let unit = |v: f64| (0.0..1.0).contains(&v);
        match self.kind {
            OptimizerKind::Adam if !(unit(self.beta1) && unit(self.beta2)) => {
                bad("adam betas must lie in [0, 1)")
            }
            OptimizerKind::Adadelta if !unit(self.rho) => bad("adadelta rho must lie in [0, 1)"),
            OptimizerKind::SgdMomentum if !unit(self.momentum) => {
                bad("momentum must lie in [0, 1)")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Default)]
struct Slot {
    first: Vec<f64>,
    second: Vec<f64>,
}

/// Stateful optimizer bound to one [`Params`] layout.
#[derive(Clone, Debug)]
pub struct Optimizer {
    cfg: OptimizerConfig,
    slots: Vec<Slot>,
    steps: u64,
}

impl Optimizer {
    pub fn new(cfg: OptimizerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            slots: Vec::new(),
            steps: 0,
        })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.cfg
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Applies one update from the gradients currently stored in `params`.
    /// Gradients are left untouched; callers zero them between steps.
    pub fn step(&mut self, params: &mut Params) {
        let cfg = self.cfg.clone();
        self.steps += 1;
        let t = self.steps as i32;
        let tensors = params.tensors_mut();
        if self.slots.len() < tensors.len() {
            self.slots.resize_with(tensors.len(), Slot::default);
        }
        for (tensor, slot) in tensors.iter_mut().zip(self.slots.iter_mut()) {
            let Some((w, g)) = tensor.data_and_grad_mut() else {
                continue;
            };
            if slot.first.len() != w.len() {
                slot.first = vec![0.0; w.len()];
                slot.second = vec![0.0; w.len()];
            }
            for i in 0..w.len() {
                let grad = g[i] + cfg.weight_decay * w[i];
                match cfg.kind {
                    OptimizerKind::Adam => {
                        let m = &mut slot.first[i];
                        let v = &mut slot.second[i];
                        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * grad;
                        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * grad * grad;
                        let m_hat = *m / (1.0 - cfg.beta1.powi(t));
                        let v_hat = *v / (1.0 - cfg.beta2.powi(t));
                        w[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
                    }
                    OptimizerKind::Adadelta => {
                        let sq = &mut slot.first[i];
                        let acc = &mut slot.second[i];
                        *sq = cfg.rho * *sq + (1.0 - cfg.rho) * grad * grad;
                        let delta = (*acc + cfg.eps).sqrt() / (*sq + cfg.eps).sqrt() * grad;
                        *acc = cfg.rho * *acc + (1.0 - cfg.rho) * delta * delta;
                        w[i] -= cfg.lr * delta;
                    }
                    OptimizerKind::SgdMomentum => {
                        let buf = &mut slot.first[i];
                        *buf = cfg.momentum * *buf + grad;
                        w[i] -= cfg.lr * *buf;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn bowl(cfg: OptimizerConfig, steps: usize) -> Vec<f64> {
        let mut params = Params::new();
        let id = params.add("w", Tensor::from_vec(&[1], vec![1.0]).unwrap());
        let mut opt = Optimizer::new(cfg).unwrap();
        let mut trace = vec![1.0];
        for _ in 0..steps {
            params.zero_grad();
            let w = params.get(id).data()[0];
            params.get_mut(id).grad_mut().unwrap()[0] = 2.0 * w;
            opt.step(&mut params);
            trace.push(params.get(id).data()[0]);
        }
        trace
    }

    #[test]
    fn adam_zero_gradient_leaves_params() {
        let mut params = Params::new();
        let id = params.add("w", Tensor::from_vec(&[3], vec![0.5, -1.0, 2.0]).unwrap());
        let mut opt = Optimizer::new(OptimizerConfig::adam(0.01, 0.0)).unwrap();
        for _ in 0..5 {
            opt.step(&mut params);
        }
        assert_eq!(params.get(id).data(), &[0.5, -1.0, 2.0]);
    }

    #[test]
    fn adam_converges_on_quadratic_bowl() {
        // Reference trajectory computed with an independent scalar Adam loop.
        let trace = bowl(OptimizerConfig::adam(0.01, 0.0), 300);
        assert!((trace[100] - 0.2244460452318788).abs() < 1e-12);
        assert!((trace[200] - 0.015572485317246587).abs() < 1e-12);
        assert!(trace[300].abs() < 1e-2);
    }

    #[test]
    fn adadelta_decreases_loss_monotonically() {
        let trace = bowl(OptimizerConfig::adadelta(1.0, 0.0), 50);
        for pair in trace.windows(2) {
            assert!(pair[1] * pair[1] < pair[0] * pair[0]);
        }
    }

    #[test]
    fn sgd_momentum_converges() {
        let trace = bowl(OptimizerConfig::sgd_momentum(0.05, 0.9), 300);
        assert!(trace.last().unwrap().abs() < 1e-3);
    }

    #[test]
    fn weight_decay_shrinks_without_gradient() {
        let mut params = Params::new();
        let id = params.add("w", Tensor::from_vec(&[1], vec![1.0]).unwrap());
        let mut opt = Optimizer::new(OptimizerConfig::sgd_momentum(0.1, 0.0)).unwrap();
        let mut cfg = opt.config().clone();
        cfg.weight_decay = 0.5;
        opt = Optimizer::new(cfg).unwrap();
        opt.step(&mut params);
        assert!((params.get(id).data()[0] - 0.95).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(Optimizer::new(OptimizerConfig::adam(0.0, 0.0)).is_err());
        assert!(Optimizer::new(OptimizerConfig::adam(0.1, -1.0)).is_err());
    }
}
