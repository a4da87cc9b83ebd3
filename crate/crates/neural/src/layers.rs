//! Layers built from tape primitives: linear, embedding, LSTM, Bi-LSTM, GRU
//! and context attention.
//!
//! All weight matrices start from `uniform(-INIT_SCALE, INIT_SCALE)`, biases
//! from zero. Output heads that must start at the uniform distribution use
//! [`Init::Zeros`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NeuralError, Result};
use crate::tape::{NodeId, Tape};
use crate::tensor::{ParamId, Params, Tensor};

pub const INIT_SCALE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Init {
    Uniform(f64),
    Zeros,
}

impl Init {
    fn tensor<R: Rng + ?Sized>(self, shape: &[usize], rng: &mut R) -> Tensor {
        match self {
            Init::Uniform(scale) => Tensor::uniform(shape, scale, rng),
            Init::Zeros => Tensor::zeros(shape),
        }
    }
}

fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(NeuralError::ShapeMismatch {
            context,
            expected: vec![expected],
            found: vec![found],
        })
    }
}

/// `y = W x + b`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Linear {
    pub w: ParamId,
    pub b: ParamId,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl Linear {
    pub fn new<R: Rng + ?Sized>(
        params: &mut Params,
        name: &str,
        in_dim: usize,
        out_dim: usize,
        init: Init,
        rng: &mut R,
    ) -> Self {
        let w = params.add(format!("{name}.w"), init.tensor(&[out_dim, in_dim], rng));
        let b = params.add(format!("{name}.b"), Tensor::zeros(&[out_dim]));
        Self {
            w,
            b,
            in_dim,
            out_dim,
        }
    }

    pub fn forward(&self, tape: &mut Tape, params: &Params, x: NodeId) -> NodeId {
        let w = tape.param(params, self.w);
        let b = tape.param(params, self.b);
        let wx = tape.matvec(w, x);
        tape.add(wx, b)
    }
}

/// Trainable lookup table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Embedding {
    pub table: ParamId,
    pub vocab: usize,
    pub dim: usize,
}

impl Embedding {
    pub fn new<R: Rng + ?Sized>(
        params: &mut Params,
        name: &str,
        vocab: usize,
        dim: usize,
        rng: &mut R,
    ) -> Self {
        let table = params.add(
            format!("{name}.table"),
            Tensor::uniform(&[vocab, dim], INIT_SCALE, rng),
        );
        Self { table, vocab, dim }
    }

    pub fn forward(&self, tape: &mut Tape, params: &Params, index: usize) -> Result<NodeId> {
        if index >= self.vocab {
            return Err(NeuralError::ShapeMismatch {
                context: "Embedding::forward",
                expected: vec![self.vocab],
                found: vec![index],
            });
        }
        Ok(tape.row(params, self.table, index))
    }
}

/// Single-layer LSTM with gate order (input, forget, cell, output) and
/// zero initial state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Lstm {
    /// `[4H, in + H]`, acting on `concat(x_t, h_{t-1})`.
    pub w: ParamId,
    pub b: ParamId,
    pub in_dim: usize,
    pub hidden: usize,
}

impl Lstm {
    pub fn new<R: Rng + ?Sized>(
        params: &mut Params,
        name: &str,
        in_dim: usize,
        hidden: usize,
        rng: &mut R,
    ) -> Self {
        let w = params.add(
            format!("{name}.w"),
            Tensor::uniform(&[4 * hidden, in_dim + hidden], INIT_SCALE, rng),
        );
        let b = params.add(format!("{name}.b"), Tensor::zeros(&[4 * hidden]));
        Self {
            w,
            b,
            in_dim,
            hidden,
        }
    }

    /// Hidden state after every step.
    pub fn forward(&self, tape: &mut Tape, params: &Params, xs: &[NodeId]) -> Result<Vec<NodeId>> {
        if xs.is_empty() {
            return Err(NeuralError::EmptySequence("Lstm::forward"));
        }
        let hd = self.hidden;
        let w = tape.param(params, self.w);
        let b = tape.param(params, self.b);
        let mut h = tape.zeros(hd);
        let mut c = tape.zeros(hd);
        let mut out = Vec::with_capacity(xs.len());
        for &x in xs {
            check_len("Lstm::forward", self.in_dim, tape.value(x).len())?;
            let xh = tape.concat(&[x, h]);
            let z = tape.matvec(w, xh);
            let z = tape.add(z, b);
            let i = tape.slice(z, 0, hd);
            let i = tape.sigmoid(i);
            let f = tape.slice(z, hd, hd);
            let f = tape.sigmoid(f);
            let g = tape.slice(z, 2 * hd, hd);
            let g = tape.tanh(g);
            let o = tape.slice(z, 3 * hd, hd);
            let o = tape.sigmoid(o);
            let fc = tape.mul(f, c);
            let ig = tape.mul(i, g);
            c = tape.add(fc, ig);
            let tc = tape.tanh(c);
            h = tape.mul(o, tc);
            out.push(h);
        }
        Ok(out)
    }

    /// Convenience wrapper over plain vectors (`T x in_dim` to `T x H`).
    pub fn run(&self, params: &Params, inputs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let mut tape = Tape::new();
        let xs: Vec<_> = inputs.iter().map(|x| tape.input(x.clone())).collect();
        let hs = self.forward(&mut tape, params, &xs)?;
        Ok(hs.iter().map(|&h| tape.value(h).to_vec()).collect())
    }
}

/// Forward LSTM over the sequence plus a second LSTM over the reversed
/// sequence; step `t` is `concat(fwd_t, bwd_t)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BiLstm {
    pub fwd: Lstm,
    pub bwd: Lstm,
}

impl BiLstm {
    pub fn new<R: Rng + ?Sized>(
        params: &mut Params,
        name: &str,
        in_dim: usize,
        hidden: usize,
        rng: &mut R,
    ) -> Self {
        Self {
            fwd: Lstm::new(params, &format!("{name}.fwd"), in_dim, hidden, rng),
            bwd: Lstm::new(params, &format!("{name}.bwd"), in_dim, hidden, rng),
        }
    }

    pub fn out_dim(&self) -> usize {
        self.fwd.hidden + self.bwd.hidden
    }

    pub fn forward(&self, tape: &mut Tape, params: &Params, xs: &[NodeId]) -> Result<Vec<NodeId>> {
        let fwd = self.fwd.forward(tape, params, xs)?;
        let rev: Vec<NodeId> = xs.iter().rev().copied().collect();
        let mut bwd = self.bwd.forward(tape, params, &rev)?;
        bwd.reverse();
        Ok(fwd
            .into_iter()
            .zip(bwd)
            .map(|(f, b)| tape.concat(&[f, b]))
            .collect())
    }

    pub fn run(&self, params: &Params, inputs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let mut tape = Tape::new();
        let xs: Vec<_> = inputs.iter().map(|x| tape.input(x.clone())).collect();
        let hs = self.forward(&mut tape, params, &xs)?;
        Ok(hs.iter().map(|&h| tape.value(h).to_vec()).collect())
    }
}

/// GRU cell:
/// `z = σ(W_z[x,h] + b_z)`, `r = σ(W_r[x,h] + b_r)`,
/// `n = tanh(W_n x + U_n (r ⊙ h) + b_n)`, `h' = n + z ⊙ (h - n)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Gru {
    /// `[2H, in + H]`, update gate rows first.
    pub w_gates: ParamId,
    pub b_gates: ParamId,
    pub w_in: ParamId,
    pub w_hn: ParamId,
    pub b_n: ParamId,
    pub in_dim: usize,
    pub hidden: usize,
}

impl Gru {
    pub fn new<R: Rng + ?Sized>(
        params: &mut Params,
        name: &str,
        in_dim: usize,
        hidden: usize,
        rng: &mut R,
    ) -> Self {
        let w_gates = params.add(
            format!("{name}.w_gates"),
            Tensor::uniform(&[2 * hidden, in_dim + hidden], INIT_SCALE, rng),
        );
        let b_gates = params.add(format!("{name}.b_gates"), Tensor::zeros(&[2 * hidden]));
        let w_in = params.add(
            format!("{name}.w_in"),
            Tensor::uniform(&[hidden, in_dim], INIT_SCALE, rng),
        );
        let w_hn = params.add(
            format!("{name}.w_hn"),
            Tensor::uniform(&[hidden, hidden], INIT_SCALE, rng),
        );
        let b_n = params.add(format!("{name}.b_n"), Tensor::zeros(&[hidden]));
        Self {
            w_gates,
            b_gates,
            w_in,
            w_hn,
            b_n,
            in_dim,
            hidden,
        }
    }

    pub fn forward(&self, tape: &mut Tape, params: &Params, xs: &[NodeId]) -> Result<Vec<NodeId>> {
        if xs.is_empty() {
            return Err(NeuralError::EmptySequence("Gru::forward"));
        }
        let hd = self.hidden;
        let wg = tape.param(params, self.w_gates);
        let bg = tape.param(params, self.b_gates);
        let wi = tape.param(params, self.w_in);
        let wh = tape.param(params, self.w_hn);
        let bn = tape.param(params, self.b_n);
        let mut h = tape.zeros(hd);
        let mut out = Vec::with_capacity(xs.len());
        for &x in xs {
            check_len("Gru::forward", self.in_dim, tape.value(x).len())?;
            let xh = tape.concat(&[x, h]);
            let gates = tape.matvec(wg, xh);
            let gates = tape.add(gates, bg);
            let z = tape.slice(gates, 0, hd);
            let z = tape.sigmoid(z);
            let r = tape.slice(gates, hd, hd);
            let r = tape.sigmoid(r);
            let rh = tape.mul(r, h);
            let a = tape.matvec(wi, x);
            let u = tape.matvec(wh, rh);
            let n = tape.sum(&[a, u, bn]);
            let n = tape.tanh(n);
            let diff = tape.sub(h, n);
            let zd = tape.mul(z, diff);
            h = tape.add(n, zd);
            out.push(h);
        }
        Ok(out)
    }

    pub fn run(&self, params: &Params, inputs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let mut tape = Tape::new();
        let xs: Vec<_> = inputs.iter().map(|x| tape.input(x.clone())).collect();
        let hs = self.forward(&mut tape, params, &xs)?;
        Ok(hs.iter().map(|&h| tape.value(h).to_vec()).collect())
    }
}

/// Context attention pooling:
/// `m_i = tanh(W_h h_i + b_h)`, `a = softmax_i(m_i · c_h)`, `pooled = Σ a_i h_i`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Attention {
    pub w_h: ParamId,
    pub b_h: ParamId,
    pub c_h: ParamId,
    pub state_dim: usize,
    pub attn_dim: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct AttentionOut {
    pub weights: NodeId,
    pub pooled: NodeId,
}

impl Attention {
    pub fn new<R: Rng + ?Sized>(
        params: &mut Params,
        name: &str,
        state_dim: usize,
        attn_dim: usize,
        rng: &mut R,
    ) -> Self {
        let w_h = params.add(
            format!("{name}.w_h"),
            Tensor::uniform(&[attn_dim, state_dim], INIT_SCALE, rng),
        );
        let b_h = params.add(format!("{name}.b_h"), Tensor::zeros(&[attn_dim]));
        let c_h = params.add(
            format!("{name}.c_h"),
            Tensor::uniform(&[attn_dim], INIT_SCALE, rng),
        );
        Self {
            w_h,
            b_h,
            c_h,
            state_dim,
            attn_dim,
        }
    }

    pub fn forward(
        &self,
        tape: &mut Tape,
        params: &Params,
        states: &[NodeId],
    ) -> Result<AttentionOut> {
        if states.is_empty() {
            return Err(NeuralError::EmptySequence("Attention::forward"));
        }
        let w = tape.param(params, self.w_h);
        let b = tape.param(params, self.b_h);
        let c = tape.param(params, self.c_h);
        let mut scores = Vec::with_capacity(states.len());
        for &h in states {
            check_len("Attention::forward", self.state_dim, tape.value(h).len())?;
            let m = tape.matvec(w, h);
            let m = tape.add(m, b);
            let m = tape.tanh(m);
            scores.push(tape.dot(m, c));
        }
        let scores = tape.concat(&scores);
        let weights = tape.softmax(scores);
        let terms: Vec<NodeId> = states
            .iter()
            .enumerate()
            .map(|(i, &h)| {
                let a = tape.slice(weights, i, 1);
                tape.scale_by(h, a)
            })
            .collect();
        let pooled = tape.sum(&terms);
        Ok(AttentionOut { weights, pooled })
    }

    /// Returns `(weights, pooled)` for plain state vectors.
    pub fn run(&self, params: &Params, states: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut tape = Tape::new();
        let hs: Vec<_> = states.iter().map(|h| tape.input(h.clone())).collect();
        let out = self.forward(&mut tape, params, &hs)?;
        Ok((
            tape.value(out.weights).to_vec(),
            tape.value(out.pooled).to_vec(),
        ))
    }
}
