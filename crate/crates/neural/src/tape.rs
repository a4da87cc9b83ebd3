//! Reverse-mode automatic differentiation over a linear tape.
//!
//! Every operation is evaluated eagerly and appended to the tape. Calling
//! [`Tape::backward`] walks the tape in reverse and accumulates gradients
//! into the trainable tensors of a [`Params`] collection. Values are 1-D
//! vectors except parameter leaves, which may be matrices.

use std::collections::HashMap;

use crate::tensor::{ParamId, Params};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

/// Log-probabilities below this are clamped (and carry no gradient).
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
enum Op {
    Input,
    Param(ParamId),
    Row(ParamId, usize),
    MatVec(NodeId, NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    ScaleBy(NodeId, NodeId),
    Sigmoid(NodeId),
    Tanh(NodeId),
    Relu(NodeId),
    Slice(NodeId, usize),
    Concat(Vec<NodeId>),
    Dot(NodeId, NodeId),
    Softmax(NodeId),
    NegLog(NodeId, usize),
    Sum(Vec<NodeId>),
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    shape: Vec<usize>,
    value: Vec<f64>,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    param_nodes: HashMap<ParamId, NodeId>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable softmax (max subtraction).
pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = xs.iter().map(|&x| (x - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0].value
    }

    pub fn shape(&self, id: NodeId) -> &[usize] {
        &self.nodes[id.0].shape
    }

    /// Scalar value of a one-element node.
    pub fn scalar(&self, id: NodeId) -> f64 {
        let v = self.value(id);
        assert_eq!(v.len(), 1, "scalar() on a node with {} elements", v.len());
        v[0]
    }

    fn push(&mut self, op: Op, shape: Vec<usize>, value: Vec<f64>) -> NodeId {
        debug_assert!(
            value.iter().all(|v| v.is_finite()),
            "non-finite value produced by {op:?}"
        );
        self.nodes.push(Node { op, shape, value });
        NodeId(self.nodes.len() - 1)
    }

    fn vec_len(&self, id: NodeId) -> usize {
        let shape = self.shape(id);
        assert_eq!(shape.len(), 1, "expected a vector, found shape {shape:?}");
        shape[0]
    }

    fn same_len(&self, a: NodeId, b: NodeId) -> usize {
        let (la, lb) = (self.vec_len(a), self.vec_len(b));
        assert_eq!(la, lb, "operand length mismatch");
        la
    }

    /// Constant input vector (receives no gradient outside the tape).
    pub fn input(&mut self, value: Vec<f64>) -> NodeId {
        let n = value.len();
        self.push(Op::Input, vec![n], value)
    }

    pub fn zeros(&mut self, n: usize) -> NodeId {
        self.input(vec![0.0; n])
    }

    /// Leaf for a whole parameter tensor. Repeated calls reuse one node.
    pub fn param(&mut self, params: &Params, id: ParamId) -> NodeId {
        if let Some(&node) = self.param_nodes.get(&id) {
            return node;
        }
        let t = params.get(id);
        let node = self.push(Op::Param(id), t.shape().to_vec(), t.data().to_vec());
        self.param_nodes.insert(id, node);
        node
    }

    /// One row of a 2-D parameter, as used by embedding lookups.
    pub fn row(&mut self, params: &Params, id: ParamId, row: usize) -> NodeId {
        let t = params.get(id);
        let shape = t.shape();
        assert_eq!(shape.len(), 2, "row() on a non-matrix parameter");
        assert!(row < shape[0], "row {row} out of range for {shape:?}");
        let cols = shape[1];
        let value = t.data()[row * cols..(row + 1) * cols].to_vec();
        self.push(Op::Row(id, row), vec![cols], value)
    }

    /// `W x` for a `[m, n]` matrix node and an `[n]` vector node.
    pub fn matvec(&mut self, w: NodeId, x: NodeId) -> NodeId {
        let ws = self.shape(w);
        assert_eq!(ws.len(), 2, "matvec weight must be a matrix");
        let (m, n) = (ws[0], ws[1]);
        assert_eq!(self.vec_len(x), n, "matvec inner dimension mismatch");
        let wv = &self.nodes[w.0].value;
        let xv = &self.nodes[x.0].value;
        let out = (0..m)
            .map(|i| {
                wv[i * n..(i + 1) * n]
                    .iter()
                    .zip(xv)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        self.push(Op::MatVec(w, x), vec![m], out)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let n = self.same_len(a, b);
        let out = self.zip_values(a, b, |x, y| x + y);
        self.push(Op::Add(a, b), vec![n], out)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let n = self.same_len(a, b);
        let out = self.zip_values(a, b, |x, y| x - y);
        self.push(Op::Sub(a, b), vec![n], out)
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let n = self.same_len(a, b);
        let out = self.zip_values(a, b, |x, y| x * y);
        self.push(Op::Mul(a, b), vec![n], out)
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> NodeId {
        let n = self.vec_len(a);
        let out = self.value(a).iter().map(|x| x * c).collect();
        self.push(Op::Scale(a, c), vec![n], out)
    }

    /// Vector `a` times the one-element node `s`.
    pub fn scale_by(&mut self, a: NodeId, s: NodeId) -> NodeId {
        let n = self.vec_len(a);
        let c = self.scalar(s);
        let out = self.value(a).iter().map(|x| x * c).collect();
        self.push(Op::ScaleBy(a, s), vec![n], out)
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let n = self.vec_len(a);
        let out = self.value(a).iter().map(|&x| sigmoid(x)).collect();
        self.push(Op::Sigmoid(a), vec![n], out)
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        let n = self.vec_len(a);
        let out = self.value(a).iter().map(|x| x.tanh()).collect();
        self.push(Op::Tanh(a), vec![n], out)
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        let n = self.vec_len(a);
        let out = self.value(a).iter().map(|&x| x.max(0.0)).collect();
        self.push(Op::Relu(a), vec![n], out)
    }

    pub fn slice(&mut self, a: NodeId, start: usize, len: usize) -> NodeId {
        let n = self.vec_len(a);
        assert!(start + len <= n, "slice {start}..{} out of {n}", start + len);
        let out = self.value(a)[start..start + len].to_vec();
        self.push(Op::Slice(a, start), vec![len], out)
    }

    pub fn concat(&mut self, parts: &[NodeId]) -> NodeId {
        let mut out = Vec::new();
        for &p in parts {
            self.vec_len(p);
            out.extend_from_slice(self.value(p));
        }
        let n = out.len();
        self.push(Op::Concat(parts.to_vec()), vec![n], out)
    }

    pub fn dot(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.same_len(a, b);
        let v = self.value(a).iter().zip(self.value(b)).map(|(x, y)| x * y).sum();
        self.push(Op::Dot(a, b), vec![1], vec![v])
    }

    pub fn softmax(&mut self, a: NodeId) -> NodeId {
        let n = self.vec_len(a);
        let out = softmax(self.value(a));
        self.push(Op::Softmax(a), vec![n], out)
    }

    /// `-ln(max(p[label], PROB_FLOOR))` for a probability vector `p`.
    pub fn neg_log(&mut self, probs: NodeId, label: usize) -> NodeId {
        let n = self.vec_len(probs);
        assert!(label < n, "label {label} out of range for {n} classes");
        let p = self.value(probs)[label].max(PROB_FLOOR);
        self.push(Op::NegLog(probs, label), vec![1], vec![-p.ln()])
    }

    /// Sum of equally-shaped vectors.
    pub fn sum(&mut self, parts: &[NodeId]) -> NodeId {
        assert!(!parts.is_empty(), "sum of zero nodes");
        let n = self.vec_len(parts[0]);
        let mut out = vec![0.0; n];
        for &p in parts {
            assert_eq!(self.vec_len(p), n, "sum operand length mismatch");
            for (o, v) in out.iter_mut().zip(self.value(p)) {
                *o += v;
            }
        }
        self.push(Op::Sum(parts.to_vec()), vec![n], out)
    }

    fn zip_values(&self, a: NodeId, b: NodeId, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.value(a)
            .iter()
            .zip(self.value(b))
            .map(|(&x, &y)| f(x, y))
            .collect()
    }

    /// Back-propagates from the scalar node `loss`, accumulating into the
    /// gradient buffers of `params`.
    pub fn backward(&self, loss: NodeId, params: &mut Params) {
        assert_eq!(self.value(loss).len(), 1, "backward from a non-scalar");
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(vec![1.0]);

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Input => {}
                Op::Param(pid) => {
                    if let Some(pg) = params.get_mut(*pid).grad_mut() {
                        for (d, s) in pg.iter_mut().zip(&g) {
                            *d += s;
                        }
                    }
                }
                Op::Row(pid, row) => {
                    let cols = g.len();
                    if let Some(pg) = params.get_mut(*pid).grad_mut() {
                        for (d, s) in pg[row * cols..(row + 1) * cols].iter_mut().zip(&g) {
                            *d += s;
                        }
                    }
                }
                Op::MatVec(w, x) => {
                    let n = self.nodes[x.0].value.len();
                    let wv = &self.nodes[w.0].value;
                    let xv = &self.nodes[x.0].value;
                    let mut gw = vec![0.0; wv.len()];
                    let mut gx = vec![0.0; n];
                    for (i, gi) in g.iter().enumerate() {
                        let row = &wv[i * n..(i + 1) * n];
                        let grow = &mut gw[i * n..(i + 1) * n];
                        for j in 0..n {
                            grow[j] = gi * xv[j];
                            gx[j] += gi * row[j];
                        }
                    }
                    accumulate(&mut grads, *w, gw);
                    accumulate(&mut grads, *x, gx);
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *a, g.clone());
                    accumulate(&mut grads, *b, g);
                }
                Op::Sub(a, b) => {
                    let neg = g.iter().map(|v| -v).collect();
                    accumulate(&mut grads, *a, g);
                    accumulate(&mut grads, *b, neg);
                }
                Op::Mul(a, b) => {
                    let av = &self.nodes[a.0].value;
                    let bv = &self.nodes[b.0].value;
                    let ga = g.iter().zip(bv).map(|(g, y)| g * y).collect();
                    let gb = g.iter().zip(av).map(|(g, x)| g * x).collect();
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::Scale(a, c) => {
                    accumulate(&mut grads, *a, g.iter().map(|v| v * c).collect());
                }
                Op::ScaleBy(a, s) => {
                    let c = self.nodes[s.0].value[0];
                    let av = &self.nodes[a.0].value;
                    let gs = g.iter().zip(av).map(|(g, x)| g * x).sum();
                    accumulate(&mut grads, *a, g.iter().map(|v| v * c).collect());
                    accumulate(&mut grads, *s, vec![gs]);
                }
                Op::Sigmoid(a) => {
                    let ga = g
                        .iter()
                        .zip(&node.value)
                        .map(|(g, y)| g * y * (1.0 - y))
                        .collect();
                    accumulate(&mut grads, *a, ga);
                }
                Op::Tanh(a) => {
                    let ga = g
                        .iter()
                        .zip(&node.value)
                        .map(|(g, y)| g * (1.0 - y * y))
                        .collect();
                    accumulate(&mut grads, *a, ga);
                }
                Op::Relu(a) => {
                    let av = &self.nodes[a.0].value;
                    let ga = g
                        .iter()
                        .zip(av)
                        .map(|(g, x)| if *x > 0.0 { *g } else { 0.0 })
                        .collect();
                    accumulate(&mut grads, *a, ga);
                }
                Op::Slice(a, start) => {
                    let mut ga = vec![0.0; self.nodes[a.0].value.len()];
                    ga[*start..*start + g.len()].copy_from_slice(&g);
                    accumulate(&mut grads, *a, ga);
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let n = self.nodes[p.0].value.len();
                        accumulate(&mut grads, *p, g[offset..offset + n].to_vec());
                        offset += n;
                    }
                }
                Op::Dot(a, b) => {
                    let s = g[0];
                    let av = &self.nodes[a.0].value;
                    let bv = &self.nodes[b.0].value;
                    accumulate(&mut grads, *a, bv.iter().map(|y| s * y).collect());
                    accumulate(&mut grads, *b, av.iter().map(|x| s * x).collect());
                }
                Op::Softmax(a) => {
                    let y = &node.value;
                    let inner: f64 = g.iter().zip(y).map(|(g, y)| g * y).sum();
                    let ga = g.iter().zip(y).map(|(g, y)| y * (g - inner)).collect();
                    accumulate(&mut grads, *a, ga);
                }
                Op::NegLog(p, label) => {
                    let pv = &self.nodes[p.0].value;
                    let mut gp = vec![0.0; pv.len()];
                    if pv[*label] > PROB_FLOOR {
                        gp[*label] = -g[0] / pv[*label];
                    }
                    accumulate(&mut grads, *p, gp);
                }
                Op::Sum(parts) => {
                    for p in parts {
                        accumulate(&mut grads, *p, g.clone());
                    }
                }
            }
        }
    }
}

fn accumulate(grads: &mut [Option<Vec<f64>>], id: NodeId, g: Vec<f64>) {
    match &mut grads[id.0] {
        Some(existing) => {
            for (e, v) in existing.iter_mut().zip(&g) {
                *e += v;
            }
        }
        slot @ None => *slot = Some(g),
    }
}
