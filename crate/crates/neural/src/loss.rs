//! Cross-entropy over probability rows, with mean reduction.

use crate::error::{NeuralError, Result};
use crate::tape::{NodeId, Tape, PROB_FLOOR};

const ROW_SUM_TOL: f64 = 1e-6;

/// `-(1/n) Σ ln p[label]` over already-normalized probability rows.
pub fn cross_entropy(probs: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    if probs.len() != labels.len() {
        return Err(NeuralError::ShapeMismatch {
            context: "cross_entropy",
            expected: vec![probs.len()],
            found: vec![labels.len()],
        });
    }
    if probs.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (row, (p, &label)) in probs.iter().zip(labels).enumerate() {
        if label >= p.len() {
            return Err(NeuralError::LabelOutOfRange {
                label,
                classes: p.len(),
            });
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(NeuralError::RowsNotNormalized { row, sum });
        }
        total -= p[label].max(PROB_FLOOR).ln();
    }
    Ok(total / probs.len() as f64)
}

/// Tape version of [`cross_entropy`]; `probs` are softmax output nodes.
pub fn mean_cross_entropy(tape: &mut Tape, probs: &[NodeId], labels: &[usize]) -> Result<NodeId> {
    if probs.is_empty() || probs.len() != labels.len() {
        return Err(NeuralError::ShapeMismatch {
            context: "mean_cross_entropy",
            expected: vec![probs.len()],
            found: vec![labels.len()],
        });
    }
    let mut terms = Vec::with_capacity(probs.len());
    for (&p, &label) in probs.iter().zip(labels) {
        let classes = tape.value(p).len();
        if label >= classes {
            return Err(NeuralError::LabelOutOfRange { label, classes });
        }
        terms.push(tape.neg_log(p, label));
    }
    let total = tape.sum(&terms);
    Ok(tape.scale(total, 1.0 / probs.len() as f64))
}
