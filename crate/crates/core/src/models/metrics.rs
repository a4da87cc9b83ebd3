/// Index of the largest entry; ties go to the lower index.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// `m[gold][pred]` counts.
pub fn confusion_matrix(pred: &[usize], gold: &[usize], classes: usize) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0; classes]; classes];
    for (&p, &g) in pred.iter().zip(gold) {
        m[g][p] += 1;
    }
    m
}

pub fn accuracy(pred: &[usize], gold: &[usize]) -> f64 {
    if gold.is_empty() {
        return 0.0;
    }
    pred.iter().zip(gold).filter(|(p, g)| p == g).count() as f64 / gold.len() as f64
}

/// Unweighted mean of per-class F1. A class with no true positives, false
/// positives or false negatives scores 0.
pub fn macro_f1(pred: &[usize], gold: &[usize], classes: usize) -> f64 {
    if classes == 0 {
        return 0.0;
    }
    let m = confusion_matrix(pred, gold, classes);
    let mut total = 0.0;
    for c in 0..classes {
        let tp = m[c][c];
        let fn_: usize = m[c].iter().sum::<usize>() - tp;
        let fp: usize = (0..classes).map(|g| m[g][c]).sum::<usize>() - tp;
        let denom = 2 * tp + fp + fn_;
        if denom > 0 {
            total += 2.0 * tp as f64 / denom as f64;
        }
    }
    total / classes as f64
}
