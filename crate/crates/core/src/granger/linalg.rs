//! Least squares by Householder QR with column pivoting.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OlsError {
    #[error("design has {rows} rows but {targets} targets")]
    Shape { rows: usize, targets: usize },
    #[error("design has {rows} rows and {cols} columns; need rows >= cols >= 1")]
    Underdetermined { rows: usize, cols: usize },
    #[error("design is rank deficient (rank {rank} of {cols})")]
    RankDeficient { rank: usize, cols: usize },
    #[error("non-finite value in design or targets")]
    NonFinite,
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self { rows: rows.len(), cols, data: rows.concat() }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OlsFit {
    pub coeffs: Vec<f64>,
    pub ssr: f64,
    pub rank: usize,
}

/// Column-major working copy, so Householder updates walk contiguous memory.
struct Qr {
    m: usize,
    n: usize,
    a: Vec<f64>,
    perm: Vec<usize>,
    /// Diagonal of R.
    diag: Vec<f64>,
    rank: usize,
}

fn col(a: &[f64], m: usize, j: usize) -> &[f64] {
    &a[j * m..(j + 1) * m]
}

impl Qr {
    fn factor(x: &Matrix) -> Self {
        let (m, n) = (x.rows, x.cols);
        let mut a = vec![0.0; m * n];
        for r in 0..m {
            for c in 0..n {
                a[c * m + r] = x.get(r, c);
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut norms: Vec<f64> = (0..n).map(|j| col(&a, m, j).iter().map(|v| v * v).sum()).collect();
        let mut diag = vec![0.0; n];
        let steps = m.min(n);
        for k in 0..steps {
            // Pivot: remaining column with largest trailing norm, recomputed
            // exactly to avoid downdating drift.
            for (j, norm) in norms.iter_mut().enumerate().skip(k) {
                *norm = col(&a, m, j)[k..].iter().map(|v| v * v).sum();
            }
            let p = (k..n).fold(k, |best, j| if norms[j] > norms[best] { j } else { best });
            if p != k {
                for r in 0..m {
                    a.swap(k * m + r, p * m + r);
                }
                perm.swap(k, p);
                norms.swap(k, p);
            }
            let alpha = norms[k].sqrt();
            if alpha == 0.0 {
                diag[k] = 0.0;
                continue;
            }
            let x0 = a[k * m + k];
            let beta = if x0 >= 0.0 { -alpha } else { alpha };
            // v = x - beta e1, stored in place; H = I - 2 v v^T / (v^T v).
            a[k * m + k] = x0 - beta;
            let vtv: f64 = col(&a, m, k)[k..].iter().map(|v| v * v).sum();
            diag[k] = beta;
            if vtv == 0.0 {
                continue;
            }
            for j in k + 1..n {
                let (left, right) = a.split_at_mut(j * m);
                let v = &left[k * m + k..k * m + m];
                let cj = &mut right[k..m];
                let s: f64 = v.iter().zip(cj.iter()).map(|(a, b)| a * b).sum();
                let f = 2.0 * s / vtv;
                for (c, vi) in cj.iter_mut().zip(v) {
                    *c -= f * vi;
                }
            }
        }
        let tol = diag.first().map_or(0.0, |d| d.abs()) * (m.max(n) as f64) * f64::EPSILON;
        let rank = diag.iter().take(steps).take_while(|d| d.abs() > tol).count();
        Self { m, n, a, perm, diag, rank }
    }

    /// Applies Q^T to `y` in place.
    fn apply_qt(&self, y: &mut [f64]) {
        for k in 0..self.m.min(self.n) {
            if self.diag[k] == 0.0 {
                continue;
            }
            let v = &col(&self.a, self.m, k)[k..];
            let vtv: f64 = v.iter().map(|x| x * x).sum();
            if vtv == 0.0 {
                continue;
            }
            let s: f64 = v.iter().zip(&y[k..]).map(|(a, b)| a * b).sum();
            let f = 2.0 * s / vtv;
            for (yi, vi) in y[k..].iter_mut().zip(v) {
                *yi -= f * vi;
            }
        }
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else {
            self.a[j * self.m + i]
        }
    }
}

/// Ordinary least squares. Rank deficiency is an error rather than a
/// minimum-norm guess.
pub fn ols(design: &Matrix, targets: &[f64]) -> Result<OlsFit, OlsError> {
    let (m, n) = (design.rows, design.cols);
    if targets.len() != m {
        return Err(OlsError::Shape { rows: m, targets: targets.len() });
    }
    if n == 0 || m < n {
        return Err(OlsError::Underdetermined { rows: m, cols: n });
    }
    if design.data.iter().chain(targets).any(|v| !v.is_finite()) {
        return Err(OlsError::NonFinite);
    }
    let qr = Qr::factor(design);
    if qr.rank < n {
        return Err(OlsError::RankDeficient { rank: qr.rank, cols: n });
    }
    let mut qty = targets.to_vec();
    qr.apply_qt(&mut qty);
    let mut z = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| qr.r(i, j) * z[j]).sum();
        z[i] = (qty[i] - s) / qr.r(i, i);
    }
    let mut coeffs = vec![0.0; n];
    for (k, &j) in qr.perm.iter().enumerate() {
        coeffs[j] = z[k];
    }
    let fitted = design.mul_vec(&coeffs);
    let ssr = targets.iter().zip(&fitted).map(|(y, f)| (y - f) * (y - f)).sum();
    Ok(OlsFit { coeffs, ssr, rank: qr.rank })
}
