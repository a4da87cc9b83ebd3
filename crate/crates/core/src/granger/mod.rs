//! Bivariate Granger tests: does the source series help predict the target
//! beyond the target's own past?

mod dist;
mod linalg;
mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::SeriesPair;

pub use dist::{chi2_survival, f_survival, DistError};
pub use linalg::{ols, Matrix, OlsError, OlsFit};
pub use report::{
    read_activity_csv, read_results_csv, render_table, summarize, top_decile, write_activity_csv,
    write_results_csv, Counts, ReportError, Summary,
};

pub const REASON_INSUFFICIENT: &str = "insufficient data";
pub const REASON_CONSTANT: &str = "constant series";
pub const REASON_RANK: &str = "rank-deficient design";
pub const REASON_ZERO_SSR: &str = "zero residual";

#[derive(Debug, Error, PartialEq)]
pub enum GrangerError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("series of length {len} is too short for lag {lag}")]
    TooShort { len: usize, lag: usize },
    #[error("lag must be >= 1")]
    ZeroLag,
}

/// Lagged regression inputs. Row `r` is time `t = lag + r`.
#[derive(Clone, Debug, PartialEq)]
pub struct LagMatrices {
    pub targets: Vec<f64>,
    /// Columns: intercept, y_{t-1}..y_{t-lag}.
    pub restricted: Matrix,
    /// Columns: intercept, y_{t-1}..y_{t-lag}, x_{t-1}..x_{t-lag}.
    pub unrestricted: Matrix,
}

pub fn lag_matrix(y: &[f64], x: &[f64], lag: usize) -> Result<LagMatrices, GrangerError> {
    if y.len() != x.len() {
        return Err(GrangerError::LengthMismatch(y.len(), x.len()));
    }
    if lag == 0 {
        return Err(GrangerError::ZeroLag);
    }
    if y.len() <= lag {
        return Err(GrangerError::TooShort { len: y.len(), lag });
    }
    let t_eff = y.len() - lag;
    let mut restricted = Matrix::zeros(t_eff, lag + 1);
    let mut unrestricted = Matrix::zeros(t_eff, 2 * lag + 1);
    for r in 0..t_eff {
        let t = r + lag;
        restricted.set(r, 0, 1.0);
        unrestricted.set(r, 0, 1.0);
        for i in 1..=lag {
            restricted.set(r, i, y[t - i]);
            unrestricted.set(r, i, y[t - i]);
            unrestricted.set(r, lag + i, x[t - i]);
        }
    }
    Ok(LagMatrices { targets: y[lag..].to_vec(), restricted, unrestricted })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrangerFit {
    pub lag: usize,
    /// Own-lag coefficients of the unrestricted model.
    pub alpha: Vec<f64>,
    /// Source-lag coefficients of the unrestricted model.
    pub beta: Vec<f64>,
    pub intercept: f64,
    pub ssr_restricted: f64,
    pub ssr_unrestricted: f64,
    pub t_eff: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    /// F test on the SSR difference.
    #[default]
    F,
    /// Chi-square statistic T_eff (SSR_r - SSR_u) / SSR_u with `lag` dof.
    Chi2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "reject")]
    Reject,
    #[serde(rename = "keep")]
    Keep,
    #[serde(rename = "nc")]
    NotCalculable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Reject => "reject",
            Verdict::Keep => "keep",
            Verdict::NotCalculable => "nc",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "reject" => Some(Verdict::Reject),
            "keep" => Some(Verdict::Keep),
            "nc" => Some(Verdict::NotCalculable),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrangerResult {
    pub user_id: String,
    pub lag: usize,
    /// Test statistic (F, or chi-square under [`TestKind::Chi2`]).
    pub f_stat: Option<f64>,
    pub p_value: Option<f64>,
    pub verdict: Verdict,
    pub reason: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrangerOptions {
    pub alpha: f64,
    pub test: TestKind,
    /// Divide alpha by the number of lags tested per user.
    pub bonferroni: bool,
}

impl Default for GrangerOptions {
    fn default() -> Self {
        Self { alpha: 0.05, test: TestKind::F, bonferroni: false }
    }
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&x| x == v[0])
}

/// Fits both models for "x Granger-causes y". `Err` carries the
/// not-calculable reason.
pub fn granger_fit(y: &[f64], x: &[f64], lag: usize) -> Result<GrangerFit, &'static str> {
    if lag == 0 || y.len() != x.len() || y.len() < 3 * lag + 2 {
        return Err(REASON_INSUFFICIENT);
    }
    if is_constant(y) || is_constant(x) {
        return Err(REASON_CONSTANT);
    }
    let m = lag_matrix(y, x, lag).map_err(|_| REASON_INSUFFICIENT)?;
    let restricted = ols(&m.restricted, &m.targets).map_err(|_| REASON_RANK)?;
    let unrestricted = ols(&m.unrestricted, &m.targets).map_err(|_| REASON_RANK)?;
    let scale = 1.0 + m.targets.iter().map(|v| v * v).sum::<f64>();
    if unrestricted.ssr <= 1e-20 * scale {
        return Err(REASON_ZERO_SSR);
    }
    let c = &unrestricted.coeffs;
    Ok(GrangerFit {
        lag,
        alpha: c[1..=lag].to_vec(),
        beta: c[lag + 1..].to_vec(),
        intercept: c[0],
        ssr_restricted: restricted.ssr,
        ssr_unrestricted: unrestricted.ssr,
        t_eff: m.targets.len(),
    })
}

/// (statistic, p-value) for a fit.
pub fn test_statistic(fit: &GrangerFit, kind: TestKind) -> (f64, f64) {
    let gain = (fit.ssr_restricted - fit.ssr_unrestricted).max(0.0);
    match kind {
        TestKind::F => {
            let d2 = fit.t_eff - 2 * fit.lag - 1;
            let f = (gain / fit.lag as f64) / (fit.ssr_unrestricted / d2 as f64);
            (f, f_survival(f, fit.lag, d2).expect("valid dof"))
        }
        TestKind::Chi2 => {
            let s = fit.t_eff as f64 * gain / fit.ssr_unrestricted;
            (s, chi2_survival(s, fit.lag).expect("valid dof"))
        }
    }
}

fn test_xy(user_id: &str, y: &[f64], x: &[f64], lag: usize, alpha: f64, kind: TestKind) -> GrangerResult {
    match granger_fit(y, x, lag) {
        Ok(fit) => {
            let (stat, p) = test_statistic(&fit, kind);
            GrangerResult {
                user_id: user_id.to_string(),
                lag,
                f_stat: Some(stat),
                p_value: Some(p),
                verdict: if p <= alpha { Verdict::Reject } else { Verdict::Keep },
                reason: None,
            }
        }
        Err(reason) => GrangerResult {
            user_id: user_id.to_string(),
            lag,
            f_stat: None,
            p_value: None,
            verdict: Verdict::NotCalculable,
            reason: Some(reason.to_string()),
        },
    }
}

/// F test of "activity `a` Granger-causes happiness `p`".
pub fn granger_test(pair: &SeriesPair, lag: usize, alpha_level: f64) -> GrangerResult {
    test_xy(&pair.user_id, &pair.p, &pair.a, lag, alpha_level, TestKind::F)
}

/// Tests every pair at every lag, in parallel. Output is ordered by user id
/// then lag.
pub fn batch_test(pairs: &[SeriesPair], lags: &[usize], opts: &GrangerOptions) -> Vec<GrangerResult> {
    let alpha = if opts.bonferroni && !lags.is_empty() {
        opts.alpha / lags.len() as f64
    } else {
        opts.alpha
    };
    let mut order: Vec<&SeriesPair> = pairs.iter().collect();
    order.sort_by(|a, b| a.user_id.cmp(&b.user_id));
    let mut lags = lags.to_vec();
    lags.sort_unstable();
    lags.dedup();
    order
        .par_iter()
        .flat_map_iter(|pair| {
            lags.iter()
                .map(|&lag| test_xy(&pair.user_id, &pair.p, &pair.a, lag, alpha, opts.test))
                .collect::<Vec<_>>()
        })
        .collect()
}
