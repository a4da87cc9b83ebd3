//! Independent reference implementations used only by tests.
#![allow(dead_code)]

/// Least squares through the normal equations X^T X b = X^T y, solved by
/// Gauss-Jordan elimination with partial pivoting.
pub fn normal_equations(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = rows[0].len();
    let mut a = vec![vec![0.0; n + 1]; n];
    for (r, &yr) in rows.iter().zip(y) {
        for i in 0..n {
            for j in 0..n {
                a[i][j] += r[i] * r[j];
            }
            a[i][n] += r[i] * yr;
        }
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        for i in 0..n {
            if i != col {
                let f = a[i][col] / a[col][col];
                for j in col..=n {
                    a[i][j] -= f * a[col][j];
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}

/// Row-by-row construction of the lagged design straight from the
/// definition: intercept, then y lags, then (optionally) x lags.
pub fn naive_lag_rows(y: &[f64], x: &[f64], lag: usize, with_x: bool) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut targets = Vec::new();
    let mut rows = Vec::new();
    for t in lag..y.len() {
        targets.push(y[t]);
        let mut row = vec![1.0];
        for i in 1..=lag {
            row.push(y[t - i]);
        }
        if with_x {
            for i in 1..=lag {
                row.push(x[t - i]);
            }
        }
        rows.push(row);
    }
    (targets, rows)
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Adaptive Simpson quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// ∫_0^x t^(a-1) (1-t)^(b-1) dt for x <= 1/2, with t = u² removing the
/// singularity at 0.
fn lower_piece(a: f64, b: f64, x: f64, tol: f64) -> f64 {
    let g = move |u: f64| 2.0 * u.powf(2.0 * a - 1.0) * (1.0 - u * u).powf(b - 1.0);
    integrate(&g, 0.0, x.sqrt(), tol)
}

/// P(F > f) for F(d1, d2) by quadrature of the beta density: the tail
/// equals I_x(d2/2, d1/2) with x = d2 / (d2 + d1 f). Each half of the
/// beta integral is mapped so its endpoint singularity disappears.
pub fn f_survival_quadrature(f: f64, d1: usize, d2: usize) -> f64 {
    let (a, b) = (d2 as f64 / 2.0, d1 as f64 / 2.0);
    let x = d2 as f64 / (d2 as f64 + d1 as f64 * f);
    // By symmetry ∫_{1/2}^{1} t^(a-1)(1-t)^(b-1) dt is the lower piece with
    // a and b swapped.
    let rough = lower_piece(a, b, 0.5, 1e-6) + lower_piece(b, a, 0.5, 1e-6);
    let tol = 1e-14 * rough;
    let beta = lower_piece(a, b, 0.5, tol) + lower_piece(b, a, 0.5, tol);
    let partial = if x <= 0.5 {
        lower_piece(a, b, x, tol)
    } else {
        beta - lower_piece(b, a, 1.0 - x, tol)
    };
    partial / beta
}
