use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::beta::checked_beta_reg;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DistError {
    #[error("degrees of freedom must be >= 1 (got {0}, {1})")]
    Dof(usize, usize),
    #[error("statistic must be a non-negative number, got {0}")]
    Statistic(f64),
}

/// Upper tail P(F > f) of the F(d1, d2) distribution, as the regularized
/// incomplete beta I_x(d2/2, d1/2) at x = d2 / (d2 + d1 f).
pub fn f_survival(f: f64, d1: usize, d2: usize) -> Result<f64, DistError> {
    if d1 == 0 || d2 == 0 {
        return Err(DistError::Dof(d1, d2));
    }
    if f.is_nan() || f < 0.0 {
        return Err(DistError::Statistic(f));
    }
    if f == 0.0 {
        return Ok(1.0);
    }
    if f.is_infinite() {
        return Ok(0.0);
    }
    let (d1, d2) = (d1 as f64, d2 as f64);
    let x = d2 / (d2 + d1 * f);
    let p = checked_beta_reg(d2 / 2.0, d1 / 2.0, x).map_err(|_| DistError::Statistic(f))?;
    Ok(p.clamp(0.0, 1.0))
}

/// Upper tail of the chi-square distribution with `k` degrees of freedom.
pub fn chi2_survival(x: f64, k: usize) -> Result<f64, DistError> {
    if k == 0 {
        return Err(DistError::Dof(k, k));
    }
    if x.is_nan() || x < 0.0 {
        return Err(DistError::Statistic(x));
    }
    let dist = ChiSquared::new(k as f64).map_err(|_| DistError::Dof(k, k))?;
    Ok(dist.sf(x).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_values() {
        assert_eq!(f_survival(0.0, 3, 7), Ok(1.0));
        assert_eq!(f_survival(f64::INFINITY, 3, 7), Ok(0.0));
        for d in 1..=30 {
            assert!((f_survival(1.0, d, d).unwrap() - 0.5).abs() < 1e-9);
        }
        assert!(f_survival(-1.0, 1, 1).is_err());
        assert!(f_survival(1.0, 0, 1).is_err());
    }

    #[test]
    fn closed_form_d1_2() {
        // For d1 = 2 the survival function is (1 + 2f/d2)^(-d2/2).
        for &(f, d2) in &[(0.5, 3usize), (2.0, 10), (7.5, 25)] {
            let exact = (1.0 + 2.0 * f / d2 as f64).powf(-(d2 as f64) / 2.0);
            assert!((f_survival(f, 2, d2).unwrap() - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn chi2_two_dof_is_exponential() {
        for x in [0.0, 0.3, 2.0, 9.0] {
            assert!((chi2_survival(x, 2).unwrap() - (-x / 2.0f64).exp()).abs() < 1e-13);
        }
    }
}
