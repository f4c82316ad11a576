use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub fn rmse(errors: &[f64]) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::Empty("error vector"));
    }
    Ok((errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt())
}

/// RMSE divided by the range of the test-window targets.
pub fn nrmse(rmse: f64, y_test: &[f64]) -> Result<f64> {
    if y_test.is_empty() {
        return Err(Error::Empty("test series"));
    }
    let max = y_test.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = y_test.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > min) {
        return Err(Error::ConstantSeries);
    }
    Ok(rmse / (max - min))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmResult {
    pub statistic: f64,
    /// One-sided p-value against the alternative that the first forecast has
    /// the smaller squared loss.
    pub p_value: f64,
}

pub const DM_MIN_LENGTH: usize = 10;

/// Diebold-Mariano comparison on squared-error loss with rectangular-kernel
/// long-run variance truncated at lag `h - 1` and a normal reference.
pub fn diebold_mariano(e1: &[f64], e2: &[f64], h: usize) -> Result<DmResult> {
    if e1.len() != e2.len() {
        return Err(Error::Dimension(format!(
            "error series of lengths {} and {}",
            e1.len(),
            e2.len()
        )));
    }
    let n = e1.len();
    if n < DM_MIN_LENGTH {
        return Err(Error::TooFewRows {
            required: DM_MIN_LENGTH,
            got: n,
        });
    }
    let d: Vec<f64> = e1.iter().zip(e2).map(|(a, b)| a * a - b * b).collect();
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let autocov = |k: usize| -> f64 {
        (k..n).map(|t| (d[t] - mean) * (d[t - k] - mean)).sum::<f64>() / nf
    };
    let mut lrv = autocov(0);
    for k in 1..h.max(1).min(n) {
        lrv += 2.0 * autocov(k);
    }
    if !(lrv > 0.0) || !lrv.is_finite() {
        return Err(Error::DegenerateDifferential);
    }
    let statistic = mean / (lrv / nf).sqrt();
    let normal = Normal::standard();
    Ok(DmResult {
        statistic,
        p_value: normal.cdf(statistic),
    })
}
