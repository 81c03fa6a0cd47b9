//! Rank-frequency power-law fits on log-log axes.
//!
//! Counts are sorted in descending order and paired with ranks `k = 1..n`;
//! `ln x(k) = ln C - alpha ln k` is then fitted by ordinary least squares.

use serde::{Deserialize, Serialize};

use super::linreg::{simple_ols, t_two_sided};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub log_c: f64,
    pub slope_stderr: f64,
    pub r2: f64,
    /// sqrt(RSS / (n - 2)) of the free-slope fit.
    pub residual_sigma: f64,
    pub n: usize,
    /// Two-sided p-value of the slope.
    pub p_value: f64,
    /// Slope negative and significant at 0.05.
    pub h1_supported: bool,
}

impl PowerLawFit {
    pub fn slope(&self) -> f64 {
        -self.alpha
    }
}

fn checked_desc(counts: &[f64]) -> Result<Vec<f64>> {
    if counts.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: counts.len(),
        });
    }
    if let Some((index, &value)) = counts
        .iter()
        .enumerate()
        .find(|(_, &c)| !(c > 0.0 && c.is_finite()))
    {
        return Err(Error::NonPositiveValue { index, value });
    }
    let mut sorted = counts.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(sorted)
}

/// Drop zero counts, as every fit here works on positive counts only.
pub fn positive_counts<I: IntoIterator<Item = u64>>(counts: I) -> Vec<f64> {
    counts.into_iter().filter(|&c| c > 0).map(|c| c as f64).collect()
}

/// `(ln k, ln x(k))` pairs in rank order.
pub fn log_rank_points(counts: &[f64]) -> Result<Vec<(f64, f64)>> {
    let sorted = checked_desc(counts)?;
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, c)| (((i + 1) as f64).ln(), c.ln()))
        .collect())
}

pub fn fit_power_law(counts: &[f64]) -> Result<PowerLawFit> {
    let pts = log_rank_points(counts)?;
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let ols = simple_ols(&x, &y)?;
    let n = x.len();
    let df = n as f64 - 2.0;
    let t = if ols.slope_se > 0.0 {
        ols.slope / ols.slope_se
    } else if ols.slope == 0.0 {
        0.0
    } else {
        ols.slope.signum() * f64::INFINITY
    };
    let p_value = t_two_sided(t, df);
    Ok(PowerLawFit {
        alpha: -ols.slope,
        log_c: ols.intercept,
        slope_stderr: ols.slope_se,
        r2: ols.r2,
        residual_sigma: (ols.rss / df).sqrt(),
        n,
        p_value,
        h1_supported: ols.slope < 0.0 && p_value < 0.05,
    })
}

/// Spread of log residuals around the best `alpha = 1` line.
///
/// The slope is pinned at -1, the intercept is the least-squares estimate
/// `mean(ln x + ln k)`, and the result is the root-mean-square residual.
pub fn zipf_residual_sigma(counts: &[f64]) -> Result<f64> {
    let pts = log_rank_points(counts)?;
    let n = pts.len() as f64;
    let intercept = pts.iter().map(|(lk, lx)| lx + lk).sum::<f64>() / n;
    let ss: f64 = pts
        .iter()
        .map(|(lk, lx)| (lx - (intercept - lk)).powi(2))
        .sum();
    Ok((ss / n).sqrt())
}
