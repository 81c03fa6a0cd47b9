//! Kolmogorov-Smirnov statistics and rank correlation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTestResult {
    pub lambda_hat: f64,
    pub ks_statistic: f64,
    pub critical_value: f64,
    /// `false` means the sample is compatible with an exponential law.
    pub reject: bool,
}

/// Asymptotic one-sample KS critical value `sqrt(-ln(alpha / 2) / 2) / sqrt(n)`.
///
/// The rate is estimated from the same sample and no Lilliefors correction is
/// applied, so the test is conservative.
pub fn ks_critical_value(alpha: f64, n: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

pub fn ks_exponential_test(values: &[f64], alpha: f64) -> Result<ExpTestResult> {
    if values.len() < 5 {
        return Err(Error::TooFewPoints {
            needed: 5,
            got: values.len(),
        });
    }
    if let Some((index, &value)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
    {
        return Err(Error::NonPositiveValue { index, value });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("KS level {alpha} outside (0, 1)")));
    }
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lambda_hat = n as f64 / sorted.iter().sum::<f64>();

    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = 1.0 - (-lambda_hat * x).exp();
        let above = (i + 1) as f64 / n as f64 - f;
        let below = f - i as f64 / n as f64;
        d = d.max(above).max(below);
    }
    let critical_value = ks_critical_value(alpha, n);
    Ok(ExpTestResult {
        lambda_hat,
        ks_statistic: d,
        critical_value,
        reject: d > critical_value,
    })
}

/// Two-sample KS statistic `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("two-sample KS"));
    }
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        let r = (start + end + 1) as f64 / 2.0;
        for &k in &idx[start..end] {
            ranks[k] = r;
        }
        start = end;
    }
    ranks
}

/// Spearman correlation: Pearson correlation of average ranks.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptyInput("spearman"));
    }
    if a.len() != b.len() {
        return Err(Error::Invariant("spearman inputs differ in length".into()));
    }
    Ok(super::linreg::pearson(&average_ranks(a), &average_ranks(b)))
}
