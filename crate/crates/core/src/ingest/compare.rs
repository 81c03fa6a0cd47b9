//! Agreement between two language-count distributions from different sources.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{ks_two_sample, spearman};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceComparison {
    pub spearman_rho: f64,
    pub ks_statistic: f64,
}

/// Counts become proportions over the union of codes (absent = 0) before
/// comparison.
pub fn compare_source_distributions(
    counts_a: &BTreeMap<String, u64>,
    counts_b: &BTreeMap<String, u64>,
) -> Result<SourceComparison> {
    if counts_a.is_empty() || counts_b.is_empty() {
        return Err(Error::EmptyInput("source counts"));
    }
    let codes: BTreeSet<&String> = counts_a.keys().chain(counts_b.keys()).collect();
    let props = |m: &BTreeMap<String, u64>| -> Result<Vec<f64>> {
        let total: u64 = m.values().sum();
        if total == 0 {
            return Err(Error::DegenerateInput("all counts are zero".into()));
        }
        Ok(codes
            .iter()
            .map(|c| m.get(*c).copied().unwrap_or(0) as f64 / total as f64)
            .collect())
    };
    let (a, b) = (props(counts_a)?, props(counts_b)?);
    Ok(SourceComparison {
        spearman_rho: spearman(&a, &b)?,
        ks_statistic: ks_two_sample(&a, &b)?,
    })
}
