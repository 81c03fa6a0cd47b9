use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FeatureGroup, FeatureSpec, IndexConfig};

/// Provenance of a feature produced by merging correlated columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergedFeature {
    pub merged_id: String,
    pub sources: Vec<String>,
    /// Sum of the source weights at merge time.
    pub w_merged: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub weights: BTreeMap<String, f64>,
    #[serde(default)]
    pub merged: Vec<MergedFeature>,
}

impl WeightTable {
    pub fn get(&self, feature_id: &str) -> Result<f64> {
        self.weights
            .get(feature_id)
            .copied()
            .ok_or_else(|| Error::UnknownFeature(feature_id.to_string()))
    }
}

/// Linear inverse-rank weights: rank r of n gets `(n - r + 1) / (n (n + 1) / 2)`.
pub fn weights_from_ranks(rank_table: &[String]) -> Result<WeightTable> {
    if rank_table.is_empty() {
        return Err(Error::EmptyInput("rank table"));
    }
    let mut seen = HashSet::new();
    for id in rank_table {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateFeature(id.clone()));
        }
    }
    let n = rank_table.len();
    let total = (n * (n + 1) / 2) as f64;
    let weights = rank_table
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), (n - i) as f64 / total))
        .collect();
    Ok(WeightTable {
        weights,
        merged: Vec::new(),
    })
}

/// Weights for every spec, normalized to sum 1 within each group.
///
/// A feature listed in its group's rank table takes the inverse-rank weight
/// of that table; other features keep the weight from their spec.
pub fn resolve_weights(specs: &[FeatureSpec], cfg: &IndexConfig) -> Result<WeightTable> {
    let mut raw: BTreeMap<String, (FeatureGroup, f64)> = BTreeMap::new();
    for group in FeatureGroup::ALL {
        let table = cfg.group_rank_tables.get(group);
        let ranked = if table.is_empty() {
            WeightTable::default()
        } else {
            weights_from_ranks(table)?
        };
        for spec in specs.iter().filter(|s| s.group == group) {
            if raw.contains_key(&spec.feature_id) {
                return Err(Error::DuplicateFeature(spec.feature_id.clone()));
            }
            let w = match ranked.weights.get(&spec.feature_id) {
                Some(&w) => w,
                None => spec.weight,
            };
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "weight of {} must be positive",
                    spec.feature_id
                )));
            }
            raw.insert(spec.feature_id.clone(), (group, w));
        }
    }
    for group in FeatureGroup::ALL {
        for id in cfg.group_rank_tables.get(group) {
            match specs.iter().find(|s| &s.feature_id == id) {
                Some(s) if s.group != group => {
                    return Err(Error::InvalidConfig(format!(
                        "{id} is ranked under {group} but belongs to {}",
                        s.group
                    )))
                }
                Some(_) => {}
                None => return Err(Error::UnknownFeature(id.clone())),
            }
        }
    }
    Ok(WeightTable {
        weights: normalize_by_group(&raw),
        merged: Vec::new(),
    })
}

pub(crate) fn normalize_by_group(raw: &BTreeMap<String, (FeatureGroup, f64)>) -> BTreeMap<String, f64> {
    let mut sums: BTreeMap<FeatureGroup, f64> = BTreeMap::new();
    for (g, w) in raw.values() {
        *sums.entry(*g).or_default() += w;
    }
    raw.iter()
        .map(|(id, (g, w))| (id.clone(), w / sums[g]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn two_features() {
        let w = weights_from_ranks(&ids(2)).unwrap();
        assert!((w.weights["f1"] - 2.0 / 3.0).abs() < 1e-15);
        assert!((w.weights["f2"] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn singleton() {
        assert_eq!(weights_from_ranks(&ids(1)).unwrap().weights["f1"], 1.0);
    }

    #[test]
    fn duplicates_and_empty() {
        let dup = vec!["a".to_string(), "b".to_string(), "a".to_string()];
        assert!(matches!(weights_from_ranks(&dup), Err(Error::DuplicateFeature(f)) if f == "a"));
        assert!(matches!(weights_from_ranks(&[]), Err(Error::EmptyInput(_))));
    }
}
