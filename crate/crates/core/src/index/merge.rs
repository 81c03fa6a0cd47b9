use std::collections::BTreeMap;

use super::weights::{normalize_by_group, MergedFeature, WeightTable};
use crate::error::Result;
use crate::model::{FeatureGroup, FeatureKind, FeatureMatrix, FeatureSource, FeatureSpec, LogTransform};
use crate::stats::pearson;

/// Greedily merge correlated continuous features within each group.
///
/// At every step the pair with the highest Pearson correlation above
/// `threshold` is replaced by the weighted average of its two columns, which
/// takes the place of the earlier column and carries the summed weight.
/// Binary features are never merged. `weights` must cover every column.
pub fn merge_correlated(
    matrix: &FeatureMatrix,
    weights: &WeightTable,
    threshold: f64,
) -> Result<(FeatureMatrix, WeightTable)> {
    let mut specs = matrix.specs.clone();
    let mut columns: Vec<Vec<f64>> = (0..matrix.n_cols())
        .map(|c| matrix.dense_column(c))
        .collect::<Result<_>>()?;
    let mut w: Vec<f64> = specs
        .iter()
        .map(|s| weights.get(&s.feature_id))
        .collect::<Result<_>>()?;
    let mut provenance: BTreeMap<String, MergedFeature> = weights
        .merged
        .iter()
        .map(|m| (m.merged_id.clone(), m.clone()))
        .collect();

    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..specs.len() {
            if specs[i].is_binary() {
                continue;
            }
            for j in i + 1..specs.len() {
                if specs[j].is_binary() || specs[j].group != specs[i].group {
                    continue;
                }
                let r = pearson(&columns[i], &columns[j]);
                if r > threshold && best.is_none_or(|(b, _, _)| r > b) {
                    best = Some((r, i, j));
                }
            }
        }
        let Some((_, i, j)) = best else { break };

        let (wi, wj) = (w[i], w[j]);
        let merged: Vec<f64> = columns[i]
            .iter()
            .zip(&columns[j])
            .map(|(a, b)| (wi * a + wj * b) / (wi + wj))
            .collect();
        let (a, b) = (&specs[i], &specs[j]);
        let merged_id = format!("{}+{}", a.feature_id, b.feature_id);
        let mut sources = Vec::new();
        for id in [&a.feature_id, &b.feature_id] {
            match provenance.remove(id) {
                Some(prev) => sources.extend(prev.sources),
                None => sources.push(id.clone()),
            }
        }
        provenance.insert(
            merged_id.clone(),
            MergedFeature {
                merged_id: merged_id.clone(),
                sources,
                w_merged: wi + wj,
            },
        );
        let spec = FeatureSpec {
            feature_id: merged_id,
            group: a.group,
            kind: FeatureKind::Continuous,
            geo_level: a.geo_level.min(b.geo_level),
            weight: wi + wj,
            log_transform: if a.log_transform == b.log_transform {
                a.log_transform
            } else {
                LogTransform::Auto
            },
            source: FeatureSource::Derived,
            in_index: a.in_index || b.in_index,
        };
        specs[i] = spec;
        columns[i] = merged;
        w[i] = wi + wj;
        specs.remove(j);
        columns.remove(j);
        w.remove(j);
    }

    let raw: BTreeMap<String, (FeatureGroup, f64)> = specs
        .iter()
        .zip(&w)
        .map(|(s, &w)| (s.feature_id.clone(), (s.group, w)))
        .collect();
    let weights = WeightTable {
        weights: normalize_by_group(&raw),
        merged: provenance.into_values().collect(),
    };
    let n = matrix.n_rows();
    let rows = (0..n)
        .map(|r| columns.iter().map(|c| Some(c[r])).collect())
        .collect();
    let out = FeatureMatrix::from_rows(matrix.languages.clone(), specs, rows)?;
    Ok((out, weights))
}
