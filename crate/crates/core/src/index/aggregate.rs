use std::collections::BTreeMap;

use super::weights::WeightTable;
use crate::error::{Error, Result};
use crate::model::{
    cross_group_mean, rank_and_tier, FeatureGroup, FeatureMatrix, IndexConfig, IndexEntry,
    IndexResult, ScoredLanguage,
};

pub type GroupScores = BTreeMap<FeatureGroup, f64>;

/// Weighted geometric mean of the continuous features of each group, with
/// weights renormalized over those features. One map per matrix row.
pub fn group_scores(matrix: &FeatureMatrix, weights: &WeightTable) -> Result<Vec<GroupScores>> {
    let mut members: BTreeMap<FeatureGroup, Vec<(usize, f64)>> = BTreeMap::new();
    for (c, spec) in matrix.specs.iter().enumerate() {
        if !spec.is_binary() {
            members
                .entry(spec.group)
                .or_default()
                .push((c, weights.get(&spec.feature_id)?));
        }
    }
    for group in FeatureGroup::ALL {
        if !members.contains_key(&group) {
            return Err(Error::SpecMismatch(format!(
                "group {group} has no continuous feature in the index"
            )));
        }
    }
    for cols in members.values_mut() {
        let total: f64 = cols.iter().map(|(_, w)| w).sum();
        for (_, w) in cols.iter_mut() {
            *w /= total;
        }
    }

    (0..matrix.n_rows())
        .map(|r| {
            let mut scores = GroupScores::new();
            for (group, cols) in &members {
                let mut log_sum = 0.0;
                for &(c, w) in cols {
                    let x = matrix.get(r, c).ok_or_else(|| {
                        Error::Invariant(format!("missing normalized value at ({r}, {c})"))
                    })?;
                    if !(x > 0.0 && x.is_finite()) {
                        return Err(Error::NonPositiveValue { index: r, value: x });
                    }
                    log_sum += w * x.ln();
                }
                scores.insert(*group, log_sum.exp());
            }
            Ok(scores)
        })
        .collect()
}

/// `prod_b (1 - w_b (1 - x_b))` over the binary columns, one per row.
pub fn binary_penalties(matrix: &FeatureMatrix, weights: &WeightTable) -> Result<Vec<f64>> {
    let binaries: Vec<(usize, f64)> = matrix
        .specs
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_binary())
        .map(|(c, s)| Ok((c, weights.get(&s.feature_id)?)))
        .collect::<Result<_>>()?;
    (0..matrix.n_rows())
        .map(|r| {
            let mut p = 1.0;
            for &(c, w) in &binaries {
                let x = matrix.get(r, c).ok_or_else(|| {
                    Error::Invariant(format!("missing binary value at ({r}, {c})"))
                })?;
                p *= 1.0 - w * (1.0 - x);
            }
            Ok(p)
        })
        .collect()
}

/// Combine group scores and penalties into ranked, tiered entries (in row
/// order). `n_speakers` is aligned with the matrix rows and breaks ties.
pub fn compute_index(
    matrix: &FeatureMatrix,
    weights: &WeightTable,
    cfg: &IndexConfig,
    n_speakers: &[u64],
) -> Result<IndexResult> {
    if n_speakers.len() != matrix.n_rows() {
        return Err(Error::Invariant("speaker counts not aligned with rows".into()));
    }
    let groups = group_scores(matrix, weights)?;
    let penalties = binary_penalties(matrix, weights)?;
    assemble(matrix, &groups, &penalties, cfg, n_speakers)
}

pub(crate) fn assemble(
    matrix: &FeatureMatrix,
    groups: &[GroupScores],
    penalties: &[f64],
    cfg: &IndexConfig,
    n_speakers: &[u64],
) -> Result<IndexResult> {
    let overall: Vec<f64> = groups
        .iter()
        .zip(penalties)
        .map(|(g, p)| cross_group_mean(g, cfg.group_weights.as_ref()) * p)
        .collect();
    let scored: Vec<ScoredLanguage> = matrix
        .languages
        .iter()
        .zip(&overall)
        .zip(n_speakers)
        .map(|((code, &score), &n)| ScoredLanguage {
            glottocode: code.clone(),
            score,
            n_speakers: n,
        })
        .collect();
    let placements = rank_and_tier(&scored, &cfg.tier_quantiles)?;
    let entries = matrix
        .languages
        .iter()
        .enumerate()
        .map(|(r, code)| {
            let p = placements[code];
            IndexEntry {
                glottocode: code.clone(),
                overall: overall[r],
                subscores: groups[r].clone(),
                binary_penalty: penalties[r],
                rank: p.rank,
                tier: p.tier,
            }
        })
        .collect();
    Ok(IndexResult {
        entries,
        group_weights: cfg.group_weights.clone(),
    })
}
