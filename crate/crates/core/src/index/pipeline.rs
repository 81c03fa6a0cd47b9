use serde::{Deserialize, Serialize};

use super::aggregate::{assemble, binary_penalties, group_scores, GroupScores};
use super::merge::merge_correlated;
use super::transform::{transform_and_normalize, ColumnTransform};
use super::weights::{resolve_weights, WeightTable};
use crate::error::{Error, Result};
use crate::model::{FeatureMatrix, IndexConfig, IndexResult};

/// Every intermediate of one index computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexRun {
    /// In-index columns of the input matrix.
    pub input: FeatureMatrix,
    pub initial_weights: WeightTable,
    pub merged: FeatureMatrix,
    pub weights: WeightTable,
    pub transforms: Vec<ColumnTransform>,
    pub normalized: FeatureMatrix,
    pub group_scores: Vec<GroupScores>,
    pub penalties: Vec<f64>,
    pub result: IndexResult,
}

/// Score every row of `matrix`. Columns with `in_index = false` are ignored;
/// the remaining ones must be fully observed.
pub fn run_index(matrix: &FeatureMatrix, n_speakers: &[u64], cfg: &IndexConfig) -> Result<IndexRun> {
    cfg.validate(&matrix.specs)?;
    if matrix.n_rows() == 0 {
        return Err(Error::EmptyInput("feature matrix"));
    }
    if n_speakers.len() != matrix.n_rows() {
        return Err(Error::Invariant("speaker counts not aligned with rows".into()));
    }
    let keep: Vec<usize> = (0..matrix.n_cols())
        .filter(|&c| matrix.specs[c].in_index)
        .collect();
    let input = matrix.select_columns(&keep);
    if !input.is_dense() {
        return Err(Error::Invariant(format!(
            "{} index cells are still missing; run imputation first",
            input.missing_count()
        )));
    }
    for (c, spec) in input.specs.iter().enumerate() {
        if input.column(c).iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput(format!("{} has non-finite values", spec.feature_id)));
        }
    }

    let initial_weights = resolve_weights(&input.specs, cfg)?;
    let (merged, weights) = merge_correlated(&input, &initial_weights, cfg.merge_corr_threshold)?;
    let (normalized, transforms) = transform_and_normalize(&merged, cfg)?;
    let groups = group_scores(&normalized, &weights)?;
    let penalties = binary_penalties(&normalized, &weights)?;
    let result = assemble(&normalized, &groups, &penalties, cfg, n_speakers)?;
    Ok(IndexRun {
        input,
        initial_weights,
        merged,
        weights,
        transforms,
        normalized,
        group_scores: groups,
        penalties,
        result,
    })
}
