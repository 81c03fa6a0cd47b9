use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{FeatureMatrix, IndexConfig, LogTransform};
use crate::stats::{ks_exponential_test, ExpTestResult};

/// What happened to one column during shifting, log and min-max scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnTransform {
    pub feature_id: String,
    pub binary: bool,
    pub log_applied: bool,
    /// Exponential-shape test on the shifted column (auto mode only).
    pub ks: Option<ExpTestResult>,
    pub min: f64,
    pub max: f64,
    pub constant: bool,
}

pub fn transform_and_normalize(
    matrix: &FeatureMatrix,
    cfg: &IndexConfig,
) -> Result<(FeatureMatrix, Vec<ColumnTransform>)> {
    let mut out = matrix.clone();
    let mut report = Vec::with_capacity(matrix.n_cols());
    for (c, spec) in matrix.specs.iter().enumerate() {
        let col = matrix.dense_column(c)?;
        if spec.is_binary() {
            report.push(ColumnTransform {
                feature_id: spec.feature_id.clone(),
                binary: true,
                log_applied: false,
                ks: None,
                min: 0.0,
                max: 1.0,
                constant: false,
            });
            continue;
        }
        let shifted: Vec<f64> = col.iter().map(|x| x + 1.0).collect();
        let ks = match spec.log_transform {
            LogTransform::Auto => ks_exponential_test(&shifted, cfg.ks_alpha).ok(),
            _ => None,
        };
        let log_applied = match spec.log_transform {
            LogTransform::Always => true,
            LogTransform::Never => false,
            LogTransform::Auto => ks.is_some_and(|k| !k.reject),
        };
        let values: Vec<f64> = if log_applied {
            shifted.iter().map(|x| (x + cfg.epsilon).ln()).collect()
        } else {
            shifted
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let constant = !(max > min);
        for (r, v) in values.iter().enumerate() {
            let scaled = if constant {
                cfg.constant_feature_value
            } else {
                ((v - min) / (max - min)).max(cfg.epsilon)
            };
            out.set(r, c, Some(scaled));
        }
        report.push(ColumnTransform {
            feature_id: spec.feature_id.clone(),
            binary: false,
            log_applied,
            ks,
            min,
            max,
            constant,
        });
    }
    Ok((out, report))
}
