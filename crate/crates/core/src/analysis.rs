//! The exploratory fits run over a dataset bundle, with plot-ready series.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{DatasetBundle, DiffusionSeries, ResolvedSnapshot};
use crate::model::{FeatureKind, FeatureMatrix};
use crate::stats::{
    classify_languages, fit_gompertz, fit_power_law, fit_speakers_models, linearize_gompertz,
    normalize_time, pca_varimax, positive_counts, stepwise_select, zipf_residual_sigma, GompertzFit,
    LanguageCategory, LogLogOlsFit, PcaResult, PowerLawFit, SpeakerModelPoint, StepwiseResult,
    TimeNormalization,
};

pub const PCA_COMPONENTS: usize = 2;
pub const STEPWISE_OUTCOME: &str = "n_models";
/// Features left out of the stepwise candidates besides the outcome.
pub const STEPWISE_EXCLUDED: [&str; 1] = ["n_datasets"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankPoint {
    pub rank: usize,
    pub count: f64,
    /// Value of the free-slope fit at this rank.
    pub fitted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZipfSeries {
    pub fit: PowerLawFit,
    pub sigma_e: f64,
    pub points: Vec<RankPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZipfAnalysis {
    pub year: i32,
    pub models: ZipfSeries,
    pub datasets: ZipfSeries,
}

fn zipf_series(counts: Vec<f64>) -> Result<ZipfSeries> {
    let fit = fit_power_law(&counts)?;
    let sigma_e = zipf_residual_sigma(&counts)?;
    let mut sorted = counts;
    sorted.sort_by(|a, b| b.total_cmp(a));
    let points = sorted
        .into_iter()
        .enumerate()
        .map(|(i, count)| RankPoint {
            rank: i + 1,
            count,
            fitted: (fit.log_c - fit.alpha * ((i + 1) as f64).ln()).exp(),
        })
        .collect();
    Ok(ZipfSeries { fit, sigma_e, points })
}

fn year_counts(bundle: &DatasetBundle, year: Option<i32>) -> Result<(i32, &ResolvedSnapshot)> {
    let year = match year {
        Some(y) => y,
        None => bundle.latest_year().ok_or(Error::EmptyInput("snapshots"))?,
    };
    let snap = bundle
        .yearly_counts
        .get(&year)
        .ok_or_else(|| Error::InvalidConfig(format!("no snapshot for year {year}")))?;
    Ok((year, snap))
}

pub fn zipf_analysis(bundle: &DatasetBundle, year: Option<i32>) -> Result<ZipfAnalysis> {
    let (year, snap) = year_counts(bundle, year)?;
    Ok(ZipfAnalysis {
        year,
        models: zipf_series(positive_counts(snap.counts.values().map(|c| c.0)))?,
        datasets: zipf_series(positive_counts(snap.counts.values().map(|c| c.1)))?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsPoint {
    pub glottocode: String,
    pub n_speakers: u64,
    pub n_models: u64,
    pub fitted_log: f64,
    pub studentized_residual: f64,
    pub p_value: f64,
    pub category: LanguageCategory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsAnalysis {
    pub year: i32,
    pub fit: LogLogOlsFit,
    pub points: Vec<OlsPoint>,
    pub category_counts: BTreeMap<LanguageCategory, usize>,
}

impl OlsAnalysis {
    pub fn categories(&self) -> BTreeMap<String, LanguageCategory> {
        self.points.iter().map(|p| (p.glottocode.clone(), p.category)).collect()
    }
}

pub fn ols_analysis(bundle: &DatasetBundle, year: Option<i32>) -> Result<OlsAnalysis> {
    let (year, snap) = year_counts(bundle, year)?;
    let pts: Vec<SpeakerModelPoint> = bundle
        .records
        .iter()
        .map(|r| SpeakerModelPoint {
            glottocode: r.glottocode.clone(),
            n_speakers: r.n_speakers,
            n_models: snap.models(&r.glottocode),
            is_dead: r.is_dead,
        })
        .collect();
    let fit = fit_speakers_models(&pts)?;
    let cats = classify_languages(&fit, &pts)?;
    let mut category_counts = BTreeMap::new();
    let points = fit
        .included
        .iter()
        .enumerate()
        .map(|(j, &i)| {
            let p = &pts[i];
            let category = cats[&p.glottocode];
            *category_counts.entry(category).or_insert(0) += 1;
            OlsPoint {
                glottocode: p.glottocode.clone(),
                n_speakers: p.n_speakers,
                n_models: p.n_models,
                fitted_log: fit.predict_log(p.n_speakers as f64),
                studentized_residual: fit.studentized_residuals[j],
                p_value: fit.p_values[j],
                category,
            }
        })
        .collect();
    Ok(OlsAnalysis {
        year,
        fit,
        points,
        category_counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionPoint {
    pub date: NaiveDate,
    pub t_norm: f64,
    pub s_t: f64,
    pub fitted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionAnalysis {
    pub fit: GompertzFit,
    pub time: TimeNormalization,
    pub points: Vec<DiffusionPoint>,
    /// `(t_norm, -ln(-ln(S_t / A)))` for the points strictly inside (0, A).
    pub linearized: Vec<(f64, f64)>,
    pub linearized_excluded: usize,
}

pub fn diffusion_analysis(series: &DiffusionSeries) -> Result<DiffusionAnalysis> {
    let (t_norm, time) = normalize_time(&series.decimal_times())?;
    let s = series.totals_f64();
    let fit = fit_gompertz(&t_norm, &s)?;
    let lin = linearize_gompertz(&fit, &t_norm, &s);
    let points = series
        .timestamps
        .iter()
        .zip(&t_norm)
        .zip(&s)
        .map(|((&date, &t), &s_t)| DiffusionPoint {
            date,
            t_norm: t,
            s_t,
            fitted: fit.eval(t),
        })
        .collect();
    Ok(DiffusionAnalysis {
        fit,
        time,
        points,
        linearized: lin.points,
        linearized_excluded: lin.excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaAnalysis {
    pub variables: Vec<String>,
    pub n: usize,
    pub result: PcaResult,
}

fn continuous_columns(matrix: &FeatureMatrix) -> Vec<usize> {
    (0..matrix.n_cols())
        .filter(|&c| matrix.specs[c].kind == FeatureKind::Continuous)
        .collect()
}

/// PCA over every continuous feature of an imputed matrix.
pub fn pca_analysis(imputed: &FeatureMatrix) -> Result<PcaAnalysis> {
    let cols = continuous_columns(imputed);
    let mut data = DMatrix::zeros(imputed.n_rows(), cols.len());
    for (j, &c) in cols.iter().enumerate() {
        for (i, v) in imputed.dense_column(c)?.into_iter().enumerate() {
            data[(i, j)] = v;
        }
    }
    Ok(PcaAnalysis {
        variables: cols.iter().map(|&c| imputed.specs[c].feature_id.clone()).collect(),
        n: imputed.n_rows(),
        result: pca_varimax(&data, PCA_COMPONENTS)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepwiseAnalysis {
    pub outcome: String,
    pub grouping: Vec<String>,
    pub result: StepwiseResult,
}

fn zscore(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    (sd > 0.0 && sd.is_finite()).then(|| v.iter().map(|x| (x - m) / sd).collect())
}

/// Stepwise OLS of `ln(1 + n_models)` on the other features, with macroarea
/// dummies always in the model. Continuous candidates enter as standardized
/// `ln(1 + x)`, binaries as 0/1. Constant columns are not offered.
pub fn stepwise_analysis(bundle: &DatasetBundle, imputed: &FeatureMatrix) -> Result<StepwiseAnalysis> {
    let outcome = imputed
        .col_index(STEPWISE_OUTCOME)
        .ok_or_else(|| Error::UnknownFeature(STEPWISE_OUTCOME.into()))?;
    let y: Vec<f64> = imputed.dense_column(outcome)?.iter().map(|v| v.ln_1p()).collect();
    let mut candidates = Vec::new();
    for (c, spec) in imputed.specs.iter().enumerate() {
        if c == outcome || STEPWISE_EXCLUDED.contains(&spec.feature_id.as_str()) {
            continue;
        }
        let col = imputed.dense_column(c)?;
        let values = match spec.kind {
            FeatureKind::Binary => Some(col),
            FeatureKind::Continuous => {
                if col.iter().any(|&v| v <= -1.0) {
                    zscore(&col)
                } else {
                    zscore(&col.iter().map(|v| v.ln_1p()).collect::<Vec<_>>())
                }
            }
        };
        if let Some(v) = values.filter(|v| v.iter().any(|x| *x != v[0])) {
            candidates.push((spec.feature_id.clone(), v));
        }
    }
    let by_code: BTreeMap<&str, &str> = bundle
        .records
        .iter()
        .map(|r| (r.glottocode.as_str(), r.macroarea.as_str()))
        .collect();
    let macroarea: Vec<String> = imputed
        .languages
        .iter()
        .map(|g| by_code.get(g.as_str()).map(|s| s.to_string()))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Invariant("matrix row without a registry record".into()))?;
    let result = stepwise_select(&y, &candidates, &[("macroarea".to_string(), macroarea)])?;
    Ok(StepwiseAnalysis {
        outcome: format!("ln(1 + {STEPWISE_OUTCOME})"),
        grouping: vec!["macroarea".into()],
        result,
    })
}
