//! Speakers-vs-models regression on log axes, externally studentized
//! residuals, and the four-way language classification built on them.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::linreg::{simple_ols, t_lower, t_two_sided};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLogOlsFit {
    pub beta0: f64,
    pub beta1: f64,
    pub beta1_stderr: f64,
    pub beta1_p_value: f64,
    pub r2: f64,
    /// Indices (into the caller's input) of the points used; only pairs with
    /// x >= 1 and y >= 1 enter the fit.
    pub included: Vec<usize>,
    pub residuals: Vec<f64>,
    pub studentized_residuals: Vec<f64>,
    /// One-sided lower-tail p-values of the studentized residuals.
    pub p_values: Vec<f64>,
}

impl LogLogOlsFit {
    pub fn n(&self) -> usize {
        self.included.len()
    }

    pub fn predict_log(&self, x: f64) -> f64 {
        self.beta0 + self.beta1 * x.ln()
    }
}

/// OLS of `ln y` on `ln x` over the pairs with both values at least 1.
pub fn fit_loglog_ols(x: &[f64], y: &[f64]) -> Result<LogLogOlsFit> {
    if x.len() != y.len() {
        return Err(Error::Invariant("x and y differ in length".into()));
    }
    let included: Vec<usize> = (0..x.len())
        .filter(|&i| x[i] >= 1.0 && y[i] >= 1.0 && x[i].is_finite() && y[i].is_finite())
        .collect();
    let lx: Vec<f64> = included.iter().map(|&i| x[i].ln()).collect();
    let ly: Vec<f64> = included.iter().map(|&i| y[i].ln()).collect();
    let ols = simple_ols(&lx, &ly)?;
    let n = lx.len();
    let p = 2usize;

    let df_loo = n as f64 - p as f64 - 1.0;
    let studentized: Vec<f64> = ols
        .residuals
        .iter()
        .zip(&ols.leverage)
        .map(|(&e, &h)| {
            let one_minus_h = 1.0 - h;
            let rss_loo = (ols.rss - e * e / one_minus_h).max(0.0);
            if df_loo <= 0.0 {
                return f64::NAN;
            }
            let s_loo = (rss_loo / df_loo).sqrt();
            if s_loo == 0.0 {
                // Perfect fit without this point.
                return if e == 0.0 { 0.0 } else { e.signum() * f64::INFINITY };
            }
            e / (s_loo * one_minus_h.sqrt())
        })
        .collect();
    let p_values = studentized.iter().map(|&t| t_lower(t, df_loo)).collect();

    let t_slope = if ols.slope_se > 0.0 {
        ols.slope / ols.slope_se
    } else {
        ols.slope.signum() * f64::INFINITY
    };
    Ok(LogLogOlsFit {
        beta0: ols.intercept,
        beta1: ols.slope,
        beta1_stderr: ols.slope_se,
        beta1_p_value: t_two_sided(t_slope, n as f64 - 2.0),
        r2: ols.r2,
        included,
        residuals: ols.residuals,
        studentized_residuals: studentized,
        p_values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LanguageCategory {
    UnderResourced,
    OverResourcedTop5Bin,
    Dead,
    MidTier,
}

/// One language as seen by the classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerModelPoint {
    pub glottocode: String,
    pub n_speakers: u64,
    pub n_models: u64,
    pub is_dead: bool,
}

pub const UNDER_RESOURCED_MIN_SPEAKERS: u64 = 1_000_000;
pub const UNDER_RESOURCED_P: f64 = 0.05;
pub const TOP_PER_BIN: usize = 5;

/// Base-10 decade of a speaker count (1-9 -> 0, 10-99 -> 1, ...).
pub fn speaker_decade(n_speakers: u64) -> u32 {
    if n_speakers == 0 {
        0
    } else {
        n_speakers.ilog10()
    }
}

pub fn fit_speakers_models(points: &[SpeakerModelPoint]) -> Result<LogLogOlsFit> {
    let x: Vec<f64> = points.iter().map(|p| p.n_speakers as f64).collect();
    let y: Vec<f64> = points.iter().map(|p| p.n_models as f64).collect();
    fit_loglog_ols(&x, &y)
}

/// Glottocodes of the top languages by model count within each decade bin.
/// Ties: more speakers first, then glottocode.
pub fn top_per_bin(points: &[&SpeakerModelPoint], k: usize) -> Vec<String> {
    let mut bins: BTreeMap<u32, Vec<&SpeakerModelPoint>> = BTreeMap::new();
    for p in points {
        bins.entry(speaker_decade(p.n_speakers)).or_default().push(p);
    }
    let mut out = Vec::new();
    for (_, mut members) in bins {
        members.sort_by(|a, b| {
            b.n_models
                .cmp(&a.n_models)
                .then_with(|| b.n_speakers.cmp(&a.n_speakers))
                .then_with(|| a.glottocode.cmp(&b.glottocode))
        });
        out.extend(members.into_iter().take(k).map(|p| p.glottocode.clone()));
    }
    out
}

/// Classify the languages that entered `fit` (which must have been computed
/// from the same `points`). Precedence: dead, under-resourced, top-5 per
/// speaker decade, mid-tier.
pub fn classify_languages(
    fit: &LogLogOlsFit,
    points: &[SpeakerModelPoint],
) -> Result<BTreeMap<String, LanguageCategory>> {
    if let Some(&bad) = fit.included.iter().find(|&&i| i >= points.len()) {
        return Err(Error::Invariant(format!(
            "fit refers to point {bad} but only {} were supplied",
            points.len()
        )));
    }
    let fitted: Vec<&SpeakerModelPoint> = fit.included.iter().map(|&i| &points[i]).collect();
    let top: HashMap<String, ()> = top_per_bin(&fitted, TOP_PER_BIN)
        .into_iter()
        .map(|g| (g, ()))
        .collect();

    let mut out = BTreeMap::new();
    for (j, p) in fitted.iter().enumerate() {
        let category = if p.is_dead {
            LanguageCategory::Dead
        } else if fit.p_values[j] < UNDER_RESOURCED_P
            && fit.studentized_residuals[j] < 0.0
            && p.n_speakers > UNDER_RESOURCED_MIN_SPEAKERS
        {
            LanguageCategory::UnderResourced
        } else if top.contains_key(&p.glottocode) {
            LanguageCategory::OverResourcedTop5Bin
        } else {
            LanguageCategory::MidTier
        };
        out.insert(p.glottocode.clone(), category);
    }
    Ok(out)
}
