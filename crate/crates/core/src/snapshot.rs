//! The immutable, fully computed artifact that the service and the export
//! command read from.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    diffusion_analysis, ols_analysis, pca_analysis, stepwise_analysis, zipf_analysis, DiffusionAnalysis,
    OlsAnalysis, PcaAnalysis, StepwiseAnalysis, ZipfAnalysis,
};
use crate::error::{Error, Result};
use crate::impute::{impute_all, ImputationLog};
use crate::index::{run_index, IndexRun};
use crate::ingest::{DatasetBundle, DiffusionSeries};
use crate::model::{FeatureMatrix, IndexConfig, IndexResult, LanguageRecord};
use crate::stats::LanguageCategory;

/// Imputed matrix, imputation log and full index run for one bundle.
#[derive(Debug, Clone)]
pub struct Scored {
    pub imputed: FeatureMatrix,
    pub log: ImputationLog,
    pub run: IndexRun,
}

pub fn score_bundle(bundle: &DatasetBundle, cfg: &IndexConfig) -> Result<Scored> {
    cfg.validate(&bundle.matrix.specs)?;
    let development = bundle.development_scores(&cfg.development);
    let (imputed, log) = impute_all(&bundle.matrix, &bundle.assignments(), &development)?;
    let run = run_index(&imputed, &bundle.speakers(), cfg)?;
    Ok(Scored { imputed, log, run })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Fits {
    pub zipf: Option<ZipfAnalysis>,
    pub ols: Option<OlsAnalysis>,
    pub diffusion: Option<DiffusionAnalysis>,
    pub pca: Option<PcaAnalysis>,
    pub stepwise: Option<StepwiseAnalysis>,
    /// Fits that could not be computed on this bundle, with the reason.
    pub errors: BTreeMap<String, String>,
}

fn keep<T>(name: &str, r: Result<T>, errors: &mut BTreeMap<String, String>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            errors.insert(name.to_string(), e.to_string());
            None
        }
    }
}

pub fn run_fits(bundle: &DatasetBundle, imputed: &FeatureMatrix) -> Fits {
    let mut errors = BTreeMap::new();
    Fits {
        zipf: keep("zipf", zipf_analysis(bundle, None), &mut errors),
        ols: keep("ols", ols_analysis(bundle, None), &mut errors),
        diffusion: keep("diffusion", diffusion_analysis(&bundle.diffusion), &mut errors),
        pca: keep("pca", pca_analysis(imputed), &mut errors),
        stepwise: keep("stepwise", stepwise_analysis(bundle, imputed), &mut errors),
        errors,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiSnapshot {
    pub build_id: String,
    pub built_at: String,
    pub faithful_extract: bool,
    pub config: IndexConfig,
    pub records: Vec<LanguageRecord>,
    /// Imputed values of every feature, including those outside the index.
    pub features: FeatureMatrix,
    pub imputation: ImputationLog,
    pub index_result: IndexResult,
    pub categories: BTreeMap<String, LanguageCategory>,
    pub diffusion: DiffusionSeries,
    pub fits: Fits,
}

/// Content hash of bundle and config; equal inputs give equal ids.
pub fn build_id(bundle: &DatasetBundle, cfg: &IndexConfig) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(bundle)?);
    h.update(b"\0");
    h.update(serde_json::to_vec(cfg)?);
    Ok(hex::encode(&h.finalize()[..8]))
}

impl ApiSnapshot {
    pub fn build(bundle: &DatasetBundle, cfg: &IndexConfig, built_at: String) -> Result<Self> {
        let scored = score_bundle(bundle, cfg)?;
        let fits = run_fits(bundle, &scored.imputed);
        let categories = fits.ols.as_ref().map(OlsAnalysis::categories).unwrap_or_default();
        let snap = Self {
            build_id: build_id(bundle, cfg)?,
            built_at,
            faithful_extract: bundle.faithful_extract,
            config: cfg.clone(),
            records: bundle.records.clone(),
            features: scored.imputed,
            imputation: scored.log,
            index_result: scored.run.result,
            categories,
            diffusion: bundle.diffusion.clone(),
            fits,
        };
        snap.validate()?;
        Ok(snap)
    }

    pub fn validate(&self) -> Result<()> {
        let known: std::collections::HashSet<&str> =
            self.records.iter().map(|r| r.glottocode.as_str()).collect();
        if let Some(e) = self
            .index_result
            .entries
            .iter()
            .find(|e| !known.contains(e.glottocode.as_str()))
        {
            return Err(Error::Invariant(format!("{} is scored but not in the registry", e.glottocode)));
        }
        if self.features.languages.len() != self.index_result.entries.len() {
            return Err(Error::Invariant("feature rows and index entries differ in number".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec(self)?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let s: Self = serde_json::from_slice(bytes)?;
        s.validate()?;
        Ok(s)
    }
}
