//! The validated dataset produced by `ingest` and consumed by every later
//! stage.

use std::collections::BTreeMap;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use super::diffusion::{build_diffusion_series, monthly_timestamps, DiffusionSeries};
use super::geo::{geo_join, registry_locations, Boundary, JoinedLocation};
use super::manifest::CoverageManifest;
use super::matrix::{assignments, build_feature_matrix, MatrixSources};
use super::snapshot::{latest_date_per_year, resolve_snapshot, CodeResolver, ResolvedSnapshot, SnapshotRow};
use super::tables::{GeoTable, LanguageTable, University};
use crate::error::{Error, Result};
use crate::model::{
    validate_dataset, DevelopmentConfig, DevelopmentScore, FeatureMatrix, FeatureSpec, GeoAssignment,
    LanguageRecord, ValidationReport,
};

pub const BUNDLE_FORMAT: u32 = 1;

/// Parsed input files. Optional tables may be omitted when no feature
/// reads them.
#[derive(Debug, Clone, Default)]
pub struct IngestInputs {
    pub records: Vec<LanguageRecord>,
    pub registry_report: ValidationReport,
    pub snapshots: Vec<SnapshotRow>,
    pub geo: Option<GeoTable>,
    pub languages: Option<LanguageTable>,
    pub universities: Option<Vec<University>>,
    pub manifests: Vec<CoverageManifest>,
    pub boundaries: Option<Vec<Boundary>>,
    pub features: Vec<FeatureSpec>,
    pub faithful_extract: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetBundle {
    pub format: u32,
    /// `true` only when the inputs are an extract of the original sources.
    pub faithful_extract: bool,
    pub records: Vec<LanguageRecord>,
    pub locations: BTreeMap<String, JoinedLocation>,
    /// Raw matrix built from the latest snapshot year; not yet imputed.
    pub matrix: FeatureMatrix,
    pub geo: GeoTable,
    /// Resolved counts of the last snapshot in each year.
    pub yearly_counts: BTreeMap<i32, ResolvedSnapshot>,
    pub diffusion: DiffusionSeries,
    pub validation: ValidationReport,
    pub warnings: Vec<String>,
}

impl DatasetBundle {
    pub fn assignments(&self) -> BTreeMap<String, GeoAssignment> {
        assignments(&self.locations)
    }

    pub fn development_scores(&self, cfg: &DevelopmentConfig) -> BTreeMap<String, DevelopmentScore> {
        self.geo.development_scores(cfg)
    }

    pub fn record(&self, glottocode: &str) -> Option<&LanguageRecord> {
        self.records.iter().find(|r| r.glottocode == glottocode)
    }

    pub fn latest_year(&self) -> Option<i32> {
        self.yearly_counts.keys().next_back().copied()
    }

    pub fn speakers(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.n_speakers).collect()
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self)?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let b: Self = serde_json::from_slice(bytes)?;
        if b.format != BUNDLE_FORMAT {
            return Err(Error::parse(0, format!("bundle format {} is not supported", b.format)));
        }
        Ok(b)
    }
}

pub fn build_bundle(inputs: IngestInputs) -> Result<DatasetBundle> {
    let IngestInputs {
        records,
        registry_report,
        snapshots,
        geo,
        languages,
        universities,
        manifests,
        boundaries,
        features,
        faithful_extract,
    } = inputs;
    if records.is_empty() {
        return Err(Error::EmptyInput("language registry"));
    }
    let mut warnings = Vec::new();

    let locations = match &boundaries {
        Some(b) => geo_join(&records, b)?,
        None => registry_locations(&records),
    };

    let resolver = CodeResolver::new(&records);
    let mut yearly_counts = BTreeMap::new();
    for (year, date) in latest_date_per_year(&snapshots) {
        let resolved = resolve_snapshot(&snapshots, date, &resolver);
        if !resolved.unmapped.is_empty() {
            warnings.push(format!(
                "snapshot {date}: {} unmapped language codes: {}",
                resolved.unmapped.len(),
                resolved.unmapped.join(" ")
            ));
        }
        yearly_counts.insert(year, resolved);
    }

    let assign = assignments(&locations);
    let matrix = build_feature_matrix(
        &MatrixSources {
            records: &records,
            locations: &assign,
            snapshot: yearly_counts.values().next_back(),
            geo: geo.as_ref(),
            languages: languages.as_ref(),
            universities: universities.as_deref(),
        },
        &features,
    )?;

    let timestamps = match (
        manifests.iter().map(|m| m.release_date).min(),
        manifests.iter().map(|m| m.release_date).max(),
    ) {
        (Some(first), Some(last)) => {
            let end = snapshots.iter().map(|s| s.snapshot_date).max().map_or(last, |s| s.max(last));
            monthly_timestamps(first.with_day(1).expect("day 1 exists"), end)
        }
        _ => Vec::new(),
    };
    let (diffusion, unknown) = build_diffusion_series(&records, &manifests, &timestamps)?;
    if !unknown.is_empty() {
        warnings.push(format!("manifests: {} unknown language codes: {}", unknown.len(), unknown.join(" ")));
    }

    let mut validation = validate_dataset(&records, &matrix);
    let mut report = registry_report;
    // Registry checks overlap with the dataset checks; keep one of each.
    for e in validation.errors.drain(..) {
        if !report.errors.contains(&e) {
            report.errors.push(e);
        }
    }
    for e in validation.excluded.drain(..) {
        if !report.excluded.contains(&e) {
            report.excluded.push(e);
        }
    }

    Ok(DatasetBundle {
        format: BUNDLE_FORMAT,
        faithful_extract,
        records,
        locations,
        matrix,
        geo: geo.unwrap_or_default(),
        yearly_counts,
        diffusion,
        validation: report,
        warnings,
    })
}
