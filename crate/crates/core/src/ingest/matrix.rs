//! Assembly of the language x feature matrix from the parsed sources.

use std::collections::BTreeMap;

use super::geo::{nearest_university_distance, JoinedLocation};
use super::snapshot::ResolvedSnapshot;
use super::tables::{GeoTable, LanguageTable, University};
use crate::error::{Error, Result};
use crate::model::{
    FeatureMatrix, FeatureSource, FeatureSpec, GeoAssignment, GeoLevel, LanguageRecord,
    RegistryField, SnapshotField,
};

/// Parsed inputs a feature can draw from. Absent tables are `None`.
#[derive(Debug, Clone, Copy)]
pub struct MatrixSources<'a> {
    pub records: &'a [LanguageRecord],
    pub locations: &'a BTreeMap<String, GeoAssignment>,
    pub snapshot: Option<&'a ResolvedSnapshot>,
    pub geo: Option<&'a GeoTable>,
    pub languages: Option<&'a LanguageTable>,
    pub universities: Option<&'a [University]>,
}

pub fn assignments(locations: &BTreeMap<String, JoinedLocation>) -> BTreeMap<String, GeoAssignment> {
    locations
        .iter()
        .map(|(g, l)| (g.clone(), l.assignment.clone()))
        .collect()
}

fn missing_table(spec: &FeatureSpec, table: &str) -> Error {
    Error::SpecMismatch(format!("{} reads the {table}, which was not supplied", spec.feature_id))
}

/// One row per record, in record order. Cells without a source value stay
/// missing; a language absent from the snapshot has zero models.
pub fn build_feature_matrix(src: &MatrixSources<'_>, specs: &[FeatureSpec]) -> Result<FeatureMatrix> {
    let languages: Vec<String> = src.records.iter().map(|r| r.glottocode.clone()).collect();
    let mut m = FeatureMatrix::empty(languages, specs.to_vec());
    let geo_latest = src.geo.map(GeoTable::latest);
    let lang_lookup = src.languages.map(LanguageTable::lookup);

    for (c, spec) in specs.iter().enumerate() {
        let column: Vec<Option<f64>> = match &spec.source {
            FeatureSource::Registry { field } => src
                .records
                .iter()
                .map(|r| {
                    Some(match field {
                        RegistryField::Speakers => r.n_speakers as f64,
                        RegistryField::Institutional => f64::from(u8::from(r.institutional)),
                        RegistryField::Vitality => r.vitality.score(),
                    })
                })
                .collect(),
            FeatureSource::Snapshot { field } => {
                let snap = src.snapshot.ok_or_else(|| missing_table(spec, "snapshot"))?;
                src.records
                    .iter()
                    .map(|r| {
                        Some(match field {
                            SnapshotField::Models => snap.models(&r.glottocode),
                            SnapshotField::Datasets => snap.datasets(&r.glottocode),
                        } as f64)
                    })
                    .collect()
            }
            FeatureSource::LanguageTable => {
                let (table, lookup) = src
                    .languages
                    .zip(lang_lookup.as_ref())
                    .ok_or_else(|| missing_table(spec, "language table"))?;
                if !table.has_feature(&spec.feature_id) {
                    return Err(Error::SpecMismatch(format!(
                        "{} has no rows in the language table",
                        spec.feature_id
                    )));
                }
                src.records
                    .iter()
                    .map(|r| lookup.get(&(r.glottocode.as_str(), spec.feature_id.as_str())).copied())
                    .collect()
            }
            FeatureSource::GeoTable => {
                let (table, latest) = src
                    .geo
                    .zip(geo_latest.as_ref())
                    .ok_or_else(|| missing_table(spec, "geo table"))?;
                if !table.has_feature(&spec.feature_id) {
                    return Err(Error::SpecMismatch(format!("{} has no rows in the geo table", spec.feature_id)));
                }
                let mut col = Vec::with_capacity(src.records.len());
                for r in src.records {
                    let loc = src.locations.get(&r.glottocode).ok_or_else(|| {
                        Error::Invariant(format!("{} has no geographic assignment", r.glottocode))
                    })?;
                    let admin1 = match spec.geo_level {
                        GeoLevel::Admin1 => match &loc.admin1 {
                            Some(a) => Some(a.clone()),
                            None => {
                                col.push(None);
                                continue;
                            }
                        },
                        GeoLevel::Country => None,
                        GeoLevel::Language => {
                            return Err(Error::SpecMismatch(format!(
                                "{} is language-level but reads the geo table",
                                spec.feature_id
                            )))
                        }
                    };
                    col.push(latest.get(&(loc.country.clone(), admin1, spec.feature_id.clone())).copied());
                }
                col
            }
            FeatureSource::Universities { mode } => {
                let unis = src.universities.ok_or_else(|| missing_table(spec, "university list"))?;
                let points: Vec<(f64, f64)> = unis.iter().map(|u| (u.lat, u.lon)).collect();
                src.records
                    .iter()
                    .map(|r| {
                        nearest_university_distance((r.centroid_lat, r.centroid_lon), &points, *mode).map(Some)
                    })
                    .collect::<Result<_>>()?
            }
            FeatureSource::Derived => {
                return Err(Error::SpecMismatch(format!(
                    "{} is a derived feature and cannot be read from input files",
                    spec.feature_id
                )))
            }
        };
        for (r, v) in column.into_iter().enumerate() {
            m.set(r, c, v);
        }
    }
    Ok(m)
}
