//! Geographic gap filling for the feature matrix.
//!
//! Each feature is observed on units given by its geographic level: a
//! language, an admin-1 region, or a country. A missing unit first takes the
//! mean of the observed units of its own country; a country with no observed
//! unit then copies from the observed country with the closest development
//! score. Missing binary cells are set to 0.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DevelopmentScore, FeatureMatrix, GeoAssignment, GeoLevel};
use crate::numfmt::fmt_sig12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputationMethod {
    SubnationalMean,
    SimilarCountry,
    AbsentBinary,
}

impl ImputationMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::SubnationalMean => "subnational_mean",
            Self::SimilarCountry => "similar_country",
            Self::AbsentBinary => "absent_binary",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputationEntry {
    pub glottocode: String,
    pub feature_id: String,
    pub method: ImputationMethod,
    /// Country whose values were averaged or copied; empty for binaries.
    pub donor: String,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ImputationLog {
    pub entries: Vec<ImputationEntry>,
}

impl ImputationLog {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn find(&self, glottocode: &str, feature_id: &str) -> Option<&ImputationEntry> {
        self.entries
            .iter()
            .find(|e| e.glottocode == glottocode && e.feature_id == feature_id)
    }

    fn extend(&mut self, other: ImputationLog) {
        self.entries.extend(other.entries);
    }

    /// Order by feature (in `matrix` column order), then glottocode.
    fn sort_for(&mut self, matrix: &FeatureMatrix) {
        let pos: BTreeMap<&str, usize> = matrix
            .specs
            .iter()
            .enumerate()
            .map(|(i, s)| (s.feature_id.as_str(), i))
            .collect();
        self.entries.sort_by(|a, b| {
            pos.get(a.feature_id.as_str())
                .cmp(&pos.get(b.feature_id.as_str()))
                .then_with(|| a.glottocode.cmp(&b.glottocode))
        });
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["glottocode", "feature_id", "method", "donor", "value"])?;
        for e in &self.entries {
            w.write_record([
                e.glottocode.as_str(),
                e.feature_id.as_str(),
                e.method.as_str(),
                e.donor.as_str(),
                &fmt_sig12(e.value),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Grouping of the rows of one column into geographic units.
struct Units {
    /// unit key -> (country, rows sorted by glottocode)
    members: BTreeMap<String, (String, Vec<usize>)>,
}

fn unit_key(level: GeoLevel, glottocode: &str, geo: &GeoAssignment) -> String {
    match level {
        GeoLevel::Language => format!("lang:{glottocode}"),
        GeoLevel::Admin1 => format!(
            "adm1:{}\u{1f}{}",
            geo.country,
            geo.admin1.as_deref().unwrap_or("")
        ),
        GeoLevel::Country => format!("ctry:{}", geo.country),
    }
}

fn units(
    matrix: &FeatureMatrix,
    col: usize,
    assignment: &BTreeMap<String, GeoAssignment>,
) -> Result<Units> {
    let level = matrix.specs[col].geo_level;
    let mut members: BTreeMap<String, (String, Vec<usize>)> = BTreeMap::new();
    for (r, code) in matrix.languages.iter().enumerate() {
        let geo = assignment
            .get(code)
            .ok_or_else(|| Error::Invariant(format!("{code} has no geographic assignment")))?;
        members
            .entry(unit_key(level, code, geo))
            .or_insert_with(|| (geo.country.clone(), Vec::new()))
            .1
            .push(r);
    }
    for (_, rows) in members.values_mut() {
        rows.sort_by(|&a, &b| matrix.languages[a].cmp(&matrix.languages[b]));
    }
    Ok(Units { members })
}

/// Mean of the observed cells of each unit that has any.
fn observed_unit_values(matrix: &FeatureMatrix, col: usize, units: &Units) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (key, (_, rows)) in &units.members {
        let vals: Vec<f64> = rows.iter().filter_map(|&r| matrix.get(r, col)).collect();
        if !vals.is_empty() {
            out.insert(key.clone(), vals.iter().sum::<f64>() / vals.len() as f64);
        }
    }
    out
}

fn feature_col(matrix: &FeatureMatrix, feature_id: &str) -> Result<usize> {
    matrix
        .col_index(feature_id)
        .ok_or_else(|| Error::UnknownFeature(feature_id.to_string()))
}

fn fill(
    matrix: &mut FeatureMatrix,
    col: usize,
    rows: &[usize],
    value: f64,
    method: ImputationMethod,
    donor: &str,
    log: &mut ImputationLog,
) {
    for &r in rows {
        if matrix.get(r, col).is_none() {
            matrix.set(r, col, Some(value));
            log.entries.push(ImputationEntry {
                glottocode: matrix.languages[r].clone(),
                feature_id: matrix.specs[col].feature_id.clone(),
                method,
                donor: donor.to_string(),
                value,
            });
        }
    }
}

/// Fill missing units from the observed units of the same country.
pub fn impute_subnational(
    matrix: &FeatureMatrix,
    feature_id: &str,
    assignment: &BTreeMap<String, GeoAssignment>,
) -> Result<(FeatureMatrix, ImputationLog)> {
    let col = feature_col(matrix, feature_id)?;
    let mut out = matrix.clone();
    let mut log = ImputationLog::default();
    if matrix.specs[col].is_binary() {
        return Ok((out, log));
    }
    let units = units(matrix, col, assignment)?;
    let observed = observed_unit_values(matrix, col, &units);

    // Rows missing inside a partly observed unit take the unit's value.
    for (key, (country, rows)) in &units.members {
        if let Some(&v) = observed.get(key) {
            fill(&mut out, col, rows, v, ImputationMethod::SubnationalMean, country, &mut log);
        }
    }

    let mut by_country: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (key, (country, _)) in &units.members {
        if let Some(&v) = observed.get(key) {
            by_country.entry(country).or_default().push(v);
        }
    }
    for (key, (country, rows)) in &units.members {
        if observed.contains_key(key) {
            continue;
        }
        if let Some(vals) = by_country.get(country.as_str()) {
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            fill(&mut out, col, rows, mean, ImputationMethod::SubnationalMean, country, &mut log);
        }
    }
    log.sort_for(matrix);
    Ok((out, log))
}

/// Choose the observed country closest in development to `target`.
///
/// Countries are compared on the primary score when the target has one and
/// some donor shares it (ties: fallback score, then code); otherwise on the
/// fallback score (ties: code).
pub fn select_donor<'a>(
    target: &str,
    donors: &BTreeSet<&'a str>,
    development: &BTreeMap<String, DevelopmentScore>,
) -> Result<&'a str> {
    let t = development
        .get(target)
        .copied()
        .unwrap_or_default();
    let score = |c: &str| development.get(c).copied().unwrap_or_default();
    let key = |d: Option<f64>, s: Option<f64>| match (d, s) {
        (Some(a), Some(b)) => Some((a - b).abs()),
        _ => None,
    };

    if let Some(tp) = t.primary {
        let best = donors
            .iter()
            .filter_map(|&c| {
                let s = score(c);
                let d1 = key(Some(tp), s.primary)?;
                let d2 = key(t.fallback, s.fallback).unwrap_or(f64::INFINITY);
                Some((d1, d2, c))
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(b.2)));
        if let Some((_, _, c)) = best {
            return Ok(c);
        }
    }
    if let Some(tf) = t.fallback {
        let best = donors
            .iter()
            .filter_map(|&c| Some((key(Some(tf), score(c).fallback)?, c)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
        if let Some((_, c)) = best {
            return Ok(c);
        }
    }
    Err(Error::MissingDevelopmentScore(target.to_string()))
}

/// Fill countries without any observed unit by copying from the most similar
/// observed country (the mean of its observed units).
pub fn impute_national(
    matrix: &FeatureMatrix,
    feature_id: &str,
    assignment: &BTreeMap<String, GeoAssignment>,
    development: &BTreeMap<String, DevelopmentScore>,
) -> Result<(FeatureMatrix, ImputationLog)> {
    let col = feature_col(matrix, feature_id)?;
    let mut out = matrix.clone();
    let mut log = ImputationLog::default();
    if matrix.specs[col].is_binary() || !matrix.column(col).iter().any(Option::is_none) {
        return Ok((out, log));
    }
    let units = units(matrix, col, assignment)?;
    let observed = observed_unit_values(matrix, col, &units);

    let mut country_values: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (key, (country, _)) in &units.members {
        if let Some(&v) = observed.get(key) {
            country_values.entry(country).or_default().push(v);
        }
    }
    if country_values.is_empty() {
        return Err(Error::NoDonor(feature_id.to_string()));
    }
    let donors: BTreeSet<&str> = country_values.keys().copied().collect();
    let country_mean: BTreeMap<&str, f64> = country_values
        .iter()
        .map(|(c, v)| (*c, v.iter().sum::<f64>() / v.len() as f64))
        .collect();

    for (country, rows) in units.members.values() {
        if donors.contains(country.as_str()) {
            continue;
        }
        let donor = select_donor(country, &donors, development)?;
        fill(
            &mut out,
            col,
            rows,
            country_mean[donor],
            ImputationMethod::SimilarCountry,
            donor,
            &mut log,
        );
    }
    log.sort_for(matrix);
    Ok((out, log))
}

/// Subnational then national pass for every continuous feature; missing
/// binary cells become 0.
pub fn impute_all(
    matrix: &FeatureMatrix,
    assignment: &BTreeMap<String, GeoAssignment>,
    development: &BTreeMap<String, DevelopmentScore>,
) -> Result<(FeatureMatrix, ImputationLog)> {
    let mut current = matrix.clone();
    let mut log = ImputationLog::default();
    for c in 0..matrix.n_cols() {
        let spec = &matrix.specs[c];
        if spec.is_binary() {
            let rows: Vec<usize> = (0..current.n_rows()).collect();
            fill(&mut current, c, &rows, 0.0, ImputationMethod::AbsentBinary, "", &mut log);
            continue;
        }
        if !current.column(c).iter().any(Option::is_none) {
            continue;
        }
        let (next, sub) = impute_subnational(&current, &spec.feature_id, assignment)?;
        let (next, nat) = impute_national(&next, &spec.feature_id, assignment, development)?;
        current = next;
        log.extend(sub);
        log.extend(nat);
    }
    log.sort_for(matrix);
    Ok((current, log))
}
