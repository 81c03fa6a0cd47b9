//! Domain types shared by every stage of the pipeline, plus dataset
//! validation and rank/tier assignment.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Macroarea {
    Africa,
    Australia,
    Eurasia,
    NorthAmerica,
    Papunesia,
    SouthAmerica,
}

impl Macroarea {
    pub const ALL: [Macroarea; 6] = [
        Macroarea::Africa,
        Macroarea::Australia,
        Macroarea::Eurasia,
        Macroarea::NorthAmerica,
        Macroarea::Papunesia,
        Macroarea::SouthAmerica,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Macroarea::Africa => "africa",
            Macroarea::Australia => "australia",
            Macroarea::Eurasia => "eurasia",
            Macroarea::NorthAmerica => "north_america",
            Macroarea::Papunesia => "papunesia",
            Macroarea::SouthAmerica => "south_america",
        }
    }
}

/// Endangerment status, ordered from safest to extinct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vitality {
    NotEndangered,
    Threatened,
    Shifting,
    Moribund,
    NearlyExtinct,
    Extinct,
}

impl Vitality {
    /// Ordinal score in [0, 1], 1 = not endangered.
    pub fn score(self) -> f64 {
        match self {
            Vitality::NotEndangered => 1.0,
            Vitality::Threatened => 0.8,
            Vitality::Shifting => 0.6,
            Vitality::Moribund => 0.4,
            Vitality::NearlyExtinct => 0.2,
            Vitality::Extinct => 0.0,
        }
    }
}

/// One attested language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageRecord {
    pub glottocode: String,
    pub iso639_3: Option<String>,
    pub name: String,
    pub centroid_lat: f64,
    pub centroid_lon: f64,
    pub macroarea: Macroarea,
    pub family: String,
    pub primary_country: String,
    pub admin1: Option<String>,
    pub n_speakers: u64,
    pub vitality: Vitality,
    pub institutional: bool,
    pub is_dead: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    AiResources,
    Socioeconomic,
    DigitalInfrastructure,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 3] = [
        FeatureGroup::AiResources,
        FeatureGroup::Socioeconomic,
        FeatureGroup::DigitalInfrastructure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureGroup::AiResources => "ai_resources",
            FeatureGroup::Socioeconomic => "socioeconomic",
            FeatureGroup::DigitalInfrastructure => "digital_infrastructure",
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeoLevel {
    Language,
    Admin1,
    Country,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogTransform {
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegistryField {
    Speakers,
    Institutional,
    Vitality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotField {
    Models,
    Datasets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    /// Planar distance in coordinate degrees.
    #[default]
    Euclidean,
    /// Haversine distance in kilometres.
    GreatCircle,
}

/// Where the values of a feature come from during matrix assembly.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "table", rename_all = "snake_case")]
pub enum FeatureSource {
    Registry { field: RegistryField },
    Snapshot { field: SnapshotField },
    LanguageTable,
    GeoTable,
    Universities {
        #[serde(default)]
        mode: DistanceMode,
    },
    /// Produced by merging correlated features; never read from input files.
    Derived,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub feature_id: String,
    pub group: FeatureGroup,
    pub kind: FeatureKind,
    pub geo_level: GeoLevel,
    pub weight: f64,
    #[serde(default)]
    pub log_transform: LogTransform,
    pub source: FeatureSource,
    /// Features with `in_index = false` stay in the matrix for the
    /// exploratory analyses but are skipped by index scoring.
    #[serde(default = "default_true")]
    pub in_index: bool,
}

fn default_true() -> bool {
    true
}

impl FeatureSpec {
    pub fn is_binary(&self) -> bool {
        self.kind == FeatureKind::Binary
    }
}

/// Country and first-level subdivision a language is attributed to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GeoAssignment {
    pub country: String,
    pub admin1: Option<String>,
}

/// Development level of a country, used to pick imputation donors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DevelopmentScore {
    pub primary: Option<f64>,
    pub fallback: Option<f64>,
}

/// Languages x features, row-major, with optional (missing) cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub languages: Vec<String>,
    pub specs: Vec<FeatureSpec>,
    values: Vec<Option<f64>>,
}

impl FeatureMatrix {
    pub fn new(
        languages: Vec<String>,
        specs: Vec<FeatureSpec>,
        values: Vec<Option<f64>>,
    ) -> Result<Self> {
        if values.len() != languages.len() * specs.len() {
            return Err(Error::Invariant(format!(
                "matrix has {} cells, expected {} x {}",
                values.len(),
                languages.len(),
                specs.len()
            )));
        }
        Ok(Self {
            languages,
            specs,
            values,
        })
    }

    pub fn empty(languages: Vec<String>, specs: Vec<FeatureSpec>) -> Self {
        let n = languages.len() * specs.len();
        Self {
            languages,
            specs,
            values: vec![None; n],
        }
    }

    /// Build from dense rows.
    pub fn from_rows(
        languages: Vec<String>,
        specs: Vec<FeatureSpec>,
        rows: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        if rows.len() != languages.len() || rows.iter().any(|r| r.len() != specs.len()) {
            return Err(Error::Invariant("ragged matrix rows".into()));
        }
        Self::new(languages, specs, rows.into_iter().flatten().collect())
    }

    pub fn n_rows(&self) -> usize {
        self.languages.len()
    }

    pub fn n_cols(&self) -> usize {
        self.specs.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.specs.len() + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Option<f64>) {
        let n = self.specs.len();
        self.values[row * n + col] = value;
    }

    pub fn col_index(&self, feature_id: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.feature_id == feature_id)
    }

    pub fn row_index(&self, glottocode: &str) -> Option<usize> {
        self.languages.iter().position(|g| g == glottocode)
    }

    pub fn column(&self, col: usize) -> Vec<Option<f64>> {
        (0..self.n_rows()).map(|r| self.get(r, col)).collect()
    }

    /// Column with missing cells rejected.
    pub fn dense_column(&self, col: usize) -> Result<Vec<f64>> {
        (0..self.n_rows())
            .map(|r| {
                self.get(r, col).ok_or_else(|| {
                    Error::Invariant(format!(
                        "missing value for {} / {}",
                        self.languages[r], self.specs[col].feature_id
                    ))
                })
            })
            .collect()
    }

    pub fn row(&self, row: usize) -> &[Option<f64>] {
        let n = self.specs.len();
        &self.values[row * n..(row + 1) * n]
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn is_dense(&self) -> bool {
        self.missing_count() == 0
    }

    /// Keep only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        let specs = cols.iter().map(|&c| self.specs[c].clone()).collect();
        let values = (0..self.n_rows())
            .flat_map(|r| cols.iter().map(move |&c| (r, c)))
            .map(|(r, c)| self.get(r, c))
            .collect();
        FeatureMatrix {
            languages: self.languages.clone(),
            specs,
            values,
        }
    }

    /// Reorder rows by `perm`: new row i = old row perm[i].
    pub fn permute_rows(&self, perm: &[usize]) -> FeatureMatrix {
        let languages = perm.iter().map(|&r| self.languages[r].clone()).collect();
        let values = perm.iter().flat_map(|&r| self.row(r).to_vec()).collect();
        FeatureMatrix {
            languages,
            specs: self.specs.clone(),
            values,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupRankTables {
    #[serde(default)]
    pub ai_resources: Vec<String>,
    #[serde(default)]
    pub socioeconomic: Vec<String>,
    #[serde(default)]
    pub digital_infrastructure: Vec<String>,
}

impl GroupRankTables {
    pub fn get(&self, group: FeatureGroup) -> &[String] {
        match group {
            FeatureGroup::AiResources => &self.ai_resources,
            FeatureGroup::Socioeconomic => &self.socioeconomic,
            FeatureGroup::DigitalInfrastructure => &self.digital_infrastructure,
        }
    }
}

/// How "similar development level" is measured when copying values from
/// another country.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DevelopmentConfig {
    pub primary_feature: String,
    pub fallback_feature: String,
}

impl Default for DevelopmentConfig {
    fn default() -> Self {
        Self {
            primary_feature: "hdi".into(),
            fallback_feature: "gdp_pc".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndexConfig {
    pub merge_corr_threshold: f64,
    pub epsilon: f64,
    pub ks_alpha: f64,
    pub constant_feature_value: f64,
    pub group_rank_tables: GroupRankTables,
    pub tier_quantiles: Vec<f64>,
    /// Optional weights for the cross-group mean; `None` = unweighted.
    pub group_weights: Option<BTreeMap<FeatureGroup, f64>>,
    pub development: DevelopmentConfig,
}

impl Default for IndexConfig {
    fn default() -> Self {
        Self {
            merge_corr_threshold: 0.85,
            epsilon: 1e-6,
            ks_alpha: 0.05,
            constant_feature_value: 0.5,
            group_rank_tables: GroupRankTables::default(),
            tier_quantiles: vec![0.25, 0.5, 0.75],
            group_weights: None,
            development: DevelopmentConfig::default(),
        }
    }
}

impl IndexConfig {
    pub fn validate(&self, specs: &[FeatureSpec]) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.merge_corr_threshold > 0.0 && self.merge_corr_threshold < 1.0) {
            return bad("merge_corr_threshold must lie in (0, 1)");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be positive");
        }
        if !(self.ks_alpha > 0.0 && self.ks_alpha < 1.0) {
            return bad("ks_alpha must lie in (0, 1)");
        }
        if !(self.constant_feature_value > 0.0 && self.constant_feature_value <= 1.0) {
            return bad("constant_feature_value must lie in (0, 1]");
        }
        let q = &self.tier_quantiles;
        if q.iter().any(|&x| !(x > 0.0 && x < 1.0)) || q.windows(2).any(|w| w[0] >= w[1]) {
            return bad("tier_quantiles must be strictly increasing within (0, 1)");
        }
        if let Some(gw) = &self.group_weights {
            if gw.values().any(|&w| !(w > 0.0 && w.is_finite())) {
                return bad("group weights must be positive");
            }
            if FeatureGroup::ALL.iter().any(|g| !gw.contains_key(g)) {
                return bad("group_weights must list every group");
            }
        }
        let known: HashSet<&str> = specs.iter().map(|s| s.feature_id.as_str()).collect();
        for group in FeatureGroup::ALL {
            for id in self.group_rank_tables.get(group) {
                if !known.contains(id.as_str()) {
                    return Err(Error::UnknownFeature(id.clone()));
                }
            }
        }
        Ok(())
    }
}

/// Readiness tier; 1 is the top tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tier(pub u8);

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tier_{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub glottocode: String,
    pub overall: f64,
    pub subscores: BTreeMap<FeatureGroup, f64>,
    pub binary_penalty: f64,
    pub rank: usize,
    pub tier: Tier,
}

impl IndexEntry {
    /// Overall score recomputed from the stored parts. `None` means the
    /// unweighted geometric mean over groups.
    pub fn reconstructed_overall(&self, group_weights: Option<&BTreeMap<FeatureGroup, f64>>) -> f64 {
        cross_group_mean(&self.subscores, group_weights) * self.binary_penalty
    }
}

/// Geometric mean of group subscores, optionally weighted (weights are
/// renormalized over the groups present).
pub fn cross_group_mean(
    subscores: &BTreeMap<FeatureGroup, f64>,
    group_weights: Option<&BTreeMap<FeatureGroup, f64>>,
) -> f64 {
    let weight = |g: &FeatureGroup| match group_weights {
        Some(w) => w.get(g).copied().unwrap_or(0.0),
        None => 1.0,
    };
    let total: f64 = subscores.keys().map(weight).sum();
    let log_sum: f64 = subscores.iter().map(|(g, v)| weight(g) * v.ln()).sum();
    (log_sum / total).exp()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IndexResult {
    pub entries: Vec<IndexEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_weights: Option<BTreeMap<FeatureGroup, f64>>,
}

impl IndexResult {
    pub fn get(&self, glottocode: &str) -> Option<&IndexEntry> {
        self.entries.iter().find(|e| e.glottocode == glottocode)
    }

    pub fn reconstructed_overall(&self, entry: &IndexEntry) -> f64 {
        entry.reconstructed_overall(self.group_weights.as_ref())
    }
}

/// Input to [`rank_and_tier`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredLanguage {
    pub glottocode: String,
    pub score: f64,
    pub n_speakers: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub rank: usize,
    pub tier: Tier,
}

/// Sort order used everywhere a ranking is produced: score descending,
/// then speakers descending, then glottocode ascending.
pub fn ranking_order(
    a: (&str, f64, u64),
    b: (&str, f64, u64),
) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1)
        .then_with(|| b.2.cmp(&a.2))
        .then_with(|| a.0.cmp(b.0))
}

/// Assign ranks (1 = best) and quantile tiers.
///
/// A language lands in tier `1 + #{q : share_above >= 1 - q}` where
/// `share_above` is the fraction of languages with a strictly higher score,
/// so tiers depend only on score order and ties share a tier.
pub fn rank_and_tier(
    scores: &[ScoredLanguage],
    tier_quantiles: &[f64],
) -> Result<BTreeMap<String, Placement>> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("scores"));
    }
    if let Some(s) = scores.iter().find(|s| !s.score.is_finite()) {
        return Err(Error::DegenerateInput(format!(
            "score for {} is not finite",
            s.glottocode
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (&scores[i], &scores[j]);
        ranking_order(
            (&a.glottocode, a.score, a.n_speakers),
            (&b.glottocode, b.score, b.n_speakers),
        )
    });

    let n = scores.len() as f64;
    let mut out = BTreeMap::new();
    // Walk in descending order; `above` counts strictly higher scores.
    let mut above = 0usize;
    for (pos, &i) in order.iter().enumerate() {
        if pos > 0 && scores[order[pos - 1]].score > scores[i].score {
            above = pos;
        }
        let share_above = above as f64 / n;
        let passed = tier_quantiles
            .iter()
            .filter(|&&q| share_above >= 1.0 - q - 1e-12)
            .count();
        out.insert(
            scores[i].glottocode.clone(),
            Placement {
                rank: pos + 1,
                tier: Tier(1 + passed as u8),
            },
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationIssue {
    DuplicateGlottocode { glottocode: String },
    LatitudeOutOfRange { glottocode: String, value: String },
    LongitudeOutOfRange { glottocode: String, value: String },
    MissingCentroid { glottocode: String },
    DimensionMismatch { detail: String },
    UnknownLanguage { glottocode: String },
    NonBinaryValue { glottocode: String, feature_id: String, value: String },
    NonPositiveWeight { feature_id: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<ValidationIssue>,
    /// Rows dropped by the location rule; not errors.
    #[serde(default)]
    pub excluded: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Check records and matrix against the structural invariants.
pub fn validate_dataset(records: &[LanguageRecord], matrix: &FeatureMatrix) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen = HashSet::new();
    for r in records {
        if !seen.insert(r.glottocode.as_str()) {
            report.errors.push(ValidationIssue::DuplicateGlottocode {
                glottocode: r.glottocode.clone(),
            });
        }
        if !(-90.0..=90.0).contains(&r.centroid_lat) {
            report.errors.push(ValidationIssue::LatitudeOutOfRange {
                glottocode: r.glottocode.clone(),
                value: r.centroid_lat.to_string(),
            });
        }
        if !(-180.0..=180.0).contains(&r.centroid_lon) {
            report.errors.push(ValidationIssue::LongitudeOutOfRange {
                glottocode: r.glottocode.clone(),
                value: r.centroid_lon.to_string(),
            });
        }
    }

    if matrix.values.len() != matrix.languages.len() * matrix.specs.len() {
        report.errors.push(ValidationIssue::DimensionMismatch {
            detail: format!(
                "{} cells for {} rows x {} columns",
                matrix.values.len(),
                matrix.languages.len(),
                matrix.specs.len()
            ),
        });
        return report;
    }
    if matrix.n_rows() != records.len() {
        report.errors.push(ValidationIssue::DimensionMismatch {
            detail: format!(
                "matrix has {} rows but {} records",
                matrix.n_rows(),
                records.len()
            ),
        });
    }
    let known: HashMap<&str, ()> = records.iter().map(|r| (r.glottocode.as_str(), ())).collect();
    for g in &matrix.languages {
        if !known.contains_key(g.as_str()) {
            report.errors.push(ValidationIssue::UnknownLanguage {
                glottocode: g.clone(),
            });
        }
    }
    for (c, spec) in matrix.specs.iter().enumerate() {
        if !(spec.weight > 0.0) {
            report.errors.push(ValidationIssue::NonPositiveWeight {
                feature_id: spec.feature_id.clone(),
            });
        }
        if spec.is_binary() {
            for r in 0..matrix.n_rows() {
                if let Some(v) = matrix.get(r, c) {
                    if v != 0.0 && v != 1.0 {
                        report.errors.push(ValidationIssue::NonBinaryValue {
                            glottocode: matrix.languages[r].clone(),
                            feature_id: spec.feature_id.clone(),
                            value: v.to_string(),
                        });
                    }
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn record(code: &str, lat: f64, lon: f64) -> LanguageRecord {
        LanguageRecord {
            glottocode: code.into(),
            iso639_3: None,
            name: code.into(),
            centroid_lat: lat,
            centroid_lon: lon,
            macroarea: Macroarea::Eurasia,
            family: "fam".into(),
            primary_country: "XX".into(),
            admin1: None,
            n_speakers: 1000,
            vitality: Vitality::NotEndangered,
            institutional: false,
            is_dead: false,
        }
    }

    fn spec(id: &str, kind: FeatureKind) -> FeatureSpec {
        FeatureSpec {
            feature_id: id.into(),
            group: FeatureGroup::AiResources,
            kind,
            geo_level: GeoLevel::Language,
            weight: 0.5,
            log_transform: LogTransform::Never,
            source: FeatureSource::LanguageTable,
            in_index: true,
        }
    }

    fn fixture() -> (Vec<LanguageRecord>, FeatureMatrix) {
        let records = vec![
            record("stan1293", 52.0, -1.0),
            record("stan1288", 40.0, -4.0),
            record("hakk1236", 24.0, 116.0),
        ];
        let matrix = FeatureMatrix::from_rows(
            records.iter().map(|r| r.glottocode.clone()).collect(),
            vec![spec("cc_gb", FeatureKind::Continuous), spec("bible", FeatureKind::Binary)],
            vec![
                vec![Some(10.0), Some(1.0)],
                vec![Some(5.0), Some(0.0)],
                vec![None, Some(1.0)],
            ],
        )
        .unwrap();
        (records, matrix)
    }

    #[test]
    fn well_formed_fixture_is_clean() {
        let (records, matrix) = fixture();
        assert_eq!(validate_dataset(&records, &matrix), ValidationReport::default());
    }

    #[test]
    fn duplicate_glottocode_reported_once() {
        let (mut records, matrix) = fixture();
        records[1].glottocode = "stan1293".into();
        let report = validate_dataset(&records, &matrix);
        let dups = report
            .errors
            .iter()
            .filter(|e| matches!(e, ValidationIssue::DuplicateGlottocode { .. }))
            .count();
        assert_eq!(dups, 1);
    }

    #[test]
    fn latitude_out_of_range() {
        let (mut records, matrix) = fixture();
        records[0].centroid_lat = 95.0;
        let report = validate_dataset(&records, &matrix);
        assert_eq!(report.errors.len(), 1);
        assert!(matches!(report.errors[0], ValidationIssue::LatitudeOutOfRange { .. }));
    }

    #[test]
    fn non_binary_value_flagged() {
        let (records, mut matrix) = fixture();
        matrix.set(0, 1, Some(0.5));
        let report = validate_dataset(&records, &matrix);
        assert!(matches!(report.errors[0], ValidationIssue::NonBinaryValue { .. }));
    }

    fn scored(code: &str, score: f64, speakers: u64) -> ScoredLanguage {
        ScoredLanguage {
            glottocode: code.into(),
            score,
            n_speakers: speakers,
        }
    }

    #[test]
    fn tie_break_by_speakers() {
        let s = vec![scored("a", 0.9, 1), scored("c", 0.5, 10), scored("b", 0.5, 20)];
        let p = rank_and_tier(&s, &[0.25, 0.5, 0.75]).unwrap();
        assert_eq!(p["a"].rank, 1);
        assert_eq!(p["b"].rank, 2);
        assert_eq!(p["c"].rank, 3);
        assert_eq!(p["b"].tier, p["c"].tier);
    }

    #[test]
    fn tie_break_by_glottocode_last() {
        let s = vec![scored("zz", 0.5, 10), scored("aa", 0.5, 10)];
        let p = rank_and_tier(&s, &[0.5]).unwrap();
        assert_eq!(p["aa"].rank, 1);
        assert_eq!(p["zz"].rank, 2);
    }

    #[test]
    fn singleton_is_top() {
        let p = rank_and_tier(&[scored("x", 0.1, 0)], &[0.25, 0.5, 0.75]).unwrap();
        assert_eq!(p["x"], Placement { rank: 1, tier: Tier(1) });
    }

    #[test]
    fn empty_scores_rejected() {
        assert!(matches!(rank_and_tier(&[], &[0.5]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn quartiles_of_uniform_scores() {
        let s: Vec<_> = (1..=100)
            .map(|i| scored(&format!("l{i:03}"), i as f64 / 100.0, 0))
            .collect();
        let p = rank_and_tier(&s, &[0.25, 0.5, 0.75]).unwrap();
        // Oracle: sort ascending, chunk the sorted list into four quarters.
        let mut sorted: Vec<_> = s.iter().collect();
        sorted.sort_by(|a, b| a.score.total_cmp(&b.score));
        for (quarter, chunk) in sorted.chunks(25).enumerate() {
            let expected_tier = Tier(4 - quarter as u8);
            for l in chunk {
                assert_eq!(p[&l.glottocode].tier, expected_tier, "{}", l.glottocode);
            }
        }
    }

    #[test]
    fn two_tiers_for_median_cut() {
        let s: Vec<_> = (0..10).map(|i| scored(&format!("l{i}"), i as f64, 0)).collect();
        let p = rank_and_tier(&s, &[0.5]).unwrap();
        let tiers: HashSet<_> = p.values().map(|p| p.tier).collect();
        assert_eq!(tiers, HashSet::from([Tier(1), Tier(2)]));
    }

    #[test]
    fn config_rejects_unknown_rank_feature() {
        let mut cfg = IndexConfig::default();
        cfg.group_rank_tables.ai_resources = vec!["nope".into()];
        assert!(matches!(cfg.validate(&[]), Err(Error::UnknownFeature(_))));
    }

    #[test]
    fn config_rejects_unsorted_quantiles() {
        let cfg = IndexConfig {
            tier_quantiles: vec![0.5, 0.25],
            ..IndexConfig::default()
        };
        assert!(cfg.validate(&[]).is_err());
    }
}
