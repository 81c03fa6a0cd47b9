//! Response bodies shared by the HTTP service and the export command.
//!
//! Every float is rounded to 12 significant digits before serialization, so
//! the two interfaces emit byte-identical content for the same snapshot.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::impute::ImputationMethod;
use crate::model::{FeatureGroup, FeatureKind, IndexEntry, IndexResult, LanguageRecord};
use crate::numfmt::{fmt_sig12, round_sig12};
use crate::snapshot::ApiSnapshot;
use crate::stats::LanguageCategory;

pub const DEFAULT_LIMIT: usize = 100;
pub const MAX_LIMIT: usize = 10_000;
pub const MAX_ZOOM: u8 = 12;
pub const CLUSTER_SAMPLE: usize = 5;
pub const RANKINGS_HEADER: &str =
    "glottocode,name,overall,ai_resources,socioeconomic,digital_infrastructure,penalty,rank,tier";

/// Recursively round every non-integer number in a JSON tree.
pub fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig12(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

pub fn rounded<T: Serialize>(v: &T) -> Value {
    round_value(serde_json::to_value(v).expect("payload types serialize"))
}

/// Canonical JSON bytes for a response body.
pub fn to_body<T: Serialize>(v: &T) -> Vec<u8> {
    serde_json::to_vec(v).expect("payload types serialize")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryError(pub String);

impl fmt::Display for QueryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for QueryError {}

fn bad(msg: impl Into<String>) -> QueryError {
    QueryError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    #[default]
    Overall,
    Ai,
    Socio,
    Infra,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [Dimension::Overall, Dimension::Ai, Dimension::Socio, Dimension::Infra];

    pub fn group(self) -> Option<FeatureGroup> {
        match self {
            Dimension::Overall => None,
            Dimension::Ai => Some(FeatureGroup::AiResources),
            Dimension::Socio => Some(FeatureGroup::Socioeconomic),
            Dimension::Infra => Some(FeatureGroup::DigitalInfrastructure),
        }
    }
}

impl FromStr for Dimension {
    type Err = QueryError;
    fn from_str(s: &str) -> Result<Self, QueryError> {
        match s {
            "overall" => Ok(Dimension::Overall),
            "ai" => Ok(Dimension::Ai),
            "socio" => Ok(Dimension::Socio),
            "infra" => Ok(Dimension::Infra),
            other => Err(bad(format!("unknown dimension `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortOrder {
    #[default]
    Desc,
    Asc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguagesQuery {
    pub min_speakers: u64,
    pub country: Option<String>,
    pub dimension: Dimension,
    pub sort: SortOrder,
    pub limit: usize,
    pub offset: usize,
}

impl Default for LanguagesQuery {
    fn default() -> Self {
        Self {
            min_speakers: 0,
            country: None,
            dimension: Dimension::Overall,
            sort: SortOrder::Desc,
            limit: DEFAULT_LIMIT,
            offset: 0,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, QueryError> {
    v.parse().map_err(|_| bad(format!("`{key}` must be a nonnegative integer, got `{v}`")))
}

impl LanguagesQuery {
    pub fn from_pairs<'a, I: IntoIterator<Item = (&'a str, &'a str)>>(pairs: I) -> Result<Self, QueryError> {
        let mut q = Self::default();
        for (k, v) in pairs {
            match k {
                "min_speakers" => q.min_speakers = parse_num(k, v)?,
                "country" => q.country = Some(v.to_string()).filter(|s| !s.is_empty()),
                "dimension" => q.dimension = v.parse()?,
                "sort" => {
                    q.sort = match v {
                        "desc" => SortOrder::Desc,
                        "asc" => SortOrder::Asc,
                        other => return Err(bad(format!("sort must be `desc` or `asc`, got `{other}`"))),
                    }
                }
                "limit" => {
                    q.limit = parse_num(k, v)?;
                    if q.limit > MAX_LIMIT {
                        return Err(bad(format!("limit may not exceed {MAX_LIMIT}")));
                    }
                }
                "offset" => q.offset = parse_num(k, v)?,
                other => return Err(bad(format!("unknown parameter `{other}`"))),
            }
        }
        Ok(q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageSummary {
    pub glottocode: String,
    pub name: String,
    pub country: String,
    pub n_speakers: u64,
    pub overall: f64,
    pub ai_resources: f64,
    pub socioeconomic: f64,
    pub digital_infrastructure: f64,
    pub penalty: f64,
    pub rank: usize,
    pub tier: u8,
    pub category: Option<LanguageCategory>,
}

impl LanguageSummary {
    pub fn score(&self, d: Dimension) -> f64 {
        match d {
            Dimension::Overall => self.overall,
            Dimension::Ai => self.ai_resources,
            Dimension::Socio => self.socioeconomic,
            Dimension::Infra => self.digital_infrastructure,
        }
    }

    pub fn csv_row(&self) -> String {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record([
            self.glottocode.clone(),
            self.name.clone(),
            fmt_sig12(self.overall),
            fmt_sig12(self.ai_resources),
            fmt_sig12(self.socioeconomic),
            fmt_sig12(self.digital_infrastructure),
            fmt_sig12(self.penalty),
            self.rank.to_string(),
            self.tier.to_string(),
        ])
        .expect("in-memory write");
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguagesPage {
    pub build_id: String,
    pub dimension: Dimension,
    pub total: usize,
    pub offset: usize,
    pub limit: usize,
    pub items: Vec<LanguageSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCell {
    pub feature_id: String,
    pub group: FeatureGroup,
    pub kind: FeatureKind,
    pub in_index: bool,
    pub value: Option<f64>,
    pub imputed: bool,
    pub method: Option<ImputationMethod>,
    pub donor: Option<String>,
}

/// Medians over every scored language of one country, for comparison in
/// the detail view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryMedians {
    pub country: String,
    pub n_languages: usize,
    pub overall: f64,
    pub ai_resources: f64,
    pub socioeconomic: f64,
    pub digital_infrastructure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageDetail {
    pub build_id: String,
    pub summary: LanguageSummary,
    pub record: LanguageRecord,
    pub features: Vec<FeatureCell>,
    pub country_medians: CountryMedians,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Half-open box `[min_lon, max_lon) x [min_lat, max_lat)`; the world's
/// east and north edges are included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl BBox {
    pub const WORLD: BBox = BBox {
        min_lon: -180.0,
        min_lat: -90.0,
        max_lon: 180.0,
        max_lat: 90.0,
    };

    pub fn new(min_lon: f64, min_lat: f64, max_lon: f64, max_lat: f64) -> Result<Self, QueryError> {
        let b = BBox {
            min_lon,
            min_lat,
            max_lon,
            max_lat,
        };
        let finite = [min_lon, min_lat, max_lon, max_lat].iter().all(|v| v.is_finite());
        if !finite
            || !(-180.0..=180.0).contains(&min_lon)
            || !(-180.0..=180.0).contains(&max_lon)
            || !(-90.0..=90.0).contains(&min_lat)
            || !(-90.0..=90.0).contains(&max_lat)
            || min_lon >= max_lon
            || min_lat >= max_lat
        {
            return Err(bad("bbox must be min_lon,min_lat,max_lon,max_lat within world bounds with min < max"));
        }
        Ok(b)
    }

    pub fn contains(&self, lon: f64, lat: f64) -> bool {
        let in_lon = lon >= self.min_lon && (lon < self.max_lon || (self.max_lon == 180.0 && lon == 180.0));
        let in_lat = lat >= self.min_lat && (lat < self.max_lat || (self.max_lat == 90.0 && lat == 90.0));
        in_lon && in_lat
    }
}

impl FromStr for BBox {
    type Err = QueryError;
    fn from_str(s: &str) -> Result<Self, QueryError> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad(format!("bbox `{s}` is not four numbers")))?;
        match parts[..] {
            [a, b, c, d] => BBox::new(a, b, c, d),
            _ => Err(bad(format!("bbox `{s}` is not four numbers"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterQuery {
    pub bbox: BBox,
    pub zoom: u8,
}

impl ClusterQuery {
    pub fn from_pairs<'a, I: IntoIterator<Item = (&'a str, &'a str)>>(pairs: I) -> Result<Self, QueryError> {
        let mut q = ClusterQuery {
            bbox: BBox::WORLD,
            zoom: 0,
        };
        for (k, v) in pairs {
            match k {
                "bbox" => q.bbox = v.parse()?,
                "zoom" => {
                    q.zoom = v.parse().map_err(|_| bad(format!("zoom `{v}` is not an integer")))?;
                    if q.zoom > MAX_ZOOM {
                        return Err(bad(format!("zoom must be in [0, {MAX_ZOOM}]")));
                    }
                }
                other => return Err(bad(format!("unknown parameter `{other}`"))),
            }
        }
        Ok(q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub lat: f64,
    pub lon: f64,
    pub count: usize,
    pub sample_codes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterPage {
    pub build_id: String,
    pub zoom: u8,
    pub cell_size: f64,
    /// `true` when the grid is fine enough that every language is its own
    /// marker.
    pub singletons: bool,
    pub total: usize,
    pub clusters: Vec<Cluster>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatsKind {
    Zipf,
    Diffusion,
    Ols,
    Pca,
}

impl FromStr for StatsKind {
    type Err = QueryError;
    fn from_str(s: &str) -> Result<Self, QueryError> {
        match s {
            "zipf" => Ok(StatsKind::Zipf),
            "diffusion" => Ok(StatsKind::Diffusion),
            "ols" => Ok(StatsKind::Ols),
            "pca" => Ok(StatsKind::Pca),
            other => Err(bad(format!("unknown stats kind `{other}`"))),
        }
    }
}

impl StatsKind {
    pub const ALL: [StatsKind; 4] = [StatsKind::Zipf, StatsKind::Diffusion, StatsKind::Ols, StatsKind::Pca];

    pub fn as_str(self) -> &'static str {
        match self {
            StatsKind::Zipf => "zipf",
            StatsKind::Diffusion => "diffusion",
            StatsKind::Ols => "ols",
            StatsKind::Pca => "pca",
        }
    }
}

/// Summary row plus the unrounded (overall, ai, socio, infra) scores.
pub fn summarize(
    e: &IndexEntry,
    r: &LanguageRecord,
    category: Option<LanguageCategory>,
) -> (LanguageSummary, [f64; 4]) {
    let sub = |g| e.subscores.get(&g).copied().unwrap_or(f64::NAN);
    let scores = [
        e.overall,
        sub(FeatureGroup::AiResources),
        sub(FeatureGroup::Socioeconomic),
        sub(FeatureGroup::DigitalInfrastructure),
    ];
    let summary = LanguageSummary {
        glottocode: e.glottocode.clone(),
        name: r.name.clone(),
        country: r.primary_country.clone(),
        n_speakers: r.n_speakers,
        overall: round_sig12(scores[0]),
        ai_resources: round_sig12(scores[1]),
        socioeconomic: round_sig12(scores[2]),
        digital_infrastructure: round_sig12(scores[3]),
        penalty: round_sig12(e.binary_penalty),
        rank: e.rank,
        tier: e.tier.0,
        category,
    };
    (summary, scores)
}

/// Rankings CSV in rank order.
pub fn rankings_csv(result: &IndexResult, records: &[LanguageRecord]) -> Result<String, crate::Error> {
    let by_code: HashMap<&str, &LanguageRecord> = records.iter().map(|r| (r.glottocode.as_str(), r)).collect();
    let mut entries: Vec<&IndexEntry> = result.entries.iter().collect();
    entries.sort_by_key(|e| e.rank);
    let mut out = String::from(RANKINGS_HEADER);
    out.push('\n');
    for e in entries {
        let r = by_code
            .get(e.glottocode.as_str())
            .ok_or_else(|| crate::Error::Invariant(format!("{} is scored but not in the registry", e.glottocode)))?;
        out.push_str(&summarize(e, r, None).0.csv_row());
    }
    Ok(out)
}

/// Read-only view over a snapshot with summaries and orderings precomputed.
#[derive(Debug)]
pub struct Catalog {
    snapshot: ApiSnapshot,
    /// Unrounded scores, used for ordering only.
    raw: Vec<[f64; 4]>,
    summaries: Vec<LanguageSummary>,
    by_code: HashMap<String, usize>,
    orders: [Vec<usize>; 4],
}

impl Catalog {
    pub fn new(snapshot: ApiSnapshot) -> Self {
        let records: HashMap<&str, &LanguageRecord> =
            snapshot.records.iter().map(|r| (r.glottocode.as_str(), r)).collect();
        let mut raw = Vec::new();
        let mut summaries = Vec::new();
        for e in &snapshot.index_result.entries {
            let (summary, scores) = summarize(e, records[e.glottocode.as_str()], snapshot.categories.get(&e.glottocode).copied());
            raw.push(scores);
            summaries.push(summary);
        }
        let by_code = summaries
            .iter()
            .enumerate()
            .map(|(i, s)| (s.glottocode.clone(), i))
            .collect();
        let orders = [0, 1, 2, 3].map(|d| {
            let mut idx: Vec<usize> = (0..summaries.len()).collect();
            idx.sort_by(|&a, &b| {
                raw[b][d]
                    .total_cmp(&raw[a][d])
                    .then_with(|| summaries[b].n_speakers.cmp(&summaries[a].n_speakers))
                    .then_with(|| summaries[a].glottocode.cmp(&summaries[b].glottocode))
            });
            idx
        });
        Self {
            snapshot,
            raw,
            summaries,
            by_code,
            orders,
        }
    }

    pub fn snapshot(&self) -> &ApiSnapshot {
        &self.snapshot
    }

    pub fn build_id(&self) -> &str {
        &self.snapshot.build_id
    }

    pub fn summaries(&self) -> &[LanguageSummary] {
        &self.summaries
    }

    fn order(&self, d: Dimension, sort: SortOrder) -> Vec<usize> {
        let base = &self.orders[d as usize];
        match sort {
            SortOrder::Desc => base.clone(),
            SortOrder::Asc => {
                let di = d as usize;
                let mut idx = base.clone();
                // Reverse the score order but keep the tie-break direction.
                idx.sort_by(|&a, &b| {
                    self.raw[a][di]
                        .total_cmp(&self.raw[b][di])
                        .then_with(|| self.summaries[b].n_speakers.cmp(&self.summaries[a].n_speakers))
                        .then_with(|| self.summaries[a].glottocode.cmp(&self.summaries[b].glottocode))
                });
                idx
            }
        }
    }

    pub fn languages(&self, q: &LanguagesQuery) -> LanguagesPage {
        let matching: Vec<usize> = self
            .order(q.dimension, q.sort)
            .into_iter()
            .filter(|&i| {
                let s = &self.summaries[i];
                s.n_speakers >= q.min_speakers && q.country.as_ref().is_none_or(|c| &s.country == c)
            })
            .collect();
        let items = matching
            .iter()
            .skip(q.offset)
            .take(q.limit)
            .map(|&i| self.summaries[i].clone())
            .collect();
        LanguagesPage {
            build_id: self.build_id().to_string(),
            dimension: q.dimension,
            total: matching.len(),
            offset: q.offset,
            limit: q.limit,
            items,
        }
    }

    pub fn detail(&self, glottocode: &str) -> Option<LanguageDetail> {
        let &i = self.by_code.get(glottocode)?;
        let snap = &self.snapshot;
        let record = snap.records.iter().find(|r| r.glottocode == glottocode)?.clone();
        let row = snap.features.row_index(glottocode)?;
        let log: BTreeMap<&str, (ImputationMethod, &str)> = snap
            .imputation
            .entries
            .iter()
            .filter(|e| e.glottocode == glottocode)
            .map(|e| (e.feature_id.as_str(), (e.method, e.donor.as_str())))
            .collect();
        let features = snap
            .features
            .specs
            .iter()
            .enumerate()
            .map(|(c, spec)| {
                let prov = log.get(spec.feature_id.as_str());
                FeatureCell {
                    feature_id: spec.feature_id.clone(),
                    group: spec.group,
                    kind: spec.kind,
                    in_index: spec.in_index,
                    value: snap.features.get(row, c).map(round_sig12),
                    imputed: prov.is_some(),
                    method: prov.map(|p| p.0),
                    donor: prov.map(|p| p.1.to_string()).filter(|d| !d.is_empty()),
                }
            })
            .collect();
        Some(LanguageDetail {
            build_id: self.build_id().to_string(),
            summary: self.summaries[i].clone(),
            country_medians: self.country_medians(&record.primary_country),
            record,
            features,
        })
    }

    fn country_medians(&self, country: &str) -> CountryMedians {
        let members: Vec<usize> = (0..self.summaries.len())
            .filter(|&i| self.summaries[i].country == country)
            .collect();
        let col = |d: usize| round_sig12(median(members.iter().map(|&i| self.raw[i][d]).collect()));
        CountryMedians {
            country: country.to_string(),
            n_languages: members.len(),
            overall: col(0),
            ai_resources: col(1),
            socioeconomic: col(2),
            digital_infrastructure: col(3),
        }
    }

    pub fn clusters(&self, q: &ClusterQuery) -> ClusterPage {
        let cell = 360.0 / f64::from(1u32 << q.zoom);
        let key = |lon: f64, lat: f64| (((lat + 90.0) / cell).floor() as i64, ((lon + 180.0) / cell).floor() as i64);
        // Languages in rank order so that cluster samples show the top ones.
        let inside: Vec<&LanguageRecord> = {
            let recs: HashMap<&str, &LanguageRecord> = self
                .snapshot
                .records
                .iter()
                .map(|r| (r.glottocode.as_str(), r))
                .collect();
            self.orders[0]
                .iter()
                .map(|&i| recs[self.summaries[i].glottocode.as_str()])
                .filter(|r| q.bbox.contains(r.centroid_lon, r.centroid_lat))
                .collect()
        };
        let (lo, hi) = (key(q.bbox.min_lon, q.bbox.min_lat), key(q.bbox.max_lon, q.bbox.max_lat));
        let cells = ((hi.0 - lo.0 + 1) * (hi.1 - lo.1 + 1)).max(1) as usize;
        let singletons = inside.len() <= cells;

        let clusters = if singletons {
            let mut out: Vec<Cluster> = inside
                .iter()
                .map(|r| Cluster {
                    lat: round_sig12(r.centroid_lat),
                    lon: round_sig12(r.centroid_lon),
                    count: 1,
                    sample_codes: vec![r.glottocode.clone()],
                })
                .collect();
            out.sort_by(|a, b| {
                a.lat
                    .total_cmp(&b.lat)
                    .then(a.lon.total_cmp(&b.lon))
                    .then_with(|| a.sample_codes.cmp(&b.sample_codes))
            });
            out
        } else {
            let mut groups: BTreeMap<(i64, i64), Vec<&LanguageRecord>> = BTreeMap::new();
            for r in &inside {
                groups.entry(key(r.centroid_lon, r.centroid_lat)).or_default().push(r);
            }
            groups
                .into_values()
                .map(|members| {
                    let n = members.len() as f64;
                    Cluster {
                        lat: round_sig12(members.iter().map(|r| r.centroid_lat).sum::<f64>() / n),
                        lon: round_sig12(members.iter().map(|r| r.centroid_lon).sum::<f64>() / n),
                        count: members.len(),
                        sample_codes: members.iter().take(CLUSTER_SAMPLE).map(|r| r.glottocode.clone()).collect(),
                    }
                })
                .collect()
        };
        ClusterPage {
            build_id: self.build_id().to_string(),
            zoom: q.zoom,
            cell_size: cell,
            singletons,
            total: inside.len(),
            clusters,
        }
    }

    /// `None` when the fit is absent from the snapshot.
    pub fn stats(&self, kind: StatsKind) -> Option<Value> {
        let fits = &self.snapshot.fits;
        let data = match kind {
            StatsKind::Zipf => rounded(fits.zipf.as_ref()?),
            StatsKind::Diffusion => rounded(fits.diffusion.as_ref()?),
            StatsKind::Ols => rounded(fits.ols.as_ref()?),
            StatsKind::Pca => rounded(fits.pca.as_ref()?),
        };
        Some(serde_json::json!({
            "build_id": self.build_id(),
            "kind": kind.as_str(),
            "data": data,
        }))
    }

    /// Every language in overall-rank order.
    pub fn rankings_csv(&self) -> String {
        let mut out = String::from(RANKINGS_HEADER);
        out.push('\n');
        for &i in &self.orders[0] {
            out.push_str(&self.summaries[i].csv_row());
        }
        out
    }
}
