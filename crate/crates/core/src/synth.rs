//! Deterministic synthetic fixture set with the same file layout as the
//! real inputs: registry, snapshots, geo and language tables, universities,
//! admin-1 boundaries and model coverage manifests.
//!
//! The generator is a plausible world, not an extract of the original
//! sources, so bundles built from it carry `faithful_extract = false`.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Days, NaiveDate};
use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;

use crate::error::Result;
use crate::ingest::manifest::CoverageManifest;
use crate::ingest::registry::write_registry;
use crate::ingest::snapshot::{write_snapshot, SnapshotRow};
use crate::ingest::tables::{write_universities, GeoRow, GeoTable, LangRow, LanguageTable, University};
use crate::model::{LanguageRecord, Macroarea, Vitality};
use crate::numfmt::round_sig12;

pub const REGISTRY_FILE: &str = "registry.csv";
pub const SNAPSHOTS_FILE: &str = "snapshots.csv";
pub const GEO_FILE: &str = "geo.csv";
pub const LANGUAGES_FILE: &str = "languages.csv";
pub const UNIVERSITIES_FILE: &str = "universities.csv";
pub const BOUNDARIES_FILE: &str = "boundaries.geojson";
pub const MANIFEST_DIR: &str = "manifests";

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_languages: usize,
    pub n_countries: usize,
    /// Extra registry rows without a centroid; dropped at ingest.
    pub n_without_location: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            n_languages: 6003,
            n_countries: 150,
            n_without_location: 12,
        }
    }
}

/// Generated files keyed by path relative to the output directory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynthFiles {
    pub files: BTreeMap<String, Vec<u8>>,
}

impl SynthFiles {
    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.get(name).map(Vec::as_slice)
    }

    pub fn manifests(&self) -> impl Iterator<Item = (&str, &[u8])> {
        self.files
            .iter()
            .filter(|(k, _)| k.starts_with(MANIFEST_DIR))
            .map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, bytes)?;
        }
        Ok(())
    }
}

struct Region {
    code: String,
    lon: (f64, f64),
    lat: (f64, f64),
    dev: f64,
}

struct Country {
    code: String,
    lon: (f64, f64),
    lat: (f64, f64),
    dev: f64,
    macroarea: Macroarea,
    bottom_row: bool,
    regions: Vec<Region>,
}

const LON_RANGE: (f64, f64) = (-165.0, 165.0);
const LAT_RANGE: (f64, f64) = (-45.0, 65.0);

fn country_code(i: usize) -> String {
    let a = (b'A' + (i / 26) as u8 % 26) as char;
    let b = (b'A' + (i % 26) as u8) as char;
    format!("{a}{b}")
}

fn macroarea_at(lon: f64, lat: f64) -> Macroarea {
    if lon < -30.0 {
        if lat > 12.0 {
            Macroarea::NorthAmerica
        } else {
            Macroarea::SouthAmerica
        }
    } else if lon > 110.0 && lat < 0.0 {
        if lon > 130.0 && lat < -12.0 {
            Macroarea::Australia
        } else {
            Macroarea::Papunesia
        }
    } else if lon < 60.0 && lat < 15.0 {
        Macroarea::Africa
    } else {
        Macroarea::Eurasia
    }
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn world(cfg: &SynthConfig, rng: &mut ChaCha8Rng, noise: &Normal<f64>) -> Vec<Country> {
    let n = cfg.n_countries;
    let cols = ((n as f64 * 1.5).sqrt().ceil() as usize).max(1);
    let rows = n.div_ceil(cols);
    let w = (LON_RANGE.1 - LON_RANGE.0) / cols as f64;
    let h = (LAT_RANGE.1 - LAT_RANGE.0) / rows as f64;
    (0..n)
        .map(|i| {
            let (c, r) = (i % cols, i / cols);
            let lon = (LON_RANGE.0 + c as f64 * w, LON_RANGE.0 + (c + 1) as f64 * w);
            let lat = (LAT_RANGE.0 + r as f64 * h, LAT_RANGE.0 + (r + 1) as f64 * h);
            let dev: f64 = rng.random_range(0.05..0.95);
            let code = country_code(i);
            let k = rng.random_range(2..=5usize);
            let strip = (lon.1 - lon.0) / k as f64;
            let regions = (0..k)
                .map(|j| Region {
                    code: format!("{code}-{}", j + 1),
                    lon: (round6(lon.0 + j as f64 * strip), round6(lon.0 + (j + 1) as f64 * strip)),
                    lat: (round6(lat.0), round6(lat.1)),
                    dev: (dev + 0.06 * noise.sample(rng)).clamp(0.01, 0.99),
                })
                .collect();
            Country {
                macroarea: macroarea_at((lon.0 + lon.1) / 2.0, (lat.0 + lat.1) / 2.0),
                code,
                lon,
                lat,
                dev,
                bottom_row: r == 0,
                regions,
            }
        })
        .collect()
}

const SYLLABLES: [&str; 24] = [
    "ka", "lo", "mi", "tu", "ren", "sa", "ba", "dor", "ni", "ve", "ko", "la", "zu", "pa", "te",
    "shi", "an", "mo", "ri", "ga", "wen", "yo", "hu", "el",
];

fn pseudo_name(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(2..=3);
    let s: String = (0..n).map(|_| SYLLABLES[rng.random_range(0..SYLLABLES.len())]).collect();
    let mut c = s.chars();
    let first = c.next().expect("nonempty").to_ascii_uppercase();
    std::iter::once(first).chain(c).collect()
}

fn iso_code(i: usize) -> String {
    // Spread consecutive indices over the code space.
    let k = (i * 7919) % (26 * 26 * 26);
    let l = |v: usize| (b'a' + v as u8) as char;
    format!("{}{}{}", l(k / 676), l(k / 26 % 26), l(k % 26))
}

struct Lang {
    record: LanguageRecord,
    /// Latent resource propensity.
    r: f64,
}

fn vitality_for(speakers: u64, z: f64) -> Vitality {
    let s = (speakers as f64 + 1.0).log10() + 0.8 * z;
    match s {
        s if s >= 5.0 => Vitality::NotEndangered,
        s if s >= 4.0 => Vitality::Threatened,
        s if s >= 3.0 => Vitality::Shifting,
        s if s >= 2.0 => Vitality::Moribund,
        _ => Vitality::NearlyExtinct,
    }
}

fn languages(cfg: &SynthConfig, countries: &[Country], rng: &mut ChaCha8Rng, noise: &Normal<f64>) -> Vec<Lang> {
    let weights: Vec<f64> = countries.iter().map(|_| (1.0 * noise.sample(rng)).exp()).collect();
    let pick = WeightedIndex::new(&weights).expect("positive weights");
    let fam_weights: Vec<f64> = (1..=250).map(|k| 1.0 / k as f64).collect();
    let fam_pick = WeightedIndex::new(&fam_weights).expect("positive weights");
    let mut out = Vec::with_capacity(cfg.n_languages);
    for i in 0..cfg.n_languages {
        let ci = pick.sample(rng);
        let c = &countries[ci];
        let region = &c.regions[rng.random_range(0..c.regions.len())];
        let offshore = c.bottom_row && rng.random_bool(0.15);
        let lat = if offshore {
            c.lat.0 - rng.random_range(0.2..3.0)
        } else {
            rng.random_range(region.lat.0 + 0.01..region.lat.1 - 0.01)
        };
        let lon = rng.random_range(region.lon.0 + 0.01..region.lon.1 - 0.01);
        let is_dead = rng.random_bool(0.04);
        let speakers = if is_dead {
            0
        } else {
            ((8000f64).ln() + 2.6 * noise.sample(rng)).exp().min(1.5e9).round() as u64
        };
        let vitality = if is_dead {
            Vitality::Extinct
        } else {
            vitality_for(speakers, noise.sample(rng))
        };
        let institutional = if speakers > 5_000_000 {
            rng.random_bool(0.8)
        } else {
            rng.random_bool(0.02)
        };
        let name = pseudo_name(rng);
        let prefix: String = name
            .to_ascii_lowercase()
            .chars()
            .chain(std::iter::repeat('a'))
            .take(4)
            .collect();
        let glottocode = format!("{prefix}{:04}", 1000 + i);
        // A few ISO codes are shared, as with macrolanguages.
        let iso639_3 = if rng.random_bool(0.85) {
            Some(if i > 0 && rng.random_bool(0.01) { iso_code(i - 1) } else { iso_code(i) })
        } else {
            None
        };
        let z_speakers = ((speakers as f64 + 1.0).ln() - 8000f64.ln()) / 2.6;
        let r = 0.55 * z_speakers + 1.6 * (region.dev - 0.5) + 0.8 * noise.sample(rng);
        out.push(Lang {
            record: LanguageRecord {
                glottocode,
                iso639_3,
                name,
                centroid_lat: round6(lat),
                centroid_lon: round6(lon),
                macroarea: c.macroarea,
                family: format!("family_{:03}", fam_pick.sample(rng) + 1),
                primary_country: c.code.clone(),
                admin1: Some(region.code.clone()),
                n_speakers: speakers,
                vitality,
                institutional,
                is_dead,
            },
            r,
        });
    }
    out
}

fn snapshot_code(r: &LanguageRecord) -> String {
    r.iso639_3.clone().unwrap_or_else(|| r.glottocode.clone())
}

fn snapshots(langs: &[Lang], rng: &mut ChaCha8Rng, noise: &Normal<f64>) -> Vec<SnapshotRow> {
    const GROWTH: [(i32, f64); 5] = [(2020, 0.08), (2021, 0.2), (2022, 0.4), (2023, 0.7), (2024, 1.0)];
    let mut final_counts = BTreeMap::new();
    for l in langs {
        let m = ((1.2 + 1.6 * l.r + 0.8 * noise.sample(rng)).exp() - 3.0).max(0.0);
        let d = ((0.5 + 1.4 * l.r + 0.5 * noise.sample(rng)).exp() - 2.0).max(0.0);
        let code = snapshot_code(&l.record);
        let e = final_counts.entry(code).or_insert((0.0, 0.0));
        e.0 += m;
        e.1 += d;
    }
    let mut rows = Vec::new();
    for (year, g) in GROWTH {
        for (month, share) in [(6, 0.8), (12, 1.0)] {
            let date = NaiveDate::from_ymd_opt(year, month, 1).expect("valid date");
            for (code, &(m, d)) in &final_counts {
                let n_models = (m * g * share).floor() as u64;
                let n_datasets = (d * g * share).floor() as u64;
                if n_models > 0 || n_datasets > 0 {
                    rows.push(SnapshotRow {
                        snapshot_date: date,
                        language_code: code.clone(),
                        n_models,
                        n_datasets,
                    });
                }
            }
            for k in 0..3 {
                rows.push(SnapshotRow {
                    snapshot_date: date,
                    language_code: format!("qaa-x{k}"),
                    n_models: 1 + k,
                    n_datasets: 0,
                });
            }
        }
    }
    rows.sort();
    rows
}

fn language_table(langs: &[Lang], rng: &mut ChaCha8Rng, noise: &Normal<f64>) -> LanguageTable {
    let mut rows = Vec::new();
    let push = |rows: &mut Vec<LangRow>, g: &str, f: &str, v: f64| {
        rows.push(LangRow {
            glottocode: g.to_string(),
            feature_id: f.to_string(),
            value: round_sig12(v),
        })
    };
    for l in langs {
        let g = &l.record.glottocode;
        let size = |rng: &mut ChaCha8Rng, a: f64, b: f64, s: f64| {
            let v = (a + b * l.r + s * noise.sample(rng)).exp();
            if v < 0.01 {
                0.0
            } else {
                (v * 1000.0).round() / 1000.0
            }
        };
        let continuous = [
            ("cc_gb", size(rng, -1.0, 1.5, 0.7)),
            ("wiki_gb", size(rng, -3.0, 1.4, 0.8)),
            ("opus_gb", size(rng, -2.5, 1.3, 0.9)),
            ("archive_gb", size(rng, -4.0, 0.6, 1.0)),
            ("xeus_gb", size(rng, -5.0, 0.5, 1.0)),
            ("wiki_active_users", ((1.0 + 1.5 * l.r + 0.8 * noise.sample(rng)).exp() - 1.0).max(0.0).round()),
        ];
        for (f, v) in continuous {
            if !rng.random_bool(0.03) {
                push(&mut rows, g, f, v);
            }
        }
        let bible = f64::from(u8::from(l.r + noise.sample(rng) > 0.0));
        push(&mut rows, g, "bible_exists", bible);
    }
    LanguageTable { rows }
}

fn geo_table(countries: &[Country], rng: &mut ChaCha8Rng, noise: &Normal<f64>) -> GeoTable {
    let mut rows = Vec::new();
    let e = |rng: &mut ChaCha8Rng, s: f64| s * noise.sample(rng);
    for c in countries {
        let admin1_features: [(&str, bool); 6] = [
            ("hdi", true),
            ("gdp_pc", false),
            ("education", true),
            ("download_kbps", true),
            ("upload_kbps", true),
            ("latency_ms", true),
        ];
        for (f, may_vanish) in admin1_features {
            if may_vanish && rng.random_bool(0.04) {
                continue;
            }
            let mut observed = 0;
            for (j, r) in c.regions.iter().enumerate() {
                let last = j + 1 == c.regions.len();
                if rng.random_bool(0.06) && !(last && observed == 0) {
                    continue;
                }
                observed += 1;
                let d = r.dev;
                let v = match f {
                    "hdi" => (0.3 + 0.6 * d + e(rng, 0.02)).clamp(0.25, 0.98),
                    "gdp_pc" => (7.0 + 4.0 * d + e(rng, 0.3)).exp(),
                    "education" => (2.0 + 12.0 * d + e(rng, 0.5)).max(0.5),
                    "download_kbps" => (7.5 + 3.0 * d + e(rng, 0.4)).exp(),
                    "upload_kbps" => (6.8 + 3.0 * d + e(rng, 0.4)).exp(),
                    _ => (5.5 - 1.5 * d + e(rng, 0.2)).exp(),
                };
                let year = if f == "hdi" { 2022 } else { 2023 };
                if f == "hdi" {
                    rows.push(GeoRow {
                        country: c.code.clone(),
                        admin1: Some(r.code.clone()),
                        feature_id: f.into(),
                        value: round_sig12((v - 0.01).max(0.2)),
                        year: 2021,
                    });
                }
                rows.push(GeoRow {
                    country: c.code.clone(),
                    admin1: Some(r.code.clone()),
                    feature_id: f.into(),
                    value: round_sig12(v),
                    year,
                });
            }
        }
        let d = c.dev;
        let country_features = [
            ("literacy", (40.0 + 58.0 * d + e(rng, 3.0)).clamp(10.0, 99.9)),
            ("rd_gdp", (-2.5 + 3.0 * d + e(rng, 0.3)).exp()),
            ("stem_grads", (5.0 + 25.0 * d + e(rng, 2.0)).max(1.0)),
            ("cybersecurity_law", f64::from(u8::from(d + e(rng, 0.2) > 0.45))),
            ("hh_phones", (30.0 + 68.0 * d + e(rng, 3.0)).clamp(5.0, 100.0)),
            ("internet_users", (10.0 + 85.0 * d + e(rng, 4.0)).clamp(1.0, 100.0)),
            ("hh_internet", (5.0 + 85.0 * d + e(rng, 4.0)).clamp(1.0, 100.0)),
            ("hh_computers", (3.0 + 70.0 * d + e(rng, 4.0)).clamp(1.0, 100.0)),
        ];
        for (f, v) in country_features {
            if rng.random_bool(0.05) {
                continue;
            }
            rows.push(GeoRow {
                country: c.code.clone(),
                admin1: None,
                feature_id: f.into(),
                value: round_sig12(v),
                year: 2023,
            });
        }
    }
    GeoTable { rows }
}

fn universities(countries: &[Country], rng: &mut ChaCha8Rng) -> Vec<University> {
    let mut out = Vec::new();
    for c in countries {
        let n = 1 + (20.0 * c.dev * c.dev * rng.random_range(0.5..1.5)).round() as usize;
        for k in 0..n {
            out.push(University {
                name: format!("University {} {}", c.code, k + 1),
                lat: round6(rng.random_range(c.lat.0..c.lat.1)),
                lon: round6(rng.random_range(c.lon.0..c.lon.1)),
            });
        }
    }
    out
}

fn boundaries(countries: &[Country]) -> serde_json::Value {
    let features: Vec<serde_json::Value> = countries
        .iter()
        .flat_map(|c| {
            c.regions.iter().map(move |r| {
                json!({
                    "type": "Feature",
                    "properties": { "country": c.code, "admin1": r.code },
                    "geometry": {
                        "type": "Polygon",
                        "coordinates": [[
                            [r.lon.0, r.lat.0], [r.lon.1, r.lat.0], [r.lon.1, r.lat.1],
                            [r.lon.0, r.lat.1], [r.lon.0, r.lat.0]
                        ]]
                    }
                })
            })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}

/// Languages are covered in order of a noisy propensity; each release
/// lists everything covered so far.
fn manifests(langs: &[Lang], rng: &mut ChaCha8Rng, noise: &Normal<f64>) -> Vec<CoverageManifest> {
    let start = NaiveDate::from_ymd_opt(2022, 11, 30).expect("valid date");
    let span_days = 900.0;
    let n_covered = (langs.len() / 14).max(1);
    let mut order: Vec<(f64, usize)> = langs
        .iter()
        .enumerate()
        .filter(|(_, l)| !l.record.is_dead)
        .map(|(i, l)| {
            let q = 0.6 * (l.record.n_speakers as f64 + 1.0).ln() + l.r + 0.5 * noise.sample(rng);
            (q, i)
        })
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut coverage: Vec<(NaiveDate, usize)> = order
        .iter()
        .take(n_covered)
        .enumerate()
        .map(|(k, &(_, i))| {
            let frac = ((k + 1) as f64 / n_covered as f64).powf(0.7);
            let jitter = 20.0 * noise.sample(rng);
            let days = (span_days * frac + jitter).clamp(0.0, span_days);
            (start + Days::new(days as u64), i)
        })
        .collect();
    coverage.sort();

    let n_models = 28;
    (0..n_models)
        .map(|k| {
            let release = start + Days::new((span_days * k as f64 / (n_models - 1) as f64) as u64);
            let mut languages: Vec<String> = coverage
                .iter()
                .filter(|(d, _)| *d <= release)
                .map(|&(_, i)| snapshot_code(&langs[i].record))
                .collect();
            if languages.is_empty() {
                languages.push(snapshot_code(&langs[order[0].1].record));
            }
            if k == n_models - 1 {
                languages.push("qaa-x9".into());
            }
            languages.sort();
            languages.dedup();
            CoverageManifest {
                model_name: format!("chat-model-{:02}", k + 1),
                release_date: release,
                languages,
            }
        })
        .collect()
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthFiles> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let countries = world(cfg, &mut rng, &noise);
    let langs = languages(cfg, &countries, &mut rng, &noise);
    let records: Vec<LanguageRecord> = langs.iter().map(|l| l.record.clone()).collect();
    let mut files = BTreeMap::new();

    let mut registry = Vec::new();
    write_registry(&records, &mut registry)?;
    {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut registry);
        for k in 0..cfg.n_without_location {
            let c = &countries[k % countries.len()];
            w.write_record([
                format!("nloc{:04}", 1000 + k),
                String::new(),
                format!("Unlocated {}", k + 1),
                String::new(),
                String::new(),
                c.macroarea.as_str().to_string(),
                "family_001".into(),
                c.code.clone(),
                String::new(),
                "100".into(),
                "moribund".into(),
                "false".into(),
                "false".into(),
            ])?;
        }
        w.flush()?;
    }
    files.insert(REGISTRY_FILE.to_string(), registry);

    let mut buf = Vec::new();
    write_snapshot(&snapshots(&langs, &mut rng, &noise), &mut buf)?;
    files.insert(SNAPSHOTS_FILE.to_string(), buf);

    let mut buf = Vec::new();
    language_table(&langs, &mut rng, &noise).write(&mut buf)?;
    files.insert(LANGUAGES_FILE.to_string(), buf);

    let mut buf = Vec::new();
    geo_table(&countries, &mut rng, &noise).write(&mut buf)?;
    files.insert(GEO_FILE.to_string(), buf);

    let mut buf = Vec::new();
    write_universities(&universities(&countries, &mut rng), &mut buf)?;
    files.insert(UNIVERSITIES_FILE.to_string(), buf);

    let mut buf = serde_json::to_vec(&boundaries(&countries))?;
    buf.push(b'\n');
    files.insert(BOUNDARIES_FILE.to_string(), buf);

    for m in manifests(&langs, &mut rng, &noise) {
        let mut buf = serde_json::to_vec_pretty(&m)?;
        buf.push(b'\n');
        files.insert(format!("{MANIFEST_DIR}/{}.json", m.model_name), buf);
    }
    Ok(SynthFiles { files })
}
