//! Geographic and language-level indicator tables, and university locations.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{check_header, csv_reader, line_of};
use crate::error::{Error, Result};
use crate::model::{DevelopmentConfig, DevelopmentScore};

pub const GEO_HEADER: [&str; 5] = ["country", "admin1", "feature_id", "value", "year"];
pub const LANG_HEADER: [&str; 3] = ["glottocode", "feature_id", "value"];
pub const UNIVERSITY_HEADER: [&str; 3] = ["name", "lat", "lon"];

fn number(raw: &str, line: u64, name: &str) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(line, format!("{name} `{raw}` is not a finite number")))
}

fn field_count(rec: &csv::StringRecord, want: usize, line: u64) -> Result<()> {
    if rec.len() == want {
        Ok(())
    } else {
        Err(Error::parse(line, format!("expected {want} fields, found {}", rec.len())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoRow {
    pub country: String,
    /// `None` for country-level values.
    pub admin1: Option<String>,
    pub feature_id: String,
    pub value: f64,
    pub year: i32,
}

/// Region- and country-level indicator values across years.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GeoTable {
    pub rows: Vec<GeoRow>,
}

impl GeoTable {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let mut rdr = csv_reader(bytes);
        check_header(&mut rdr, &GEO_HEADER)?;
        let mut rows = Vec::new();
        let mut seen = HashSet::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = line_of(&rec);
            field_count(&rec, 5, line)?;
            let country = rec[0].trim().to_string();
            let feature_id = rec[2].trim().to_string();
            if country.is_empty() || feature_id.is_empty() {
                return Err(Error::parse(line, "country and feature_id are required"));
            }
            let admin1 = Some(rec[1].trim().to_string()).filter(|s| !s.is_empty());
            let value = number(&rec[3], line, "value")?;
            let year = rec[4]
                .trim()
                .parse::<i32>()
                .map_err(|_| Error::parse(line, format!("year `{}` is not an integer", &rec[4])))?;
            let key = (country.clone(), admin1.clone(), feature_id.clone(), year);
            if !seen.insert(key) {
                return Err(Error::DuplicateKey {
                    line,
                    key: format!("{country},{},{feature_id},{year}", admin1.unwrap_or_default()),
                });
            }
            rows.push(GeoRow {
                country,
                admin1,
                feature_id,
                value,
                year,
            });
        }
        Ok(Self { rows })
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(GEO_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.country.clone(),
                r.admin1.clone().unwrap_or_default(),
                r.feature_id.clone(),
                r.value.to_string(),
                r.year.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn has_feature(&self, feature_id: &str) -> bool {
        self.rows.iter().any(|r| r.feature_id == feature_id)
    }

    /// Most recent value per (country, admin1, feature).
    pub fn latest(&self) -> BTreeMap<(String, Option<String>, String), f64> {
        let mut best: BTreeMap<(String, Option<String>, String), (i32, f64)> = BTreeMap::new();
        for r in &self.rows {
            let key = (r.country.clone(), r.admin1.clone(), r.feature_id.clone());
            match best.get(&key) {
                Some(&(y, _)) if y >= r.year => {}
                _ => {
                    best.insert(key, (r.year, r.value));
                }
            }
        }
        best.into_iter().map(|(k, (_, v))| (k, v)).collect()
    }

    /// Per-country development scores. A country-level row is used when
    /// present, otherwise the mean over the country's regions.
    pub fn development_scores(&self, cfg: &DevelopmentConfig) -> BTreeMap<String, DevelopmentScore> {
        let latest = self.latest();
        let score_of = |feature: &str| -> BTreeMap<String, f64> {
            let mut national = BTreeMap::new();
            let mut regional: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            for ((country, admin1, f), v) in &latest {
                if f != feature {
                    continue;
                }
                match admin1 {
                    None => {
                        national.insert(country.clone(), *v);
                    }
                    Some(_) => regional.entry(country.clone()).or_default().push(*v),
                }
            }
            for (c, vals) in regional {
                national
                    .entry(c)
                    .or_insert_with(|| vals.iter().sum::<f64>() / vals.len() as f64);
            }
            national
        };
        let primary = score_of(&cfg.primary_feature);
        let fallback = score_of(&cfg.fallback_feature);
        let mut out: BTreeMap<String, DevelopmentScore> = BTreeMap::new();
        for r in &self.rows {
            out.entry(r.country.clone()).or_default();
        }
        for (c, v) in primary {
            out.entry(c).or_default().primary = Some(v);
        }
        for (c, v) in fallback {
            out.entry(c).or_default().fallback = Some(v);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LangRow {
    pub glottocode: String,
    pub feature_id: String,
    pub value: f64,
}

/// Language-level indicator values (corpus sizes, flags, ...).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LanguageTable {
    pub rows: Vec<LangRow>,
}

impl LanguageTable {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let mut rdr = csv_reader(bytes);
        check_header(&mut rdr, &LANG_HEADER)?;
        let mut rows = Vec::new();
        let mut seen = HashSet::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = line_of(&rec);
            field_count(&rec, 3, line)?;
            let glottocode = rec[0].trim().to_string();
            let feature_id = rec[1].trim().to_string();
            if glottocode.is_empty() || feature_id.is_empty() {
                return Err(Error::parse(line, "glottocode and feature_id are required"));
            }
            let value = number(&rec[2], line, "value")?;
            if !seen.insert((glottocode.clone(), feature_id.clone())) {
                return Err(Error::DuplicateKey {
                    line,
                    key: format!("{glottocode},{feature_id}"),
                });
            }
            rows.push(LangRow {
                glottocode,
                feature_id,
                value,
            });
        }
        Ok(Self { rows })
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(LANG_HEADER)?;
        for r in &self.rows {
            w.write_record([r.glottocode.clone(), r.feature_id.clone(), r.value.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn has_feature(&self, feature_id: &str) -> bool {
        self.rows.iter().any(|r| r.feature_id == feature_id)
    }

    pub fn lookup(&self) -> BTreeMap<(&str, &str), f64> {
        self.rows
            .iter()
            .map(|r| ((r.glottocode.as_str(), r.feature_id.as_str()), r.value))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct University {
    pub name: String,
    pub lat: f64,
    pub lon: f64,
}

pub fn parse_universities(bytes: &[u8]) -> Result<Vec<University>> {
    let mut rdr = csv_reader(bytes);
    check_header(&mut rdr, &UNIVERSITY_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        field_count(&rec, 3, line)?;
        let lat = number(&rec[1], line, "lat")?;
        let lon = number(&rec[2], line, "lon")?;
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::parse(line, "coordinates out of range"));
        }
        out.push(University {
            name: rec[0].trim().to_string(),
            lat,
            lon,
        });
    }
    Ok(out)
}

pub fn write_universities<W: Write>(unis: &[University], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(UNIVERSITY_HEADER)?;
    for u in unis {
        w.write_record([u.name.clone(), u.lat.to_string(), u.lon.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geo_table_latest_and_round_trip() {
        let text = "country,admin1,feature_id,value,year\n\
                    XX,XX-1,hdi,0.7,2020\n\
                    XX,XX-1,hdi,0.71,2022\n\
                    XX,,gdp_pc,1500.5,2022\n";
        let t = GeoTable::parse(text.as_bytes()).unwrap();
        let latest = t.latest();
        assert_eq!(latest[&("XX".into(), Some("XX-1".into()), "hdi".into())], 0.71);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), text);
    }

    #[test]
    fn geo_duplicate_key() {
        let text = "country,admin1,feature_id,value,year\nXX,,hdi,0.7,2020\nXX,,hdi,0.8,2020\n";
        assert!(matches!(GeoTable::parse(text.as_bytes()), Err(Error::DuplicateKey { line: 3, .. })));
    }

    #[test]
    fn development_prefers_national_row() {
        let text = "country,admin1,feature_id,value,year\n\
                    AA,AA-1,hdi,0.6,2022\nAA,AA-2,hdi,0.8,2022\n\
                    BB,BB-1,hdi,0.5,2022\nBB,,hdi,0.55,2022\n\
                    CC,,gdp_pc,900,2022\n";
        let d = GeoTable::parse(text.as_bytes())
            .unwrap()
            .development_scores(&DevelopmentConfig::default());
        assert!((d["AA"].primary.unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(d["BB"].primary, Some(0.55));
        assert_eq!(d["CC"], DevelopmentScore { primary: None, fallback: Some(900.0) });
    }

    #[test]
    fn language_table_rejects_bad_value() {
        let text = "glottocode,feature_id,value\nabcd1234,cc_gb,abc\n";
        assert!(matches!(LanguageTable::parse(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn universities_round_trip() {
        let u = vec![University { name: "A, B".into(), lat: 1.5, lon: -2.25 }];
        let mut buf = Vec::new();
        write_universities(&u, &mut buf).unwrap();
        assert_eq!(parse_universities(&buf).unwrap(), u);
    }
}
