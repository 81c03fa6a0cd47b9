//! Language registry CSV, one row per language.

use std::collections::HashSet;
use std::io::Write;

use super::{check_header, csv_reader, line_of};
use crate::error::{Error, Result};
use crate::model::{LanguageRecord, Macroarea, ValidationIssue, ValidationReport, Vitality};

pub const REGISTRY_HEADER: [&str; 13] = [
    "glottocode",
    "iso639_3",
    "name",
    "centroid_lat",
    "centroid_lon",
    "macroarea",
    "family",
    "primary_country",
    "admin1",
    "n_speakers",
    "vitality",
    "institutional",
    "is_dead",
];

fn enum_field<T: serde::de::DeserializeOwned>(raw: &str, line: u64, name: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(raw.trim().to_string()))
        .map_err(|_| Error::parse(line, format!("{name} `{raw}` is not a known value")))
}

fn bool_field(raw: &str, line: u64, name: &str) -> Result<bool> {
    match raw.trim() {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        other => Err(Error::parse(line, format!("{name} `{other}` is not a boolean"))),
    }
}

fn opt(raw: &str) -> Option<String> {
    let t = raw.trim();
    (!t.is_empty()).then(|| t.to_string())
}

/// Parse the registry. Rows without a centroid are dropped and listed under
/// `excluded`; duplicate glottocodes and out-of-range coordinates are errors
/// in the returned report.
pub fn parse_registry(bytes: &[u8]) -> Result<(Vec<LanguageRecord>, ValidationReport)> {
    let mut rdr = csv_reader(bytes);
    check_header(&mut rdr, &REGISTRY_HEADER)?;
    let mut records = Vec::new();
    let mut report = ValidationReport::default();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        if rec.len() != REGISTRY_HEADER.len() {
            return Err(Error::parse(
                line,
                format!("expected {} fields, found {}", REGISTRY_HEADER.len(), rec.len()),
            ));
        }
        let glottocode = rec[0].trim().to_string();
        if glottocode.is_empty() {
            return Err(Error::parse(line, "empty glottocode"));
        }
        let coord = |i: usize, name: &str| -> Result<Option<f64>> {
            match rec[i].trim() {
                "" => Ok(None),
                s => s
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(Some)
                    .ok_or_else(|| Error::parse(line, format!("{name} `{s}` is not a number"))),
            }
        };
        let (lat, lon) = (coord(3, "centroid_lat")?, coord(4, "centroid_lon")?);
        let n_speakers = rec[9]
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::parse(line, format!("n_speakers `{}` is not a nonnegative integer", &rec[9])))?;
        let macroarea: Macroarea = enum_field(&rec[5], line, "macroarea")?;
        let vitality: Vitality = enum_field(&rec[10], line, "vitality")?;
        let institutional = bool_field(&rec[11], line, "institutional")?;
        let is_dead = bool_field(&rec[12], line, "is_dead")?;
        let primary_country = rec[7].trim().to_string();
        if primary_country.is_empty() {
            return Err(Error::parse(line, "empty primary_country"));
        }

        let (Some(centroid_lat), Some(centroid_lon)) = (lat, lon) else {
            report.excluded.push(ValidationIssue::MissingCentroid { glottocode });
            continue;
        };
        if !seen.insert(glottocode.clone()) {
            report.errors.push(ValidationIssue::DuplicateGlottocode {
                glottocode: glottocode.clone(),
            });
        }
        if !(-90.0..=90.0).contains(&centroid_lat) {
            report.errors.push(ValidationIssue::LatitudeOutOfRange {
                glottocode: glottocode.clone(),
                value: centroid_lat.to_string(),
            });
        }
        if !(-180.0..=180.0).contains(&centroid_lon) {
            report.errors.push(ValidationIssue::LongitudeOutOfRange {
                glottocode: glottocode.clone(),
                value: centroid_lon.to_string(),
            });
        }
        records.push(LanguageRecord {
            glottocode,
            iso639_3: opt(&rec[1]),
            name: rec[2].trim().to_string(),
            centroid_lat,
            centroid_lon,
            macroarea,
            family: rec[6].trim().to_string(),
            primary_country,
            admin1: opt(&rec[8]),
            n_speakers,
            vitality,
            institutional,
            is_dead,
        });
    }
    Ok((records, report))
}

fn enum_str<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => unreachable!("unit enum serializes to a string"),
    }
}

pub fn write_registry<W: Write>(records: &[LanguageRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REGISTRY_HEADER)?;
    for r in records {
        w.write_record([
            r.glottocode.clone(),
            r.iso639_3.clone().unwrap_or_default(),
            r.name.clone(),
            r.centroid_lat.to_string(),
            r.centroid_lon.to_string(),
            enum_str(&r.macroarea),
            r.family.clone(),
            r.primary_country.clone(),
            r.admin1.clone().unwrap_or_default(),
            r.n_speakers.to_string(),
            enum_str(&r.vitality),
            r.institutional.to_string(),
            r.is_dead.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
