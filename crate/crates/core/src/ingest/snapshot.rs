//! Monthly resource snapshots: `snapshot_date,language_code,n_models,n_datasets`.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{check_header, csv_reader, line_of};
use crate::error::{Error, Result};
use crate::model::LanguageRecord;

pub const SNAPSHOT_HEADER: [&str; 4] = ["snapshot_date", "language_code", "n_models", "n_datasets"];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub snapshot_date: NaiveDate,
    pub language_code: String,
    pub n_models: u64,
    pub n_datasets: u64,
}

pub fn parse_snapshot(bytes: &[u8]) -> Result<Vec<SnapshotRow>> {
    let mut rdr = csv_reader(bytes);
    check_header(&mut rdr, &SNAPSHOT_HEADER)?;
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        if rec.len() != 4 {
            return Err(Error::parse(line, format!("expected 4 fields, found {}", rec.len())));
        }
        let snapshot_date = NaiveDate::parse_from_str(rec[0].trim(), "%Y-%m-%d")
            .map_err(|e| Error::parse(line, format!("snapshot_date `{}`: {e}", &rec[0])))?;
        let language_code = rec[1].trim().to_string();
        if language_code.is_empty() {
            return Err(Error::parse(line, "empty language_code"));
        }
        let count = |i: usize, name: &str| {
            rec[i]
                .trim()
                .parse::<u64>()
                .map_err(|_| Error::parse(line, format!("{name} `{}` is not a nonnegative integer", &rec[i])))
        };
        let n_models = count(2, "n_models")?;
        let n_datasets = count(3, "n_datasets")?;
        if !seen.insert((snapshot_date, language_code.clone())) {
            return Err(Error::DuplicateKey {
                line,
                key: format!("{snapshot_date},{language_code}"),
            });
        }
        rows.push(SnapshotRow {
            snapshot_date,
            language_code,
            n_models,
            n_datasets,
        });
    }
    Ok(rows)
}

pub fn write_snapshot<W: Write>(rows: &[SnapshotRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SNAPSHOT_HEADER)?;
    for r in rows {
        w.write_record([
            r.snapshot_date.format("%Y-%m-%d").to_string(),
            r.language_code.clone(),
            r.n_models.to_string(),
            r.n_datasets.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Latest snapshot date within each calendar year.
pub fn latest_date_per_year(rows: &[SnapshotRow]) -> BTreeMap<i32, NaiveDate> {
    let mut out: BTreeMap<i32, NaiveDate> = BTreeMap::new();
    for r in rows {
        let e = out.entry(r.snapshot_date.year()).or_insert(r.snapshot_date);
        if r.snapshot_date > *e {
            *e = r.snapshot_date;
        }
    }
    out
}

/// Maps external language codes onto glottocodes.
///
/// ISO 639-3 codes are tried first, then glottocodes. When several records
/// share an ISO code (macrolanguages), the one with the most speakers wins,
/// ties broken by glottocode.
#[derive(Debug, Clone)]
pub struct CodeResolver {
    map: BTreeMap<String, String>,
}

impl CodeResolver {
    pub fn new(records: &[LanguageRecord]) -> Self {
        let mut iso: BTreeMap<&str, &LanguageRecord> = BTreeMap::new();
        for r in records {
            if let Some(code) = r.iso639_3.as_deref().filter(|c| !c.is_empty()) {
                let slot = iso.entry(code).or_insert(r);
                let better = (r.n_speakers, std::cmp::Reverse(&r.glottocode))
                    > (slot.n_speakers, std::cmp::Reverse(&slot.glottocode));
                if better {
                    *slot = r;
                }
            }
        }
        let mut map: BTreeMap<String, String> = records
            .iter()
            .map(|r| (r.glottocode.clone(), r.glottocode.clone()))
            .collect();
        for (code, r) in iso {
            map.insert(code.to_string(), r.glottocode.clone());
        }
        Self { map }
    }

    pub fn resolve(&self, code: &str) -> Option<&str> {
        self.map.get(code).map(String::as_str)
    }
}

/// Per-language counts of one snapshot date.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResolvedSnapshot {
    pub date: Option<NaiveDate>,
    pub counts: BTreeMap<String, (u64, u64)>,
    /// Codes that matched no record.
    pub unmapped: Vec<String>,
}

impl ResolvedSnapshot {
    pub fn models(&self, glottocode: &str) -> u64 {
        self.counts.get(glottocode).map_or(0, |c| c.0)
    }

    pub fn datasets(&self, glottocode: &str) -> u64 {
        self.counts.get(glottocode).map_or(0, |c| c.1)
    }
}

/// Resolve the rows of snapshot `date`; several codes mapping to the same
/// language are summed.
pub fn resolve_snapshot(rows: &[SnapshotRow], date: NaiveDate, resolver: &CodeResolver) -> ResolvedSnapshot {
    let mut out = ResolvedSnapshot {
        date: Some(date),
        ..Default::default()
    };
    for r in rows.iter().filter(|r| r.snapshot_date == date) {
        match resolver.resolve(&r.language_code) {
            Some(g) => {
                let e = out.counts.entry(g.to_string()).or_default();
                e.0 += r.n_models;
                e.1 += r.n_datasets;
            }
            None => out.unmapped.push(r.language_code.clone()),
        }
    }
    out.unmapped.sort();
    out.unmapped.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "snapshot_date,language_code,n_models,n_datasets\n";

    #[test]
    fn single_row() {
        let rows = parse_snapshot(format!("{HEADER}2024-12-01,eng,50000,1200\n").as_bytes()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].n_models, 50000);
        assert_eq!(rows[0].n_datasets, 1200);
    }

    #[test]
    fn header_only() {
        assert!(parse_snapshot(HEADER.as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn negative_count_reports_line() {
        let err = parse_snapshot(format!("{HEADER}2024-12-01,eng,-3,0\n").as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn duplicate_key() {
        let body = format!("{HEADER}2024-12-01,eng,1,1\n2024-12-01,fra,1,1\n2024-12-01,eng,2,2\n");
        assert!(matches!(
            parse_snapshot(body.as_bytes()),
            Err(Error::DuplicateKey { line: 4, .. })
        ));
    }

    #[test]
    fn wrong_header() {
        assert!(matches!(
            parse_snapshot(b"date,code,models,datasets\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn round_trip() {
        let body = format!("{HEADER}2023-12-01,deu,7,3\n2024-12-01,eng,50000,1200\n");
        let rows = parse_snapshot(body.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), body);
        assert_eq!(parse_snapshot(&buf).unwrap(), rows);
    }

    #[test]
    fn latest_per_year() {
        let body = format!("{HEADER}2023-06-01,a,1,1\n2023-12-01,a,1,1\n2024-01-01,a,1,1\n");
        let d = latest_date_per_year(&parse_snapshot(body.as_bytes()).unwrap());
        assert_eq!(d[&2023], NaiveDate::from_ymd_opt(2023, 12, 1).unwrap());
        assert_eq!(d[&2024], NaiveDate::from_ymd_opt(2024, 1, 1).unwrap());
    }
}
