//! Covered-speaker totals over time from model coverage manifests.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Datelike, Months, NaiveDate};
use serde::{Deserialize, Serialize};

use super::manifest::CoverageManifest;
use super::snapshot::CodeResolver;
use crate::error::{Error, Result};
use crate::model::LanguageRecord;
use crate::stats::decimal_year;

/// Coverage is stored as the index of the first timestamp at which each
/// language is covered, so `M(L, t)` is nondecreasing by construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffusionSeries {
    pub timestamps: Vec<NaiveDate>,
    pub first_covered: BTreeMap<String, usize>,
    /// Speaker counts of the languages in `first_covered`.
    pub speakers: BTreeMap<String, u64>,
    pub totals: Vec<u64>,
}

fn check_sorted(timestamps: &[NaiveDate]) -> Result<()> {
    if timestamps.windows(2).all(|w| w[0] < w[1]) {
        Ok(())
    } else {
        Err(Error::InvalidConfig("diffusion timestamps must be strictly increasing".into()))
    }
}

impl DiffusionSeries {
    pub fn covered(&self, glottocode: &str, t: usize) -> bool {
        self.first_covered.get(glottocode).is_some_and(|&f| f <= t)
    }

    /// Build from explicit per-language indicator rows, rejecting any row
    /// that goes from covered back to uncovered.
    pub fn from_indicators(
        timestamps: Vec<NaiveDate>,
        indicators: &BTreeMap<String, Vec<bool>>,
        speakers: &BTreeMap<String, u64>,
    ) -> Result<Self> {
        check_sorted(&timestamps)?;
        let mut first_covered = BTreeMap::new();
        for (g, row) in indicators {
            if row.len() != timestamps.len() {
                return Err(Error::Invariant(format!("coverage row for {g} has wrong length")));
            }
            if let Some(f) = row.iter().position(|&m| m) {
                if row[f..].iter().any(|&m| !m) {
                    return Err(Error::NonMonotoneCoverage(g.clone()));
                }
                first_covered.insert(g.clone(), f);
            }
        }
        Self::assemble(timestamps, first_covered, speakers)
    }

    fn assemble(
        timestamps: Vec<NaiveDate>,
        first_covered: BTreeMap<String, usize>,
        speakers: &BTreeMap<String, u64>,
    ) -> Result<Self> {
        let mut covered_speakers = BTreeMap::new();
        let mut totals = vec![0u64; timestamps.len()];
        for (g, &f) in &first_covered {
            let p = *speakers
                .get(g)
                .ok_or_else(|| Error::Invariant(format!("no speaker count for {g}")))?;
            covered_speakers.insert(g.clone(), p);
            for t in &mut totals[f..] {
                *t += p;
            }
        }
        Ok(Self {
            timestamps,
            first_covered,
            speakers: covered_speakers,
            totals,
        })
    }

    /// Recompute every total from the coverage indicators.
    pub fn check_totals(&self) -> Result<()> {
        for (t, &stored) in self.totals.iter().enumerate() {
            let sum: u64 = self
                .first_covered
                .iter()
                .filter(|(_, &f)| f <= t)
                .map(|(g, _)| self.speakers[g])
                .sum();
            if sum != stored {
                return Err(Error::Invariant(format!("S_t mismatch at index {t}: {stored} != {sum}")));
            }
        }
        Ok(())
    }

    pub fn decimal_times(&self) -> Vec<f64> {
        self.timestamps.iter().map(|&d| decimal_year(d)).collect()
    }

    pub fn totals_f64(&self) -> Vec<f64> {
        self.totals.iter().map(|&v| v as f64).collect()
    }
}

/// `M(L, t) = 1` iff some manifest released on or before `t` lists `L`.
/// Returns the series and the sorted manifest codes that match no record.
pub fn build_diffusion_series(
    records: &[LanguageRecord],
    manifests: &[CoverageManifest],
    timestamps: &[NaiveDate],
) -> Result<(DiffusionSeries, Vec<String>)> {
    check_sorted(timestamps)?;
    let resolver = CodeResolver::new(records);
    let mut release: BTreeMap<String, NaiveDate> = BTreeMap::new();
    let mut unknown = BTreeSet::new();
    for m in manifests {
        for code in &m.languages {
            match resolver.resolve(code) {
                Some(g) => {
                    let e = release.entry(g.to_string()).or_insert(m.release_date);
                    *e = (*e).min(m.release_date);
                }
                None => {
                    unknown.insert(code.clone());
                }
            }
        }
    }
    let first_covered = release
        .into_iter()
        .filter_map(|(g, d)| timestamps.iter().position(|&t| d <= t).map(|i| (g, i)))
        .collect();
    let speakers = records.iter().map(|r| (r.glottocode.clone(), r.n_speakers)).collect();
    let series = DiffusionSeries::assemble(timestamps.to_vec(), first_covered, &speakers)?;
    Ok((series, unknown.into_iter().collect()))
}

/// First day of every month from `start`'s month through `end`.
pub fn monthly_timestamps(start: NaiveDate, end: NaiveDate) -> Vec<NaiveDate> {
    let mut t = start.with_day(1).expect("day 1 exists");
    let mut out = Vec::new();
    while t <= end {
        out.push(t);
        t = t + Months::new(1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Macroarea, Vitality};

    fn d(y: i32, m: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, 1).unwrap()
    }

    fn rec(code: &str, speakers: u64) -> LanguageRecord {
        LanguageRecord {
            glottocode: code.into(),
            iso639_3: Some(format!("{code}x")),
            name: code.into(),
            centroid_lat: 0.0,
            centroid_lon: 0.0,
            macroarea: Macroarea::Eurasia,
            family: "f".into(),
            primary_country: "X".into(),
            admin1: None,
            n_speakers: speakers,
            vitality: Vitality::NotEndangered,
            institutional: false,
            is_dead: false,
        }
    }

    #[test]
    fn single_coverage() {
        let records = [rec("a", 100), rec("b", 50)];
        let m = CoverageManifest {
            model_name: "m".into(),
            release_date: d(2023, 2),
            languages: vec!["ax".into(), "zzz".into()],
        };
        let ts = [d(2023, 1), d(2023, 2), d(2023, 3)];
        let (s, unknown) = build_diffusion_series(&records, &[m], &ts).unwrap();
        assert_eq!(s.totals, vec![0, 100, 100]);
        assert_eq!(unknown, vec!["zzz".to_string()]);
        assert!(!s.covered("a", 0) && s.covered("a", 1) && !s.covered("b", 2));
        s.check_totals().unwrap();
    }

    #[test]
    fn no_manifests() {
        let (s, _) = build_diffusion_series(&[rec("a", 100)], &[], &[d(2023, 1), d(2024, 1)]).unwrap();
        assert_eq!(s.totals, vec![0, 0]);
    }

    #[test]
    fn non_monotone_rows_are_rejected() {
        let ind = BTreeMap::from([("a".to_string(), vec![false, true, false])]);
        let sp = BTreeMap::from([("a".to_string(), 5)]);
        let r = DiffusionSeries::from_indicators(vec![d(2020, 1), d(2020, 2), d(2020, 3)], &ind, &sp);
        assert!(matches!(r, Err(Error::NonMonotoneCoverage(_))));
    }

    #[test]
    fn unsorted_timestamps_are_rejected() {
        assert!(build_diffusion_series(&[], &[], &[d(2021, 1), d(2020, 1)]).is_err());
    }

    #[test]
    fn months() {
        let ts = monthly_timestamps(NaiveDate::from_ymd_opt(2022, 11, 15).unwrap(), d(2023, 2));
        assert_eq!(ts, vec![d(2022, 11), d(2022, 12), d(2023, 1), d(2023, 2)]);
    }
}
