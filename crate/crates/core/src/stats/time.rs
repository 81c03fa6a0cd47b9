use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::linreg::{mean, sample_sd};
use crate::error::{Error, Result};

/// Z-score parameters of a time axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeNormalization {
    pub mu_t: f64,
    pub sigma_t: f64,
}

impl TimeNormalization {
    pub fn apply(&self, t: f64) -> f64 {
        (t - self.mu_t) / self.sigma_t
    }

    pub fn invert(&self, t_norm: f64) -> f64 {
        t_norm * self.sigma_t + self.mu_t
    }
}

/// Standardize timestamps to mean 0 and sample standard deviation 1.
pub fn normalize_time(timestamps: &[f64]) -> Result<(Vec<f64>, TimeNormalization)> {
    if timestamps.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: timestamps.len(),
        });
    }
    let mu_t = mean(timestamps);
    let sigma_t = sample_sd(timestamps);
    if !(sigma_t > 0.0) {
        return Err(Error::DegenerateInput("all timestamps are equal".into()));
    }
    let norm = TimeNormalization { mu_t, sigma_t };
    Ok((timestamps.iter().map(|&t| norm.apply(t)).collect(), norm))
}

/// Calendar date as a fractional year, e.g. 2024-07-02 -> ~2024.5.
pub fn decimal_year(date: NaiveDate) -> f64 {
    let year = date.year();
    let start = NaiveDate::from_ymd_opt(year, 1, 1).expect("valid date");
    let next = NaiveDate::from_ymd_opt(year + 1, 1, 1).expect("valid date");
    let len = (next - start).num_days() as f64;
    year as f64 + (date - start).num_days() as f64 / len
}
