//! Model coverage manifests: one JSON document per released model.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageManifest {
    pub model_name: String,
    pub release_date: NaiveDate,
    pub languages: Vec<String>,
}

impl CoverageManifest {
    pub fn validate(&self) -> Result<()> {
        if self.model_name.trim().is_empty() {
            return Err(Error::parse(0, "manifest: empty model_name"));
        }
        if self.languages.is_empty() {
            return Err(Error::parse(0, format!("manifest {}: empty language list", self.model_name)));
        }
        Ok(())
    }
}

pub fn parse_manifest(bytes: &[u8]) -> Result<CoverageManifest> {
    let m: CoverageManifest = serde_json::from_slice(bytes).map_err(|e| {
        Error::parse(e.line() as u64, format!("manifest: {e}"))
    })?;
    m.validate()?;
    Ok(m)
}
