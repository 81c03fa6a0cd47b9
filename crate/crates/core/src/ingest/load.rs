//! Reading a fixture directory (or an in-memory file map with the same
//! layout) into [`IngestInputs`].

use std::collections::BTreeMap;
use std::path::Path;

use super::bundle::IngestInputs;
use super::geo::parse_boundaries;
use super::manifest::parse_manifest;
use super::registry::parse_registry;
use super::snapshot::parse_snapshot;
use super::tables::{parse_universities, GeoTable, LanguageTable};
use crate::error::{Error, Result};
use crate::model::FeatureSpec;
use crate::synth::{
    BOUNDARIES_FILE, GEO_FILE, LANGUAGES_FILE, MANIFEST_DIR, REGISTRY_FILE, SNAPSHOTS_FILE,
    UNIVERSITIES_FILE,
};

/// Input files keyed by path relative to the input root, `/`-separated.
pub type FileMap = BTreeMap<String, Vec<u8>>;

/// Wraps a parse failure with the file it came from.
fn in_file<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{name}: {message}"),
        },
        Error::DuplicateKey { line, key } => Error::DuplicateKey {
            line,
            key: format!("{name}: {key}"),
        },
        other => other,
    })
}

pub fn inputs_from_files(files: &FileMap, features: Vec<FeatureSpec>, faithful_extract: bool) -> Result<IngestInputs> {
    let required = |name: &'static str| {
        files
            .get(name)
            .map(Vec::as_slice)
            .ok_or(Error::EmptyInput(name))
    };
    let (records, registry_report) = in_file(REGISTRY_FILE, parse_registry(required(REGISTRY_FILE)?))?;
    let snapshots = in_file(SNAPSHOTS_FILE, parse_snapshot(required(SNAPSHOTS_FILE)?))?;
    let geo = files
        .get(GEO_FILE)
        .map(|b| in_file(GEO_FILE, GeoTable::parse(b)))
        .transpose()?;
    let languages = files
        .get(LANGUAGES_FILE)
        .map(|b| in_file(LANGUAGES_FILE, LanguageTable::parse(b)))
        .transpose()?;
    let universities = files
        .get(UNIVERSITIES_FILE)
        .map(|b| in_file(UNIVERSITIES_FILE, parse_universities(b)))
        .transpose()?;
    let boundaries = files
        .get(BOUNDARIES_FILE)
        .map(|b| in_file(BOUNDARIES_FILE, parse_boundaries(b)))
        .transpose()?;
    let prefix = format!("{MANIFEST_DIR}/");
    let manifests = files
        .iter()
        .filter(|(k, _)| k.starts_with(&prefix) && k.ends_with(".json"))
        .map(|(k, v)| in_file(k, parse_manifest(v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(IngestInputs {
        records,
        registry_report,
        snapshots,
        geo,
        languages,
        universities,
        manifests,
        boundaries,
        features,
        faithful_extract,
    })
}

/// Reads the known input files under `dir`; optional files may be absent.
pub fn read_input_dir(dir: &Path) -> Result<FileMap> {
    let mut files = FileMap::new();
    for name in [
        REGISTRY_FILE,
        SNAPSHOTS_FILE,
        GEO_FILE,
        LANGUAGES_FILE,
        UNIVERSITIES_FILE,
        BOUNDARIES_FILE,
    ] {
        let path = dir.join(name);
        if path.is_file() {
            files.insert(name.to_string(), std::fs::read(path)?);
        }
    }
    let mdir = dir.join(MANIFEST_DIR);
    if mdir.is_dir() {
        for entry in std::fs::read_dir(mdir)? {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if name.ends_with(".json") && entry.file_type()?.is_file() {
                files.insert(format!("{MANIFEST_DIR}/{name}"), std::fs::read(entry.path())?);
            }
        }
    }
    Ok(files)
}
