//! Fixture-file parsing and assembly of the feature matrix and diffusion
//! series.

pub mod bundle;
pub mod compare;
pub mod diffusion;
pub mod geo;
pub mod load;
pub mod manifest;
pub mod matrix;
pub mod registry;
pub mod snapshot;
pub mod tables;

pub use bundle::{build_bundle, DatasetBundle, IngestInputs};
pub use compare::{compare_source_distributions, SourceComparison};
pub use diffusion::{build_diffusion_series, monthly_timestamps, DiffusionSeries};
pub use geo::{
    geo_join, nearest_university_distance, parse_boundaries, registry_locations, Boundary,
    JoinMethod, JoinedLocation,
};
pub use load::{inputs_from_files, read_input_dir, FileMap};
pub use manifest::{parse_manifest, CoverageManifest};
pub use matrix::{assignments, build_feature_matrix, MatrixSources};
pub use registry::{parse_registry, write_registry, REGISTRY_HEADER};
pub use snapshot::{
    latest_date_per_year, parse_snapshot, resolve_snapshot, write_snapshot, CodeResolver,
    ResolvedSnapshot, SnapshotRow, SNAPSHOT_HEADER,
};
pub use tables::{
    parse_universities, write_universities, GeoRow, GeoTable, LangRow, LanguageTable, University,
};

use std::io::Read;

use crate::error::{Error, Result};

pub(crate) fn csv_reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes)
}

pub(crate) fn check_header<R: Read>(rdr: &mut csv::Reader<R>, want: &[&str]) -> Result<()> {
    let got = rdr.headers()?;
    if got.iter().map(str::trim).eq(want.iter().copied()) {
        Ok(())
    } else {
        Err(Error::parse(
            1,
            format!("header `{}`, expected `{}`", got.iter().collect::<Vec<_>>().join(","), want.join(",")),
        ))
    }
}

pub(crate) fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}
