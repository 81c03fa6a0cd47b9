//! Fixtures shared by the benchmarks.

use equate_core::defaults::{bundled_config, bundled_features};
use equate_core::ingest::{build_bundle, inputs_from_files, DatasetBundle, FileMap};
use equate_core::payload::Catalog;
use equate_core::snapshot::ApiSnapshot;
use equate_core::synth::{generate, SynthConfig};

pub fn input_files(n_languages: usize) -> FileMap {
    let cfg = SynthConfig {
        n_languages,
        ..SynthConfig::default()
    };
    generate(&cfg).expect("synthetic inputs").files
}

pub fn bundle(files: &FileMap) -> DatasetBundle {
    build_bundle(inputs_from_files(files, bundled_features(), false).expect("inputs parse")).expect("bundle builds")
}

pub fn catalog(bundle: &DatasetBundle) -> Catalog {
    let snap = ApiSnapshot::build(bundle, &bundled_config(), "2025-01-01T00:00:00Z".into()).expect("snapshot builds");
    Catalog::new(snap)
}
