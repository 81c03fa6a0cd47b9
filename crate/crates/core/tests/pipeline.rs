use equate_core::defaults::{bundled_config, bundled_features};
use equate_core::ingest::{build_bundle, inputs_from_files};
use equate_core::snapshot::ApiSnapshot;
use equate_core::synth::{generate, SynthConfig};

#[test]
fn small_synthetic_world_runs_end_to_end() {
    let cfg = SynthConfig {
        n_languages: 400,
        n_countries: 20,
        ..SynthConfig::default()
    };
    let files = generate(&cfg).unwrap();
    let inputs = inputs_from_files(&files.files, bundled_features(), false).unwrap();
    let bundle = build_bundle(inputs).unwrap();
    let snap = ApiSnapshot::build(&bundle, &bundled_config(), "t".into()).unwrap();
    assert_eq!(snap.index_result.entries.len(), 400);
}
