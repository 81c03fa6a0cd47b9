//! Worked three-language example checked at every pipeline stage.
//! Expected values come from `../oracles/worked_fixture.py` (50-digit decimals).

use equate_core::index::{group_scores, run_index, WeightTable};
use equate_core::{
    FeatureGroup::*, FeatureKind, FeatureMatrix, FeatureSource, FeatureSpec, GeoLevel, IndexConfig,
    LogTransform,
};

fn spec(id: &str, group: equate_core::FeatureGroup, kind: FeatureKind, w: f64, log: LogTransform) -> FeatureSpec {
    FeatureSpec {
        feature_id: id.into(),
        group,
        kind,
        geo_level: GeoLevel::Language,
        weight: w,
        log_transform: log,
        source: FeatureSource::LanguageTable,
        in_index: true,
    }
}

fn fixture() -> FeatureMatrix {
    use FeatureKind::*;
    use LogTransform::*;
    let specs = vec![
        spec("a1", AiResources, Continuous, 0.5, Always),
        spec("a2", AiResources, Continuous, 0.3, Never),
        spec("bible", AiResources, Binary, 0.2, Never),
        spec("s1", Socioeconomic, Continuous, 0.6, Never),
        spec("s2", Socioeconomic, Continuous, 0.4, Never),
        spec("d1", DigitalInfrastructure, Continuous, 1.0, Never),
    ];
    let rows = [
        [100.0, 2.0, 1.0, 0.8, 0.75, 50.0],
        [10.0, 5.0, 0.0, 0.5, 0.45, 20.0],
        [0.0, 3.0, 1.0, 0.3, 0.32, 80.0],
    ];
    FeatureMatrix::from_rows(
        vec!["lang1".into(), "lang2".into(), "lang3".into()],
        specs,
        rows.iter().map(|r| r.iter().map(|&v| Some(v)).collect()).collect(),
    )
    .unwrap()
}

fn close(got: f64, want: f64, what: &str) {
    assert!((got - want).abs() <= 1e-12, "{what}: got {got:.17}, want {want:.17}");
}

pub fn worked_example_matches_oracle_at_every_stage() {
    let run = run_index(&fixture(), &[100, 200, 300], &IndexConfig::default()).unwrap();

    let ids: Vec<&str> = run.merged.specs.iter().map(|s| s.feature_id.as_str()).collect();
    assert_eq!(ids, ["a1", "a2", "bible", "s1+s2", "d1"]);
    let merged = run.merged.dense_column(3).unwrap();
    for (g, w) in merged.iter().zip([0.78, 0.48, 0.308]) {
        close(*g, w, "merged s1+s2");
    }
    close(run.weights.weights["s1+s2"], 1.0, "merged weight");
    close(run.weights.weights["a1"], 0.5, "a1 weight");
    close(run.weights.weights["bible"], 0.2, "bible weight");

    let norm = |id: &str| {
        let c = run.normalized.col_index(id).unwrap();
        run.normalized.dense_column(c).unwrap()
    };
    let expected_norm: [(&str, [f64; 3]); 4] = [
        ("a1", [1.0, 0.51957362096758927, 0.000001]),
        ("a2", [0.000001, 1.0, 0.33333333333333333]),
        ("s1+s2", [1.0, 0.36440677966101695, 0.000001]),
        ("d1", [0.5, 0.000001, 1.0]),
    ];
    for (id, want) in expected_norm {
        for (g, w) in norm(id).iter().zip(want) {
            close(*g, w, id);
        }
    }
    assert_eq!(norm("bible"), vec![1.0, 0.0, 1.0]);
    assert!(run.transforms[0].log_applied);
    assert!(!run.transforms[1].log_applied);

    let expected = [
        // G_ai, G_socio, G_digital, penalty, S
        [0.0056234132519034908, 1.0, 0.5, 1.0, 0.14114213030945876],
        [0.66417027299444944, 0.36440677966101695, 0.000001, 0.8, 0.0049855370444970045],
        [0.00011778216404713431, 0.000001, 1.0, 1.0, 0.00049018480332776069],
    ];
    for (i, want) in expected.iter().enumerate() {
        let g = &run.group_scores[i];
        close(g[&AiResources], want[0], "G_ai");
        close(g[&Socioeconomic], want[1], "G_socio");
        close(g[&DigitalInfrastructure], want[2], "G_digital");
        close(run.penalties[i], want[3], "penalty");
        let e = &run.result.entries[i];
        close(e.overall, want[4], "S");
        close(e.binary_penalty, want[3], "stored penalty");
        assert!(((run.result.reconstructed_overall(e) - e.overall) / e.overall).abs() <= 1e-12);
    }
    let ranks: Vec<usize> = run.result.entries.iter().map(|e| e.rank).collect();
    assert_eq!(ranks, vec![1, 2, 3]);
}

pub fn four_feature_group_score_matches_oracle() {
    let specs: Vec<FeatureSpec> = ["f1", "f2", "f3", "f4", "s", "d"]
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let g = match i {
                0..=3 => AiResources,
                4 => Socioeconomic,
                _ => DigitalInfrastructure,
            };
            spec(id, g, FeatureKind::Continuous, 1.0, LogTransform::Never)
        })
        .collect();
    let m = FeatureMatrix::from_rows(
        vec!["x".into()],
        specs,
        vec![[0.31, 0.77, 0.05, 0.93, 1.0, 1.0].iter().map(|&v| Some(v)).collect()],
    )
    .unwrap();
    let weights = WeightTable {
        weights: [("f1", 0.4), ("f2", 0.3), ("f3", 0.2), ("f4", 0.1), ("s", 1.0), ("d", 1.0)]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect(),
        merged: vec![],
    };
    let g = group_scores(&m, &weights).unwrap();
    assert!((g[0][&AiResources] - 0.31559796254809179).abs() < 1e-14);
}
