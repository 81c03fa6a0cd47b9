//! Properties of the index pipeline, imputation, ranking and the
//! serialization round trips. Each check panics with the minimal failing
//! case; the generator seed is fixed so runs are reproducible.

use std::collections::BTreeMap;

use equate_core::impute::impute_all;
use equate_core::index::{run_index, IndexRun};
use equate_core::numfmt::{fmt_sig12, round_sig12};
use equate_core::{
    rank_and_tier, DevelopmentScore, FeatureGroup, FeatureKind, FeatureMatrix, FeatureSource,
    FeatureSpec, GeoAssignment, GeoLevel, IndexConfig, LogTransform, ScoredLanguage,
};
use proptest::prelude::*;
use proptest::test_runner::{RngAlgorithm, TestCaseError, TestRng, TestRunner};

fn check<S: Strategy>(
    config: ProptestConfig,
    strategy: &S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) {
    let config = ProptestConfig {
        failure_persistence: None,
        ..config
    };
    let mut runner =
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    if let Err(e) = runner.run(strategy, test) {
        panic!("{e}");
    }
}

fn spec(
    id: &str,
    group: FeatureGroup,
    kind: FeatureKind,
    weight: f64,
    log: LogTransform,
    level: GeoLevel,
) -> FeatureSpec {
    FeatureSpec {
        feature_id: id.into(),
        group,
        kind,
        geo_level: level,
        weight,
        log_transform: if kind == FeatureKind::Binary {
            LogTransform::Never
        } else {
            log
        },
        source: FeatureSource::LanguageTable,
        in_index: true,
    }
}

/// Column layout: a1 a2 bible | s1 s2 | d1 d2 | official
const LAYOUT: [(&str, FeatureGroup, FeatureKind); 8] = [
    ("a1", FeatureGroup::AiResources, FeatureKind::Continuous),
    ("a2", FeatureGroup::AiResources, FeatureKind::Continuous),
    ("bible", FeatureGroup::AiResources, FeatureKind::Binary),
    ("s1", FeatureGroup::Socioeconomic, FeatureKind::Continuous),
    ("s2", FeatureGroup::Socioeconomic, FeatureKind::Continuous),
    (
        "d1",
        FeatureGroup::DigitalInfrastructure,
        FeatureKind::Continuous,
    ),
    (
        "d2",
        FeatureGroup::DigitalInfrastructure,
        FeatureKind::Continuous,
    ),
    ("official", FeatureGroup::Socioeconomic, FeatureKind::Binary),
];

#[derive(Debug, Clone)]
struct Case {
    rows: Vec<Vec<f64>>,
    weights: Vec<f64>,
    logs: Vec<LogTransform>,
    speakers: Vec<u64>,
}

impl Case {
    fn specs(&self) -> Vec<FeatureSpec> {
        LAYOUT
            .iter()
            .enumerate()
            .map(|(c, &(id, g, k))| {
                spec(id, g, k, self.weights[c], self.logs[c], GeoLevel::Language)
            })
            .collect()
    }

    fn matrix(&self) -> FeatureMatrix {
        let langs = (0..self.rows.len()).map(|i| format!("l{i:03}")).collect();
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&v| Some(v)).collect())
            .collect();
        FeatureMatrix::from_rows(langs, self.specs(), rows).unwrap()
    }

    fn run(&self) -> IndexRun {
        run_index(&self.matrix(), &self.speakers, &IndexConfig::default()).unwrap()
    }
}

fn log_mode() -> impl Strategy<Value = LogTransform> {
    prop_oneof![
        Just(LogTransform::Auto),
        Just(LogTransform::Always),
        Just(LogTransform::Never)
    ]
}

fn case() -> impl Strategy<Value = Case> {
    (4usize..14).prop_flat_map(|n| {
        let row = LAYOUT
            .iter()
            .map(|&(_, _, k)| match k {
                FeatureKind::Binary => prop_oneof![Just(0.0), Just(1.0)].boxed(),
                FeatureKind::Continuous => (0.0f64..1000.0).boxed(),
            })
            .collect::<Vec<_>>();
        (
            prop::collection::vec(row, n),
            prop::collection::vec(0.05f64..1.0, LAYOUT.len()),
            prop::collection::vec(log_mode(), LAYOUT.len()),
            prop::collection::vec(0u64..10_000_000, n),
        )
            .prop_map(|(rows, weights, logs, speakers)| Case {
                rows,
                weights,
                logs,
                speakers,
            })
    })
}

fn score(run: &IndexRun, i: usize) -> f64 {
    run.result.entries[i].overall
}

/// Data-dependent choices (which columns merge, which get logged) that the
/// monotonicity statement holds fixed.
fn structure(run: &IndexRun) -> (Vec<String>, Vec<bool>) {
    (
        run.merged
            .specs
            .iter()
            .map(|s| s.feature_id.clone())
            .collect(),
        run.transforms.iter().map(|t| t.log_applied).collect(),
    )
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn raising_a_value_never_lowers_the_score() {
    check(
        ProptestConfig {
            cases: 1000,
            max_global_rejects: 20_000,
            ..ProptestConfig::default()
        },
        &(
            case(),
            any::<prop::sample::Index>(),
            prop::sample::select(vec![0usize, 1, 3, 4, 5, 6]),
            0.01f64..1.0,
        ),
        |(c, pick, col, frac)| {
            let i = pick.index(c.rows.len());
            let max = c.rows.iter().map(|r| r[col]).fold(f64::MIN, f64::max);
            prop_assume!(c.rows[i][col] < max);
            let before = c.run();
            let mut up = c.clone();
            // Stay below the column max so the upper normalization bound is fixed.
            up.rows[i][col] += frac * (max - c.rows[i][col]) * 0.999;
            let after = up.run();
            prop_assume!(structure(&before) == structure(&after));
            prop_assert!(
                score(&after, i) >= score(&before, i) * (1.0 - 1e-12),
                "{} -> {}",
                score(&before, i),
                score(&after, i)
            );
            Ok(())
        },
    );
}

pub fn scores_are_in_unit_interval() {
    check(ProptestConfig::with_cases(256), &case(), |c| {
        let run = c.run();
        for e in &run.result.entries {
            prop_assert!(e.overall > 0.0 && e.overall <= 1.0 + 1e-12, "{}", e.overall);
        }
        Ok(())
    });
}

pub fn flipping_a_binary_on_divides_by_one_minus_weight() {
    check(
        ProptestConfig::with_cases(256),
        &(
            case(),
            any::<prop::sample::Index>(),
            prop::sample::select(vec![2usize, 7]),
        ),
        |(c, pick, col)| {
            let i = pick.index(c.rows.len());
            let mut off = c.clone();
            off.rows[i][col] = 0.0;
            let mut on = c.clone();
            on.rows[i][col] = 1.0;
            let (r0, r1) = (off.run(), on.run());
            let w = r0.weights.get(LAYOUT[col].0).unwrap();
            prop_assert!(rel_close(score(&r1, i) * (1.0 - w), score(&r0, i), 1e-12));
            for j in (0..c.rows.len()).filter(|&j| j != i) {
                prop_assert!(rel_close(score(&r1, j), score(&r0, j), 1e-12));
            }
            Ok(())
        },
    );
}

pub fn scaling_a_groups_weights_leaves_group_scores() {
    check(
        ProptestConfig::with_cases(256),
        &(
            case(),
            0.01f64..100.0,
            prop::sample::select(FeatureGroup::ALL.to_vec()),
        ),
        |(c, factor, group)| {
            let mut scaled = c.clone();
            for (k, &(_, g, _)) in LAYOUT.iter().enumerate() {
                if g == group {
                    scaled.weights[k] *= factor;
                }
            }
            let (a, b) = (c.run(), scaled.run());
            prop_assume!(structure(&a) == structure(&b));
            for (ga, gb) in a.group_scores.iter().zip(&b.group_scores) {
                for g in FeatureGroup::ALL {
                    prop_assert!(rel_close(ga[&g], gb[&g], 1e-12));
                }
            }
            Ok(())
        },
    );
}

pub fn permuting_rows_permutes_entries() {
    check(
        ProptestConfig::with_cases(256),
        &(case(), any::<u64>()),
        |(c, seed)| {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let n = c.rows.len();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let base = c.matrix();
            let langs: Vec<String> = perm.iter().map(|&i| base.languages[i].clone()).collect();
            let rows: Vec<Vec<Option<f64>>> = perm
                .iter()
                .map(|&i| c.rows[i].iter().map(|&v| Some(v)).collect())
                .collect();
            let shuffled = FeatureMatrix::from_rows(langs, c.specs(), rows).unwrap();
            let speakers: Vec<u64> = perm.iter().map(|&i| c.speakers[i]).collect();
            let a = c.run();
            let b = run_index(&shuffled, &speakers, &IndexConfig::default()).unwrap();
            prop_assume!(structure(&a) == structure(&b));
            for (pos, &i) in perm.iter().enumerate() {
                let (ea, eb) = (&a.result.entries[i], &b.result.entries[pos]);
                prop_assert_eq!(&ea.glottocode, &eb.glottocode);
                prop_assert!(rel_close(ea.overall, eb.overall, 1e-12));
                prop_assert_eq!(ea.tier, eb.tier);
            }
            Ok(())
        },
    );
}

pub fn merging_equal_twins_keeps_group_scores() {
    check(
        ProptestConfig::with_cases(256),
        &(case(), 0.1f64..0.9),
        |(c, w_split)| {
            // Replace d1/d2 by two copies of d1 splitting d1's weight: the merge
            // must reproduce the single-column group score.
            let mut twins = c.clone();
            for r in &mut twins.rows {
                r[6] = r[5];
            }
            twins.logs[6] = twins.logs[5];
            let total = c.weights[5];
            twins.weights[5] = total * w_split;
            twins.weights[6] = total * (1.0 - w_split);
            let merged = twins.run();
            prop_assume!(merged.merged.specs.iter().any(|s| s.feature_id == "d1+d2"));

            let mut single = c.clone();
            single.weights[5] = total;
            let specs: Vec<FeatureSpec> = single
                .specs()
                .into_iter()
                .enumerate()
                .filter(|(k, _)| *k != 6)
                .map(|(_, s)| s)
                .collect();
            let rows = single
                .rows
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(k, _)| *k != 6)
                        .map(|(_, &v)| Some(v))
                        .collect()
                })
                .collect();
            let m = FeatureMatrix::from_rows(single.matrix().languages, specs, rows).unwrap();
            let one = run_index(&m, &c.speakers, &IndexConfig::default()).unwrap();
            let (ids, logs) = structure(&merged);
            let ids: Vec<String> = ids
                .into_iter()
                .map(|id| id.replace("d1+d2", "d1"))
                .collect();
            prop_assume!((ids, logs) == structure(&one));
            for (a, b) in merged.group_scores.iter().zip(&one.group_scores) {
                let g = FeatureGroup::DigitalInfrastructure;
                prop_assert!(rel_close(a[&g], b[&g], 1e-9), "{} vs {}", a[&g], b[&g]);
            }
            Ok(())
        },
    );
}

#[derive(Debug, Clone)]
struct World {
    matrix: FeatureMatrix,
    assignment: BTreeMap<String, GeoAssignment>,
    development: BTreeMap<String, DevelopmentScore>,
}

fn world() -> impl Strategy<Value = World> {
    let lang = (
        0usize..4,
        0usize..3,
        prop::collection::vec(prop::option::weighted(0.7, 0.0f64..100.0), 4),
    );
    (
        prop::collection::vec(lang, 6..30),
        // Fallback is always present so every target shares a metric with some donor.
        prop::collection::vec(
            (
                prop::option::of(0.3f64..0.95),
                (500.0f64..50_000.0).prop_map(Some),
            ),
            4,
        ),
    )
        .prop_filter_map("every column needs an observation", |(langs, dev)| {
            let specs = vec![
                spec(
                    "hdi",
                    FeatureGroup::Socioeconomic,
                    FeatureKind::Continuous,
                    1.0,
                    LogTransform::Never,
                    GeoLevel::Admin1,
                ),
                spec(
                    "lit",
                    FeatureGroup::Socioeconomic,
                    FeatureKind::Continuous,
                    1.0,
                    LogTransform::Never,
                    GeoLevel::Country,
                ),
                spec(
                    "wiki",
                    FeatureGroup::AiResources,
                    FeatureKind::Continuous,
                    1.0,
                    LogTransform::Never,
                    GeoLevel::Language,
                ),
                spec(
                    "bible",
                    FeatureGroup::AiResources,
                    FeatureKind::Binary,
                    1.0,
                    LogTransform::Never,
                    GeoLevel::Language,
                ),
            ];
            let codes: Vec<String> = (0..langs.len()).map(|i| format!("g{i:03}")).collect();
            let rows: Vec<Vec<Option<f64>>> = langs
                .iter()
                .map(|(_, _, v)| {
                    vec![
                        v[0],
                        v[1],
                        v[2],
                        v[3].map(|x| if x > 50.0 { 1.0 } else { 0.0 }),
                    ]
                })
                .collect();
            for c in 0..3 {
                if rows.iter().all(|r| r[c].is_none()) {
                    return None;
                }
            }
            let assignment: BTreeMap<String, GeoAssignment> = langs
                .iter()
                .zip(&codes)
                .map(|((country, region, _), code)| {
                    (
                        code.clone(),
                        GeoAssignment {
                            country: format!("C{country}"),
                            admin1: Some(format!("C{country}-{region}")),
                        },
                    )
                })
                .collect();
            let development: BTreeMap<String, DevelopmentScore> = dev
                .iter()
                .enumerate()
                .map(|(k, &(primary, fallback))| {
                    (format!("C{k}"), DevelopmentScore { primary, fallback })
                })
                .collect();
            let matrix = FeatureMatrix::from_rows(codes, specs, rows).ok()?;
            Some(World {
                matrix,
                assignment,
                development,
            })
        })
}

pub fn imputation_is_idempotent() {
    check(ProptestConfig::with_cases(512), &world(), |w| {
        let (once, log) = impute_all(&w.matrix, &w.assignment, &w.development).unwrap();
        prop_assert!(once.is_dense());
        let (twice, log2) = impute_all(&once, &w.assignment, &w.development).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert!(log2.is_empty());
        prop_assert_eq!(log.len(), w.matrix.missing_count());
        Ok(())
    });
}

pub fn imputation_preserves_observed_cells() {
    check(ProptestConfig::with_cases(512), &world(), |w| {
        let (out, log) = impute_all(&w.matrix, &w.assignment, &w.development).unwrap();
        for r in 0..w.matrix.n_rows() {
            for c in 0..w.matrix.n_cols() {
                match w.matrix.get(r, c) {
                    Some(v) => {
                        prop_assert_eq!(out.get(r, c), Some(v));
                        prop_assert!(log
                            .find(&w.matrix.languages[r], &w.matrix.specs[c].feature_id)
                            .is_none());
                    }
                    None => prop_assert!(log
                        .find(&w.matrix.languages[r], &w.matrix.specs[c].feature_id)
                        .is_some()),
                }
            }
        }
        Ok(())
    });
}

pub fn ranks_are_a_bijection() {
    check(
        ProptestConfig::with_cases(512),
        &(
            prop::collection::vec((0u8..20, 0u64..5), 1..200),
            prop::sample::select(vec![vec![0.5], vec![0.25, 0.5, 0.75], vec![0.1, 0.9]]),
        ),
        |(scores, quantiles)| {
            // Coarse scores force plenty of ties.
            let langs: Vec<ScoredLanguage> = scores
                .iter()
                .enumerate()
                .map(|(i, &(s, sp))| ScoredLanguage {
                    glottocode: format!("x{i:04}"),
                    score: f64::from(s) / 20.0,
                    n_speakers: sp,
                })
                .collect();
            let placed = rank_and_tier(&langs, &quantiles).unwrap();
            let mut ranks: Vec<usize> = placed.values().map(|p| p.rank).collect();
            ranks.sort_unstable();
            prop_assert_eq!(ranks, (1..=langs.len()).collect::<Vec<_>>());
            let mut by_rank: Vec<(usize, &ScoredLanguage)> = langs
                .iter()
                .map(|l| (placed[&l.glottocode].rank, l))
                .collect();
            by_rank.sort_by_key(|(r, _)| *r);
            for w in by_rank.windows(2) {
                let (a, b) = (w[0].1, w[1].1);
                prop_assert!(
                    a.score > b.score
                        || (a.score == b.score
                            && (a.n_speakers, &b.glottocode) >= (b.n_speakers, &a.glottocode))
                );
                prop_assert!(placed[&a.glottocode].tier.0 <= placed[&b.glottocode].tier.0);
                if a.score == b.score {
                    prop_assert_eq!(placed[&a.glottocode].tier, placed[&b.glottocode].tier);
                }
            }
            let max_tier = placed.values().map(|p| p.tier.0).max().unwrap();
            prop_assert!(usize::from(max_tier) <= quantiles.len() + 1);
            Ok(())
        },
    );
}

pub fn twelve_digit_formatting_round_trips() {
    check(
        ProptestConfig::with_cases(512),
        &(prop::num::f64::NORMAL | prop::num::f64::ZERO),
        |x| {
            let r = round_sig12(x);
            prop_assert_eq!(round_sig12(r), r);
            prop_assert_eq!(fmt_sig12(x).parse::<f64>().unwrap(), r);
            if x != 0.0 {
                prop_assert!(((r - x) / x).abs() <= 5e-12);
            }
            Ok(())
        },
    );
}

fn record() -> impl Strategy<Value = equate_core::LanguageRecord> {
    use equate_core::{LanguageRecord, Macroarea, Vitality};
    let vit = prop::sample::select(vec![
        Vitality::NotEndangered,
        Vitality::Threatened,
        Vitality::Shifting,
        Vitality::Moribund,
        Vitality::NearlyExtinct,
        Vitality::Extinct,
    ]);
    (
        (
            "[a-z]{4}[0-9]{4}",
            prop::option::of("[a-z]{3}"),
            "[A-Za-z]([A-Za-z ,'\"-]{0,12}[A-Za-z])?",
            -90.0f64..=90.0,
            -180.0f64..=180.0,
            prop::sample::select(Macroarea::ALL.to_vec()),
        ),
        (
            "[A-Z][a-z]{2,8}",
            "[A-Z]{2}",
            prop::option::of("[A-Z]{2}-[A-Z0-9]{1,3}"),
            any::<u64>(),
            vit,
            any::<bool>(),
            any::<bool>(),
        ),
    )
        .prop_map(
            |(
                (code, iso, name, lat, lon, macroarea),
                (family, country, admin1, n, vitality, inst, dead),
            )| {
                LanguageRecord {
                    glottocode: code,
                    iso639_3: iso,
                    name,
                    centroid_lat: lat,
                    centroid_lon: lon,
                    macroarea,
                    family,
                    primary_country: country,
                    admin1,
                    n_speakers: n,
                    vitality,
                    institutional: inst,
                    is_dead: dead,
                }
            },
        )
}

pub fn registry_csv_round_trips() {
    check(
        ProptestConfig::with_cases(256),
        &prop::collection::vec(record(), 0..30),
        |recs| {
            use equate_core::ingest::registry::{parse_registry, write_registry};
            let mut buf = Vec::new();
            write_registry(&recs, &mut buf).unwrap();
            let (back, _) = parse_registry(&buf).unwrap();
            prop_assert_eq!(back, recs);
            Ok(())
        },
    );
}

pub fn snapshot_csv_round_trips() {
    check(
        ProptestConfig::with_cases(256),
        &prop::collection::btree_map(
            (0i32..3000, "[a-z]{3}|[a-z]{4}[0-9]{4}"),
            (any::<u64>(), any::<u64>()),
            0..40,
        ),
        |rows| {
            use equate_core::ingest::snapshot::{parse_snapshot, write_snapshot, SnapshotRow};
            let start = chrono::NaiveDate::from_ymd_opt(2018, 1, 1).unwrap();
            let rows: Vec<SnapshotRow> = rows
                .into_iter()
                .map(|((day, code), (m, d))| SnapshotRow {
                    snapshot_date: start + chrono::Days::new(day as u64),
                    language_code: code,
                    n_models: m,
                    n_datasets: d,
                })
                .collect();
            let mut buf = Vec::new();
            write_snapshot(&rows, &mut buf).unwrap();
            let back = parse_snapshot(&buf).unwrap();
            prop_assert_eq!(back, rows);
            Ok(())
        },
    );
}

pub fn bundle_json_round_trips() {
    check(ProptestConfig::with_cases(12), &any::<u64>(), |seed| {
        use equate_core::defaults::bundled_features;
        use equate_core::ingest::{build_bundle, inputs_from_files, DatasetBundle};
        use equate_core::synth::{generate, SynthConfig};
        let cfg = SynthConfig {
            seed,
            n_languages: 60,
            n_countries: 6,
            ..SynthConfig::default()
        };
        let files = generate(&cfg).unwrap();
        let bundle =
            build_bundle(inputs_from_files(&files.files, bundled_features(), false).unwrap())
                .unwrap();
        let bytes = bundle.to_json().unwrap();
        let back = DatasetBundle::from_json(&bytes).unwrap();
        prop_assert_eq!(&back, &bundle);
        prop_assert_eq!(back.to_json().unwrap(), bytes);
        Ok(())
    });
}

pub const ALL: [(&str, fn()); 13] = [
    ("monotonicity", raising_a_value_never_lowers_the_score),
    ("score bounds", scores_are_in_unit_interval),
    ("binary penalty factor", flipping_a_binary_on_divides_by_one_minus_weight),
    ("weight scaling", scaling_a_groups_weights_leaves_group_scores),
    ("permutation equivariance", permuting_rows_permutes_entries),
    ("equal-column merge", merging_equal_twins_keeps_group_scores),
    ("idempotent imputation", imputation_is_idempotent),
    ("observed cells preserved", imputation_preserves_observed_cells),
    ("rank bijection", ranks_are_a_bijection),
    ("12-digit formatting", twelve_digit_formatting_round_trips),
    ("registry csv round trip", registry_csv_round_trips),
    ("snapshot csv round trip", snapshot_csv_round_trips),
    ("bundle json round trip", bundle_json_round_trips),
];
