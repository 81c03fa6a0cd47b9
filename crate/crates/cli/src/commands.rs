use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate};
use equate_core::analysis::{
    diffusion_analysis, ols_analysis, pca_analysis, stepwise_analysis, zipf_analysis, ZipfSeries,
};
use equate_core::defaults::{bundled_config, bundled_features};
use equate_core::ingest::{build_bundle, inputs_from_files, read_input_dir, DatasetBundle, FileMap};
use equate_core::numfmt::fmt_sig12;
use equate_core::payload::{rankings_csv, rounded, to_body, Catalog, ClusterQuery, LanguagesQuery, StatsKind};
use equate_core::snapshot::{score_bundle, ApiSnapshot};
use equate_core::synth::{
    self, SynthConfig, BOUNDARIES_FILE, GEO_FILE, LANGUAGES_FILE, MANIFEST_DIR, REGISTRY_FILE,
    SNAPSHOTS_FILE, UNIVERSITIES_FILE,
};
use equate_core::{Error, FeatureSpec, IndexConfig};
use serde::Serialize;
use serde_json::json;

use crate::manifest::Recorder;
use crate::{ExportArgs, ExportWhat, FitArgs, FitKind, IndexArgs, IngestArgs, ServeArgs, SnapshotArgs, SynthArgs};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;
pub const EXIT_PIPELINE: u8 = 4;
pub const EXIT_ADDR_IN_USE: u8 = 5;

pub const BUNDLE_FILE: &str = "bundle.json";
pub const VALIDATION_FILE: &str = "validation.json";
pub const INDEX_CSV: &str = "index.csv";
pub const INDEX_JSON: &str = "index.json";
pub const IMPUTATION_CSV: &str = "imputation.csv";
pub const SNAPSHOT_FILE: &str = "snapshot.json";

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Display) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. }
            | Error::DuplicateKey { .. }
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_)
            | Error::EmptyInput(_) => EXIT_USAGE,
            Error::SpecMismatch(_)
            | Error::UnknownFeature(_)
            | Error::DuplicateFeature(_)
            | Error::InvalidConfig(_)
            | Error::NoBoundaries => EXIT_VALIDATION,
            _ => EXIT_PIPELINE,
        };
        CliError::new(code, e)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> CliResult {
    std::fs::create_dir_all(dir).map_err(|e| CliError::new(EXIT_USAGE, format!("{}: {e}", dir.display())))
}

fn io(e: std::io::Error) -> CliError {
    CliError::new(EXIT_USAGE, e)
}

fn pretty<T: Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("outputs serialize");
    out.push(b'\n');
    out
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load_config(path: Option<&Path>, rec: &mut Recorder) -> CliResult<IndexConfig> {
    match path {
        Some(p) => {
            let bytes = read(p)?;
            rec.config(&bytes);
            serde_json::from_slice(&bytes)
                .map_err(|e| CliError::new(EXIT_USAGE, format!("{}: {e}", p.display())))
        }
        None => {
            let cfg = bundled_config();
            rec.config(&serde_json::to_vec(&cfg).expect("config serializes"));
            Ok(cfg)
        }
    }
}

fn load_bundle(path: &Path, rec: &mut Recorder) -> CliResult<DatasetBundle> {
    let bytes = read(path)?;
    rec.input(&file_name(path), &bytes);
    DatasetBundle::from_json(&bytes).map_err(|e| CliError::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

pub fn synth(a: SynthArgs) -> CliResult {
    let cfg = SynthConfig {
        seed: a.seed,
        n_languages: a.n_languages,
        n_countries: a.n_countries,
        ..SynthConfig::default()
    };
    let files = synth::generate(&cfg)?;
    create_dir(&a.out)?;
    files.write_to(&a.out)?;
    eprintln!("wrote {} files to {}", files.files.len(), a.out.display());
    Ok(())
}

fn gather_inputs(a: &IngestArgs) -> CliResult<FileMap> {
    let mut files = match &a.input_dir {
        Some(dir) => read_input_dir(dir)?,
        None => FileMap::new(),
    };
    let single = [
        (REGISTRY_FILE, &a.registry),
        (SNAPSHOTS_FILE, &a.snapshots),
        (GEO_FILE, &a.geo),
        (LANGUAGES_FILE, &a.languages),
        (UNIVERSITIES_FILE, &a.universities),
        (BOUNDARIES_FILE, &a.boundaries),
    ];
    for (name, path) in single {
        if let Some(p) = path {
            files.insert(name.to_string(), read(p)?);
        }
    }
    if let Some(dir) = &a.manifests {
        let prefix = format!("{MANIFEST_DIR}/");
        files.retain(|k, _| !k.starts_with(&prefix));
        let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| CliError::new(EXIT_USAGE, format!("{}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
            .collect();
        entries.sort();
        for p in entries {
            files.insert(format!("{prefix}{}", file_name(&p)), read(&p)?);
        }
    }
    for required in [REGISTRY_FILE, SNAPSHOTS_FILE] {
        if !files.contains_key(required) {
            return Err(CliError::new(EXIT_USAGE, format!("missing input {required}")));
        }
    }
    Ok(files)
}

pub fn ingest(a: IngestArgs) -> CliResult {
    let mut rec = Recorder::new("ingest");
    let files = gather_inputs(&a)?;
    for (name, bytes) in &files {
        rec.input(name, bytes);
    }
    let features: Vec<FeatureSpec> = match &a.features {
        Some(p) => {
            let bytes = read(p)?;
            rec.config(&bytes);
            serde_json::from_slice(&bytes).map_err(|e| CliError::new(EXIT_USAGE, format!("{}: {e}", p.display())))?
        }
        None => bundled_features(),
    };
    let inputs = inputs_from_files(&files, features, a.faithful_extract)?;
    rec.stage("parse");
    let bundle = build_bundle(inputs)?;
    rec.stage("build");
    for w in &bundle.warnings {
        eprintln!("warning: {w}");
    }
    create_dir(&a.out)?;
    rec.output(&a.out, VALIDATION_FILE, &pretty(&bundle.validation)).map_err(io)?;
    if !bundle.validation.is_ok() {
        for issue in &bundle.validation.errors {
            eprintln!("invalid: {issue:?}");
        }
        rec.finish(&a.out).map_err(io)?;
        return Err(CliError::new(
            EXIT_VALIDATION,
            format!("{} validation errors; see {VALIDATION_FILE}", bundle.validation.errors.len()),
        ));
    }
    rec.output(&a.out, BUNDLE_FILE, &bundle.to_json()?).map_err(io)?;
    rec.finish(&a.out).map_err(io)?;
    eprintln!(
        "bundle: {} languages, {} excluded rows, {} warnings",
        bundle.records.len(),
        bundle.validation.excluded.len(),
        bundle.warnings.len()
    );
    Ok(())
}

pub fn index(a: IndexArgs) -> CliResult {
    let mut rec = Recorder::new("index");
    let cfg = load_config(a.config.as_deref(), &mut rec)?;
    let bundle = load_bundle(&a.bundle, &mut rec)?;
    rec.stage("load");
    let scored = score_bundle(&bundle, &cfg)?;
    rec.stage("score");
    create_dir(&a.out)?;
    let csv = rankings_csv(&scored.run.result, &bundle.records)?;
    rec.output(&a.out, INDEX_CSV, csv.as_bytes()).map_err(io)?;
    let doc = rounded(&json!({
        "initial_weights": scored.run.initial_weights,
        "weights": scored.run.weights,
        "transforms": scored.run.transforms,
        "result": scored.run.result,
    }));
    rec.output(&a.out, INDEX_JSON, &pretty(&doc)).map_err(io)?;
    let mut log = Vec::new();
    scored.log.write_csv(&mut log)?;
    rec.output(&a.out, IMPUTATION_CSV, &log).map_err(io)?;
    rec.finish(&a.out).map_err(io)?;
    Ok(())
}

fn csv_lines(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

fn zipf_rows<'a>(name: &'a str, s: &'a ZipfSeries) -> impl Iterator<Item = Vec<String>> + 'a {
    s.points
        .iter()
        .map(move |p| vec![name.to_string(), p.rank.to_string(), fmt_sig12(p.count), fmt_sig12(p.fitted)])
}

fn label<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

pub fn fit(a: FitArgs) -> CliResult {
    let mut rec = Recorder::new("fit");
    let bundle = load_bundle(&a.bundle, &mut rec)?;
    rec.stage("load");
    let imputed = || -> CliResult<_> {
        let mut r = Recorder::new("fit");
        let cfg = load_config(a.config.as_deref(), &mut r)?;
        Ok(score_bundle(&bundle, &cfg)?.imputed)
    };
    let name = format!("{:?}", a.kind).to_lowercase();
    let mut failure = None;
    let (doc, plot) = match a.kind {
        FitKind::Zipf => {
            let z = zipf_analysis(&bundle, a.year)?;
            let rows = zipf_rows("models", &z.models).chain(zipf_rows("datasets", &z.datasets));
            (rounded(&z), csv_lines("series,rank,count,fitted", rows))
        }
        FitKind::Ols => {
            let o = ols_analysis(&bundle, a.year)?;
            let rows = o.points.iter().map(|p| {
                vec![
                    p.glottocode.clone(),
                    p.n_speakers.to_string(),
                    p.n_models.to_string(),
                    fmt_sig12(p.fitted_log),
                    fmt_sig12(p.studentized_residual),
                    fmt_sig12(p.p_value),
                    label(&p.category),
                ]
            });
            let header = "glottocode,n_speakers,n_models,fitted_log,studentized_residual,p_value,category";
            (rounded(&o), csv_lines(header, rows))
        }
        FitKind::Gompertz => {
            let d = diffusion_analysis(&bundle.diffusion)?;
            if !d.fit.converged {
                failure = Some(CliError::new(EXIT_PIPELINE, "Gompertz fit did not converge; result written and flagged"));
            }
            let rows = d.points.iter().map(|p| {
                vec![p.date.to_string(), fmt_sig12(p.t_norm), fmt_sig12(p.s_t), fmt_sig12(p.fitted)]
            });
            (rounded(&d), csv_lines("date,t_norm,s_t,fitted", rows))
        }
        FitKind::Pca => {
            let p = pca_analysis(&imputed()?)?;
            let k = p.result.rotation.len();
            let mut header = String::from("variable");
            for j in 1..=k {
                header.push_str(&format!(",loading_{j}"));
            }
            for j in 1..=k {
                header.push_str(&format!(",rotated_{j}"));
            }
            let rows = p.variables.iter().enumerate().map(|(i, v)| {
                let mut row = vec![v.clone()];
                row.extend(p.result.loadings[i].iter().map(|x| fmt_sig12(*x)));
                row.extend(p.result.rotated_loadings[i].iter().map(|x| fmt_sig12(*x)));
                row
            });
            let plot = csv_lines(&header, rows);
            (rounded(&p), plot)
        }
        FitKind::Stepwise => {
            let s = stepwise_analysis(&bundle, &imputed()?)?;
            let start = vec!["0".into(), "start".into(), String::new(), fmt_sig12(s.result.bic_trace[0])];
            let steps = s.result.steps.iter().enumerate().map(|(i, st)| {
                vec![(i + 1).to_string(), label(&st.action), st.feature.clone(), fmt_sig12(st.bic)]
            });
            let plot = csv_lines("step,action,feature,bic", std::iter::once(start).chain(steps));
            (rounded(&s), plot)
        }
    };
    rec.stage("fit");
    create_dir(&a.out)?;
    rec.output(&a.out, &format!("{name}.json"), &pretty(&doc)).map_err(io)?;
    rec.output(&a.out, &format!("{name}.csv"), &plot).map_err(io)?;
    // One manifest per kind so fits can share an output directory.
    rec.finish_as(&a.out, &format!("{name}.manifest.json")).map_err(io)?;
    failure.map_or(Ok(()), Err)
}

fn default_built_at(bundle: &DatasetBundle) -> CliResult<String> {
    if let Ok(epoch) = std::env::var("SOURCE_DATE_EPOCH") {
        let secs: i64 = epoch
            .trim()
            .parse()
            .map_err(|_| CliError::new(EXIT_USAGE, format!("SOURCE_DATE_EPOCH `{epoch}` is not an integer")))?;
        let t = DateTime::from_timestamp(secs, 0)
            .ok_or_else(|| CliError::new(EXIT_USAGE, "SOURCE_DATE_EPOCH out of range"))?;
        return Ok(t.format("%Y-%m-%dT%H:%M:%SZ").to_string());
    }
    let newest: Option<NaiveDate> = bundle
        .yearly_counts
        .values()
        .filter_map(|s| s.date)
        .chain(bundle.diffusion.timestamps.last().copied())
        .max();
    Ok(newest.map_or_else(|| "1970-01-01T00:00:00Z".to_string(), |d| format!("{d}T00:00:00Z")))
}

pub fn snapshot(a: SnapshotArgs) -> CliResult {
    let mut rec = Recorder::new("snapshot");
    let cfg = load_config(a.config.as_deref(), &mut rec)?;
    let bundle = load_bundle(&a.bundle, &mut rec)?;
    rec.stage("load");
    let built_at = match a.built_at {
        Some(s) => {
            DateTime::parse_from_rfc3339(&s)
                .map_err(|e| CliError::new(EXIT_USAGE, format!("--built-at `{s}`: {e}")))?;
            s
        }
        None => default_built_at(&bundle)?,
    };
    let snap = ApiSnapshot::build(&bundle, &cfg, built_at)?;
    rec.stage("build");
    for (fit, err) in &snap.fits.errors {
        eprintln!("warning: {fit} fit skipped: {err}");
    }
    create_dir(&a.out)?;
    rec.output(&a.out, SNAPSHOT_FILE, &snap.to_json()?).map_err(io)?;
    rec.finish(&a.out).map_err(io)?;
    eprintln!("snapshot {} with {} languages", snap.build_id, snap.index_result.entries.len());
    Ok(())
}

fn load_catalog(path: &Path) -> CliResult<Catalog> {
    equate_service::load_catalog(path)
        .map_err(|e| CliError::new(EXIT_USAGE, format!("cannot load snapshot {}: {e}", path.display())))
}

pub fn serve(a: ServeArgs) -> CliResult {
    use std::sync::Arc;

    let catalog = load_catalog(&a.snapshot)?;
    let origins = if a.cors_origin.is_empty() {
        None
    } else {
        Some(
            a.cors_origin
                .iter()
                .map(|o| o.parse().map_err(|_| CliError::new(EXIT_USAGE, format!("bad CORS origin `{o}`"))))
                .collect::<CliResult<Vec<_>>>()?,
        )
    };
    let listener = std::net::TcpListener::bind(&a.addr).map_err(|e| {
        let code = if e.kind() == std::io::ErrorKind::AddrInUse {
            EXIT_ADDR_IN_USE
        } else {
            EXIT_USAGE
        };
        CliError::new(code, format!("cannot bind {}: {e}", a.addr))
    })?;
    listener.set_nonblocking(true).map_err(io)?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(io)?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::from_std(listener).map_err(io)?;
        eprintln!(
            "serving snapshot {} on http://{}",
            catalog.build_id(),
            listener.local_addr().map_err(io)?
        );
        let state = Arc::new(equate_service::AppState::new(Some(catalog)));
        spawn_reloader(state.clone(), a.snapshot.clone());
        let app = equate_service::router(state, origins);
        equate_service::serve(listener, app, async {
            tokio::signal::ctrl_c().await.ok();
        })
        .await
        .map_err(io)
    })
}

/// Reloads the snapshot file on SIGHUP; a file that fails to load leaves
/// the current snapshot in place.
#[cfg(unix)]
fn spawn_reloader(state: std::sync::Arc<equate_service::AppState>, path: PathBuf) {
    use tokio::signal::unix::{signal, SignalKind};
    tokio::spawn(async move {
        let Ok(mut hup) = signal(SignalKind::hangup()) else {
            return;
        };
        while hup.recv().await.is_some() {
            match equate_service::load_catalog(&path) {
                Ok(c) => {
                    let id = c.build_id().to_string();
                    state.swap(c);
                    eprintln!("reloaded snapshot {id}");
                }
                Err(e) => eprintln!("reload failed, keeping current snapshot: {e}"),
            }
        }
    });
}

#[cfg(not(unix))]
fn spawn_reloader(_: std::sync::Arc<equate_service::AppState>, _: PathBuf) {}

fn query_pairs(q: &str) -> Vec<(String, String)> {
    form_urlencoded::parse(q.trim_start_matches('?').as_bytes())
        .map(|(k, v)| (k.into_owned(), v.into_owned()))
        .collect()
}

/// The body the API would return for the same request.
pub fn export_body(catalog: &Catalog, what: ExportWhat, query: &str) -> CliResult<Vec<u8>> {
    let owned = query_pairs(query);
    let pairs = owned.iter().map(|(k, v)| (k.as_str(), v.as_str()));
    let bad = |e: equate_core::payload::QueryError| CliError::new(EXIT_USAGE, e);
    let stats = |kind: StatsKind| {
        catalog
            .stats(kind)
            .map(|v| to_body(&v))
            .ok_or_else(|| CliError::new(EXIT_PIPELINE, format!("{} fit is not in this snapshot", kind.as_str())))
    };
    match what {
        ExportWhat::Rankings => Ok(catalog.rankings_csv().into_bytes()),
        ExportWhat::Languages => Ok(to_body(&catalog.languages(&LanguagesQuery::from_pairs(pairs).map_err(bad)?))),
        ExportWhat::Clusters => Ok(to_body(&catalog.clusters(&ClusterQuery::from_pairs(pairs).map_err(bad)?))),
        ExportWhat::Zipf => stats(StatsKind::Zipf),
        ExportWhat::Diffusion => stats(StatsKind::Diffusion),
        ExportWhat::Ols => stats(StatsKind::Ols),
        ExportWhat::Pca => stats(StatsKind::Pca),
        ExportWhat::Openapi => Ok(equate_service::OPENAPI_JSON.as_bytes().to_vec()),
    }
}

pub fn export(a: ExportArgs) -> CliResult {
    let catalog = load_catalog(&a.snapshot)?;
    let body = export_body(&catalog, a.what, &a.query)?;
    if a.out.as_os_str() == "-" {
        std::io::stdout().write_all(&body).map_err(io)?;
    } else {
        if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
            create_dir(parent)?;
        }
        std::fs::write(&a.out, &body).map_err(io)?;
    }
    Ok(())
}
