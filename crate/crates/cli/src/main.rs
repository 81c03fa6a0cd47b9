mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Language AI-readiness index: ingest, score, fit, snapshot, serve.
#[derive(Debug, Parser)]
#[command(name = "equate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a deterministic synthetic input set.
    Synth(SynthArgs),
    /// Parse and validate input files into a dataset bundle.
    Ingest(IngestArgs),
    /// Impute missing values and compute the index.
    Index(IndexArgs),
    /// Fit one exploratory model.
    Fit(FitArgs),
    /// Build the immutable snapshot served by the API.
    Snapshot(SnapshotArgs),
    /// Serve a snapshot over HTTP.
    Serve(ServeArgs),
    /// Write an API payload to a file.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, env = "EQUATE_OUT")]
    out: PathBuf,
    #[arg(long, env = "EQUATE_SEED", default_value_t = 2024)]
    seed: u64,
    #[arg(long, env = "EQUATE_N_LANGUAGES", default_value_t = 6003)]
    n_languages: usize,
    #[arg(long, env = "EQUATE_N_COUNTRIES", default_value_t = 150)]
    n_countries: usize,
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Directory holding inputs under their standard names; the per-file
    /// flags below override individual entries.
    #[arg(long, env = "EQUATE_INPUT_DIR")]
    input_dir: Option<PathBuf>,
    #[arg(long, env = "EQUATE_REGISTRY")]
    registry: Option<PathBuf>,
    #[arg(long, env = "EQUATE_SNAPSHOTS")]
    snapshots: Option<PathBuf>,
    #[arg(long, env = "EQUATE_GEO")]
    geo: Option<PathBuf>,
    #[arg(long, env = "EQUATE_LANGUAGES")]
    languages: Option<PathBuf>,
    #[arg(long, env = "EQUATE_UNIVERSITIES")]
    universities: Option<PathBuf>,
    /// Directory of coverage manifest JSON files.
    #[arg(long, env = "EQUATE_MANIFESTS")]
    manifests: Option<PathBuf>,
    #[arg(long, env = "EQUATE_BOUNDARIES")]
    boundaries: Option<PathBuf>,
    /// Feature manifest JSON; defaults to the bundled one.
    #[arg(long, env = "EQUATE_FEATURES")]
    features: Option<PathBuf>,
    /// Mark the bundle as a faithful extract of the original sources.
    #[arg(long, env = "EQUATE_FAITHFUL_EXTRACT")]
    faithful_extract: bool,
    #[arg(long, env = "EQUATE_OUT")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct IndexArgs {
    #[arg(long, env = "EQUATE_BUNDLE")]
    bundle: PathBuf,
    /// Index configuration JSON; defaults to the bundled one.
    #[arg(long, env = "EQUATE_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, env = "EQUATE_OUT")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FitKind {
    Zipf,
    Ols,
    Gompertz,
    Pca,
    Stepwise,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long, env = "EQUATE_BUNDLE")]
    bundle: PathBuf,
    #[arg(long, value_enum)]
    kind: FitKind,
    /// Snapshot year for zipf and ols; defaults to the latest.
    #[arg(long)]
    year: Option<i32>,
    /// Used for the imputation that pca and stepwise need.
    #[arg(long, env = "EQUATE_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, env = "EQUATE_OUT")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SnapshotArgs {
    #[arg(long, env = "EQUATE_BUNDLE")]
    bundle: PathBuf,
    #[arg(long, env = "EQUATE_CONFIG")]
    config: Option<PathBuf>,
    /// RFC 3339 timestamp; defaults to SOURCE_DATE_EPOCH, then to the
    /// newest date in the data.
    #[arg(long, env = "EQUATE_BUILT_AT")]
    built_at: Option<String>,
    #[arg(long, env = "EQUATE_OUT")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, env = "EQUATE_SNAPSHOT")]
    snapshot: PathBuf,
    #[arg(long, env = "EQUATE_ADDR", default_value = "127.0.0.1:8080")]
    addr: String,
    /// Allowed CORS origin; repeatable. Any origin when omitted.
    #[arg(long = "cors-origin", env = "EQUATE_CORS_ORIGIN", value_delimiter = ',')]
    cors_origin: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportWhat {
    Rankings,
    Languages,
    Clusters,
    Zipf,
    Diffusion,
    Ols,
    Pca,
    Openapi,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long, env = "EQUATE_SNAPSHOT")]
    snapshot: PathBuf,
    #[arg(long, value_enum)]
    what: ExportWhat,
    /// Query string for `languages` and `clusters`, as sent to the API.
    #[arg(long, default_value = "")]
    query: String,
    /// Output file; `-` writes to stdout.
    #[arg(long, env = "EQUATE_OUT")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Ingest(a) => commands::ingest(a),
        Command::Index(a) => commands::index(a),
        Command::Fit(a) => commands::fit(a),
        Command::Snapshot(a) => commands::snapshot(a),
        Command::Serve(a) => commands::serve(a),
        Command::Export(a) => commands::export(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
