use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use log::info;
use manifold_quant::geometry::{images_from_raw, to_csv};
use manifold_quant::intrinsic_dim::IdMethod;
use manifold_quant::persistence::{diagrams_from_csv, diagrams_to_csv};
use manifold_quant::prelude::*;
use manifold_quant::tracker::{
    natural_cmp, read_manifest, report_to_csv, report_to_json, CONFIG_HASH_ALGORITHM,
};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "mfq",
    about = "Topology and intrinsic dimension of point clouds"
)]
struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a synthetic shape.
    Synth(SynthArgs),
    /// Persistence diagrams of a cloud's Rips filtration.
    Ph(PhArgs),
    /// Intrinsic dimension of a cloud.
    Id(IdArgs),
    /// Summaries of diagrams, and distances between two diagram files.
    Metrics(MetricsArgs),
    /// Metric trajectory of snapshot clouds against a reference cloud.
    Track(TrackArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Point cloud: CSV or packed binary (detected from the content).
    #[arg(long)]
    input: PathBuf,

    /// Read the input as a raw byte tensor of images with this shape, e.g. 32x32x3.
    #[arg(long, value_name = "HxWxC")]
    image_shape: Option<String>,

    /// Pixel scaling for raw image input: none | minus-one-to-one.
    #[arg(long, default_value = "none")]
    pixel_scale: PixelScale,

    /// Draw this many points before analysis.
    #[arg(long)]
    subsample: Option<usize>,

    /// Seed for subsampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// circle | sphere | torus | swiss-roll | uniform-cube | gaussian-blob
    #[arg(long)]
    kind: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Standard deviation of Gaussian noise added to every coordinate.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Dimension for uniform-cube and gaussian-blob.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Output file; CSV on stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | packed (default: from the file extension).
    #[arg(long)]
    format: Option<CloudFormat>,
}

#[derive(Args, Debug)]
struct PhArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Highest simplex dimension (1..=3); diagrams cover dims below it.
    #[arg(long, default_value_t = 2)]
    max_dim: usize,
    /// Filtration threshold, or "auto" for the cloud diameter.
    #[arg(long, default_value = "auto")]
    eps_max: EpsMax,
    /// euclidean | manhattan | chebyshev
    #[arg(long, default_value = "euclidean")]
    metric: Metric,
    /// Diagram CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the filtration, one simplex per line.
    #[arg(long)]
    dump_filtration: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IdArgs {
    #[command(flatten)]
    input: InputArgs,
    /// two-nn-mle | two-nn-fit | box-count
    #[arg(long, default_value = "two-nn-mle")]
    method: IdMethod,
    #[arg(long, default_value_t = 0.1)]
    discard_fraction: f64,
    #[arg(long, default_value_t = 5)]
    n_scales: usize,
    #[arg(long, default_value_t = 0.5)]
    scale_decay: f64,
    /// JSON output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyArg {
    Exclude,
    Cap,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    /// Diagram CSV as written by `ph`.
    #[arg(long)]
    diagrams: PathBuf,
    /// Second diagram CSV; adds per-dimension distances.
    #[arg(long)]
    against: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, value_enum, default_value = "exclude")]
    infinite_policy: PolicyArg,
    /// Cap for infinite deaths; required with --infinite-policy cap.
    #[arg(long)]
    eps_max: Option<f64>,
    /// JSON output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrackArgs {
    /// Glob pattern (natural order) or manifest file (one path per line).
    #[arg(long)]
    snapshots: String,
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    subsample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    max_dim: usize,
    #[arg(long, default_value = "auto")]
    eps_max: EpsMax,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, value_enum, default_value = "exclude")]
    infinite_policy: PolicyArg,
    #[arg(long, default_value_t = 0.1)]
    discard_fraction: f64,
    #[arg(long, default_value = "euclidean")]
    metric: Metric,
    /// CSV report; stdout when neither --out nor --json is given.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn version() -> String {
    format!(
        "{} (config-hash {CONFIG_HASH_ALGORITHM})",
        env!("CARGO_PKG_VERSION")
    )
}

fn main() -> ExitCode {
    let matches = match Cli::command().version(version()).try_get_matches() {
        Ok(m) => m,
        Err(e) => return usage_exit(e),
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => return usage_exit(e),
    };

    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            return data_exit(&Error::Parameter(format!("thread pool: {e}")));
        }
    }

    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Ph(a) => ph(a),
        Command::Id(a) => id(a),
        Command::Metrics(a) => metrics(a),
        Command::Track(a) => track_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => data_exit(&e),
    }
}

fn usage_exit(e: clap::Error) -> ExitCode {
    use clap::error::ErrorKind;
    let _ = e.print();
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
        _ => ExitCode::from(1),
    }
}

fn data_exit(e: &Error) -> ExitCode {
    let msg = json!({ "error": e.kind(), "message": e.to_string() });
    eprintln!("{msg}");
    ExitCode::from(2)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_error(path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_error(Path::new("<stdout>"), e)),
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn load_input(a: &InputArgs) -> Result<PointCloud> {
    let pc = match &a.image_shape {
        Some(shape) => {
            let [h, w, c] = parse_shape(shape)?;
            let bytes = std::fs::read(&a.input).map_err(|e| io_error(&a.input, e))?;
            flatten_images(&images_from_raw(&bytes, h, w, c)?, a.pixel_scale)?
        }
        None => load_pointcloud_auto(&a.input)?,
    };
    info!(
        "loaded {} points in {} dimensions from {}",
        pc.len(),
        pc.dim(),
        a.input.display()
    );
    match a.subsample {
        Some(m) => subsample(&pc, m, a.seed),
        None => Ok(pc),
    }
}

fn parse_shape(s: &str) -> Result<[usize; 3]> {
    let parts: Vec<usize> = s
        .split('x')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parameter(format!("image shape must look like 32x32x3, got {s:?}")))?;
    <[usize; 3]>::try_from(parts)
        .map_err(|_| Error::Parameter(format!("image shape must have three factors, got {s:?}")))
}

fn synth(a: SynthArgs) -> Result<()> {
    let kind = ShapeKind::parse(&a.kind, a.dim)?;
    let pc = generate(&ShapeSpec::new(kind, a.n, a.seed).with_noise(a.noise))?;
    match a.out {
        Some(path) => {
            let format = a
                .format
                .unwrap_or_else(|| CloudFormat::from_extension(&path));
            save_pointcloud(&pc, &path, format)
        }
        None => emit(&to_csv(&pc), None),
    }
}

fn ph(a: PhArgs) -> Result<()> {
    let pc = load_input(&a.input)?;
    let start = Instant::now();
    let dm = pairwise_distances(&pc, a.metric);
    let f = build_rips(&dm, a.max_dim, a.eps_max)?;
    info!(
        "filtration: {:?} simplices by dimension, eps_max {}",
        f.counts_by_dim(),
        f.eps_max()
    );
    if let Some(path) = &a.dump_filtration {
        f.write_dump(path)?;
    }
    let diagrams = compute_persistence(&f)?;
    info!("persistence done in {:.2?}", start.elapsed());
    emit(&diagrams_to_csv(&diagrams), a.out.as_deref())
}

fn id(a: IdArgs) -> Result<()> {
    let pc = load_input(&a.input)?;
    let est = match a.method {
        IdMethod::TwoNnMle => estimate_id_2nn(&pc, a.discard_fraction, TwoNnMethod::Mle)?,
        IdMethod::TwoNnFit => estimate_id_2nn(&pc, a.discard_fraction, TwoNnMethod::Fit)?,
        IdMethod::BoxCount => estimate_id_boxcount(&pc, a.n_scales, a.scale_decay)?,
    };
    let mut text = serde_json::to_string_pretty(&est)?;
    text.push('\n');
    emit(&text, a.out.as_deref())
}

fn read_diagrams(path: &Path) -> Result<Vec<PersistenceDiagram>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    diagrams_from_csv(&text, 1).map_err(|e| Error::File {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

fn metrics(a: MetricsArgs) -> Result<()> {
    let policy = match a.infinite_policy {
        PolicyArg::Exclude => InfinitePolicy::Excluded,
        PolicyArg::Cap => InfinitePolicy::capped(a.eps_max)?,
    };
    let mut diagrams = read_diagrams(&a.diagrams)?;
    let summaries = diagrams
        .iter()
        .map(|d| summarize(d, a.p, policy))
        .collect::<Result<Vec<_>>>()?;
    let mut doc = json!({ "summaries": summaries });

    if let Some(other_path) = &a.against {
        let mut other = read_diagrams(other_path)?;
        let dims = diagrams.len().max(other.len());
        diagrams.extend((diagrams.len()..dims).map(PersistenceDiagram::empty));
        other.extend((other.len()..dims).map(PersistenceDiagram::empty));
        let distances = diagrams
            .iter()
            .zip(&other)
            .map(|(x, y)| {
                Ok(json!({
                    "dim": x.dim(),
                    "wasserstein": { "p": a.p, "value": wasserstein(x, y, a.p, policy)? },
                    "bottleneck": bottleneck(x, y, policy)?,
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        doc["distances"] = json!(distances);
    }
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    emit(&text, a.out.as_deref())
}

fn has_glob_syntax(s: &str) -> bool {
    s.contains(['*', '?', '['])
}

fn snapshot_paths(source: &str) -> Result<Vec<PathBuf>> {
    let paths = if has_glob_syntax(source) {
        let pattern = glob::glob(source)
            .map_err(|e| Error::Parameter(format!("bad snapshot pattern {source:?}: {e}")))?;
        let mut paths = pattern
            .map(|entry| {
                entry.map_err(|e| {
                    let path = e.path().to_path_buf();
                    io_error(&path, e.into())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        paths.sort_by(|a, b| natural_cmp(&a.to_string_lossy(), &b.to_string_lossy()));
        paths
    } else {
        read_manifest(Path::new(source))?
    };
    if paths.is_empty() {
        return Err(Error::EmptyInput(format!("no snapshots match {source:?}")));
    }
    Ok(paths)
}

fn track_cmd(a: TrackArgs) -> Result<()> {
    let paths = snapshot_paths(&a.snapshots)?;
    info!(
        "tracking {} snapshots against {}",
        paths.len(),
        a.reference.display()
    );
    let cfg = AnalysisConfig {
        subsample: a.subsample,
        seed: a.seed,
        max_dim: a.max_dim,
        eps_max: a.eps_max,
        p: a.p,
        infinite_policy: match a.infinite_policy {
            PolicyArg::Exclude => PolicyKind::Exclude,
            PolicyArg::Cap => PolicyKind::Cap,
        },
        discard_fraction: a.discard_fraction,
        metric: a.metric,
    };
    let start = Instant::now();
    let report = track(&paths, &a.reference, &cfg)?;
    info!(
        "config hash {}, done in {:.2?}",
        report.config_hash,
        start.elapsed()
    );

    // Render everything before touching the filesystem.
    let csv = report_to_csv(&report);
    let json_text = match &a.json {
        Some(_) => Some(report_to_json(&report)?),
        None => None,
    };
    if a.out.is_none() && a.json.is_none() {
        return emit(&csv, None);
    }
    if let Some(path) = &a.out {
        emit(&csv, Some(path))?;
    }
    if let (Some(path), Some(text)) = (&a.json, json_text) {
        emit(&text, Some(path))?;
    }
    Ok(())
}
