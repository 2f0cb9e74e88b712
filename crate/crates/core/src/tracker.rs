//! Metric trajectories across a series of point-cloud snapshots.
//!
//! Every snapshot and the reference are analysed under one [`AnalysisConfig`]:
//! subsample, distances, Rips filtration, persistence, diagram summaries, and
//! a 2NN estimate on the same subsample. The report holds each snapshot's
//! [`MetricVector`] and its absolute gaps to the reference.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{load_pointcloud_auto, pairwise_distances, subsample, Metric, PointCloud};
use crate::intrinsic_dim::{estimate_id_2nn, TwoNnMethod};
use crate::metrics::{
    bottleneck_to_trivial, persistence_entropy, wasserstein_to_trivial, InfinitePolicy,
};
use crate::numfmt::format_real;
use crate::persistence::compute_persistence;
use crate::rips::{build_rips, EpsMax};

/// Identifier of the digest behind [`AnalysisConfig::hash`].
pub const CONFIG_HASH_ALGORITHM: &str = "sha256";

/// Homology dimensions that get report columns.
pub const REPORT_DIMS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    #[default]
    Exclude,
    /// Cap infinite deaths at the filtration's eps_max.
    Cap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// Points drawn from every cloud; `None` uses whole clouds.
    pub subsample: Option<usize>,
    pub seed: u64,
    /// Highest simplex dimension; diagrams cover `0..max_dim`.
    pub max_dim: usize,
    pub eps_max: EpsMax,
    pub p: f64,
    pub infinite_policy: PolicyKind,
    pub discard_fraction: f64,
    pub metric: Metric,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            subsample: None,
            seed: 0,
            max_dim: 2,
            eps_max: EpsMax::Auto,
            p: 2.0,
            infinite_policy: PolicyKind::Exclude,
            discard_fraction: 0.1,
            metric: Metric::Euclidean,
        }
    }
}

impl AnalysisConfig {
    /// Hex SHA-256 of the canonical JSON encoding of every field.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub id_2nn: f64,
    /// Indexed by homology dimension, `0..max_dim`.
    pub entropy: Vec<f64>,
    pub wasserstein_p: f64,
    pub wasserstein_to_trivial: Vec<f64>,
    pub bottleneck_to_trivial: Vec<f64>,
    pub n_points_used: usize,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricGaps {
    pub id_2nn: f64,
    pub entropy: Vec<f64>,
    pub wasserstein_to_trivial: Vec<f64>,
    pub bottleneck_to_trivial: Vec<f64>,
}

impl MetricGaps {
    pub fn between(generated: &MetricVector, reference: &MetricVector) -> Self {
        let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
        Self {
            id_2nn: (generated.id_2nn - reference.id_2nn).abs(),
            entropy: diff(&generated.entropy, &reference.entropy),
            wasserstein_to_trivial: diff(
                &generated.wasserstein_to_trivial,
                &reference.wasserstein_to_trivial,
            ),
            bottleneck_to_trivial: diff(
                &generated.bottleneck_to_trivial,
                &reference.bottleneck_to_trivial,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub label: String,
    pub metrics: MetricVector,
    pub gaps: MetricGaps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config: AnalysisConfig,
    pub config_hash: String,
    pub reference_label: String,
    pub reference: MetricVector,
    pub snapshots: Vec<Snapshot>,
}

pub fn analyze_snapshot(pc: &PointCloud, cfg: &AnalysisConfig) -> Result<MetricVector> {
    let cloud = match cfg.subsample {
        Some(m) => subsample(pc, m, cfg.seed)?,
        None => pc.clone(),
    };
    let dm = pairwise_distances(&cloud, cfg.metric);
    let filtration = build_rips(&dm, cfg.max_dim, cfg.eps_max)?;
    let diagrams = compute_persistence(&filtration)?;
    let policy = match cfg.infinite_policy {
        PolicyKind::Exclude => InfinitePolicy::Excluded,
        PolicyKind::Cap => InfinitePolicy::capped(Some(filtration.eps_max()))?,
    };

    let mut entropy = Vec::with_capacity(diagrams.len());
    let mut wasserstein = Vec::with_capacity(diagrams.len());
    let mut bottleneck = Vec::with_capacity(diagrams.len());
    for d in &diagrams {
        entropy.push(persistence_entropy(d, policy)?);
        wasserstein.push(wasserstein_to_trivial(d, cfg.p, policy)?);
        bottleneck.push(bottleneck_to_trivial(d, policy)?);
    }
    let id = estimate_id_2nn(&cloud, cfg.discard_fraction, TwoNnMethod::Mle)?;

    Ok(MetricVector {
        id_2nn: id.value,
        entropy,
        wasserstein_p: cfg.p,
        wasserstein_to_trivial: wasserstein,
        bottleneck_to_trivial: bottleneck,
        n_points_used: cloud.len(),
        config_hash: cfg.hash(),
    })
}

fn analyze_labeled(label: &str, pc: &PointCloud, cfg: &AnalysisConfig) -> Result<MetricVector> {
    analyze_snapshot(pc, cfg).map_err(|e| Error::Snapshot {
        label: label.to_string(),
        source: Box::new(e),
    })
}

/// Analyses in-memory clouds. Snapshots run in parallel; the report keeps
/// input order. Any failure aborts the whole run.
pub fn track_clouds(
    snapshots: &[(String, PointCloud)],
    reference: (&str, &PointCloud),
    cfg: &AnalysisConfig,
) -> Result<ConvergenceReport> {
    if snapshots.is_empty() {
        return Err(Error::EmptyInput("no snapshots to track".into()));
    }
    let dim = reference.1.dim();
    if let Some((label, pc)) = snapshots.iter().find(|(_, pc)| pc.dim() != dim) {
        return Err(Error::Shape(format!(
            "snapshot {label} has ambient dimension {}, reference has {dim}",
            pc.dim()
        )));
    }

    let reference_metrics = analyze_labeled(reference.0, reference.1, cfg)?;
    let metrics: Vec<MetricVector> = snapshots
        .par_iter()
        .map(|(label, pc)| analyze_labeled(label, pc, cfg))
        .collect::<Result<_>>()?;

    let snapshots = snapshots
        .iter()
        .zip(metrics)
        .map(|((label, _), m)| Snapshot {
            label: label.clone(),
            gaps: MetricGaps::between(&m, &reference_metrics),
            metrics: m,
        })
        .collect();
    Ok(ConvergenceReport {
        config: cfg.clone(),
        config_hash: cfg.hash(),
        reference_label: reference.0.to_string(),
        reference: reference_metrics,
        snapshots,
    })
}

/// Label of a snapshot file: its stem.
pub fn label_for(path: &Path) -> String {
    path.file_stem()
        .unwrap_or(path.as_os_str())
        .to_string_lossy()
        .into_owned()
}

/// Loads every file first, so an unreadable path fails before any analysis.
pub fn track(
    snapshot_paths: &[PathBuf],
    reference_path: &Path,
    cfg: &AnalysisConfig,
) -> Result<ConvergenceReport> {
    let reference = load_pointcloud_auto(reference_path)?;
    let snapshots: Vec<(String, PointCloud)> = snapshot_paths
        .iter()
        .map(|p| Ok((label_for(p), load_pointcloud_auto(p)?)))
        .collect::<Result<_>>()?;
    if let Some((path, (_, pc))) = snapshot_paths
        .iter()
        .zip(&snapshots)
        .find(|(_, (_, pc))| pc.dim() != reference.dim())
    {
        return Err(Error::Shape(format!(
            "{} has ambient dimension {}, reference {} has {}",
            path.display(),
            pc.dim(),
            reference_path.display(),
            reference.dim()
        )));
    }
    track_clouds(&snapshots, (&label_for(reference_path), &reference), cfg)
}

/// Reads a manifest: one path per line, blank lines and `#` comments
/// skipped. Relative paths resolve against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let p = Path::new(l);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        })
        .collect())
}

/// Compares strings treating runs of ASCII digits as numbers, so
/// `epoch_9` sorts before `epoch_10`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut a, mut b) = (a.as_bytes(), b.as_bytes());
    loop {
        match (a.first(), b.first()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) if x.is_ascii_digit() && y.is_ascii_digit() => {
                let la = a.iter().take_while(|c| c.is_ascii_digit()).count();
                let lb = b.iter().take_while(|c| c.is_ascii_digit()).count();
                let (da, db) = (&a[..la], &b[..lb]);
                let ta = trim_zeros(da);
                let tb = trim_zeros(db);
                let ord = ta
                    .len()
                    .cmp(&tb.len())
                    .then_with(|| ta.cmp(tb))
                    .then(la.cmp(&lb));
                if ord != Ordering::Equal {
                    return ord;
                }
                a = &a[la..];
                b = &b[lb..];
            }
            (Some(x), Some(y)) => {
                if x != y {
                    return x.cmp(y);
                }
                a = &a[1..];
                b = &b[1..];
            }
        }
    }
}

fn trim_zeros(d: &[u8]) -> &[u8] {
    let k = d.iter().take_while(|&&c| c == b'0').count();
    &d[k..]
}

pub fn sort_natural(paths: &mut [PathBuf]) {
    paths.sort_by(|a, b| natural_cmp(&a.to_string_lossy(), &b.to_string_lossy()));
}

fn metric_columns(prefix: &str) -> Vec<String> {
    let mut cols = vec![format!("{prefix}id_2nn")];
    for name in ["entropy", "wasserstein", "bottleneck"] {
        for k in 0..REPORT_DIMS {
            cols.push(format!("{prefix}{name}_h{k}"));
        }
    }
    cols
}

/// CSV header: `label,n_points_used`, the metric columns (`id_2nn`,
/// `entropy_h0..h2`, `wasserstein_h0..h2`, `bottleneck_h0..h2`), then the
/// same columns prefixed `gap_`. Dimensions not computed are left empty.
pub fn report_csv_header() -> String {
    let mut cols = vec!["label".to_string(), "n_points_used".to_string()];
    cols.extend(metric_columns(""));
    cols.extend(metric_columns("gap_"));
    cols.join(",")
}

fn push_values(out: &mut Vec<String>, id: f64, per_dim: [&[f64]; 3]) {
    out.push(format_real(id));
    for values in per_dim {
        for k in 0..REPORT_DIMS {
            out.push(values.get(k).map(|&v| format_real(v)).unwrap_or_default());
        }
    }
}

pub fn report_to_csv(r: &ConvergenceReport) -> String {
    let mut out = report_csv_header();
    out.push('\n');
    for s in &r.snapshots {
        let mut row = vec![csv_field(&s.label), s.metrics.n_points_used.to_string()];
        let m = &s.metrics;
        push_values(
            &mut row,
            m.id_2nn,
            [
                &m.entropy,
                &m.wasserstein_to_trivial,
                &m.bottleneck_to_trivial,
            ],
        );
        let g = &s.gaps;
        push_values(
            &mut row,
            g.id_2nn,
            [
                &g.entropy,
                &g.wasserstein_to_trivial,
                &g.bottleneck_to_trivial,
            ],
        );
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn report_to_json(r: &ConvergenceReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(r)?)
}

pub fn report_from_json(text: &str) -> Result<ConvergenceReport> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

pub fn export_report(
    r: &ConvergenceReport,
    format: ReportFormat,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        ReportFormat::Csv => report_to_csv(r),
        ReportFormat::Json => report_to_json(r)?,
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
