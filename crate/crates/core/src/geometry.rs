//! Point clouds, distance matrices, file ingestion and subsampling.
//!
//! A [`PointCloud`] is a dense row-major `n × D` matrix of finite doubles.
//! Row indices are stable identifiers: every downstream structure (simplices,
//! nearest-neighbour tables) refers to points by their row.
//!
//! Two on-disk formats are supported:
//!
//! * CSV: one point per line, comma-separated reals. Lines starting with `#`
//!   and blank lines are skipped.
//! * packed binary: the magic bytes `MQPC`, a version byte `0x01`, then `n`
//!   and `D` as little-endian `u32`, then `n·D` little-endian `f64` values in
//!   row-major order.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::format_real;

pub const PACKED_MAGIC: &[u8; 4] = b"MQPC";
pub const PACKED_VERSION: u8 = 0x01;
const PACKED_HEADER_LEN: usize = 4 + 1 + 4 + 4;

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    n: usize,
    dim: usize,
}

impl PointCloud {
    /// Builds a cloud from row-major coordinates.
    pub fn from_flat(coords: Vec<f64>, dim: usize) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyInput("point cloud has no points".into()));
        }
        if dim == 0 {
            return Err(Error::Shape("ambient dimension must be at least 1".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::Shape(format!(
                "{} coordinates do not divide into rows of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::Format {
                row: pos / dim,
                message: format!("non-finite coordinate in column {}", pos % dim),
            });
        }
        let n = coords.len() / dim;
        Ok(Self { coords, n, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::EmptyInput("point cloud has no points".into()))?;
        let dim = first.as_ref().len();
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::Format {
                    row: i,
                    message: format!("expected {dim} coordinates, found {}", row.len()),
                });
            }
            coords.extend_from_slice(row);
        }
        Self::from_flat(coords, dim)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Ambient dimension `D`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    /// Returns the cloud restricted to `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.n {
                return Err(Error::Size(format!(
                    "row {i} out of range for {} points",
                    self.n
                )));
            }
            coords.extend_from_slice(self.point(i));
        }
        Self::from_flat(coords, self.dim)
    }

    /// Applies `f` to every coordinate.
    pub fn map_coords(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_flat(self.coords.iter().map(|&c| f(c)).collect(), self.dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
    Chebyshev,
}

impl Metric {
    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| x - y);
        match self {
            Metric::Euclidean => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            Metric::Manhattan => diffs.map(f64::abs).sum(),
            Metric::Chebyshev => diffs.map(f64::abs).fold(0.0, f64::max),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
            Metric::Chebyshev => "chebyshev",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "manhattan" => Ok(Metric::Manhattan),
            "chebyshev" => Ok(Metric::Chebyshev),
            other => Err(Error::Parameter(format!("unknown metric {other:?}"))),
        }
    }
}

/// Dense symmetric matrix of pairwise distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    d: Vec<f64>,
    n: usize,
    metric: Metric,
}

impl DistanceMatrix {
    /// Wraps a full row-major `n × n` matrix, checking symmetry, zero diagonal
    /// and non-negativity.
    pub fn from_full(d: Vec<f64>, n: usize, metric: Metric) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput("distance matrix has no points".into()));
        }
        if d.len() != n * n {
            return Err(Error::Shape(format!(
                "expected {} entries, found {}",
                n * n,
                d.len()
            )));
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(Error::Parameter(format!("nonzero diagonal entry at {i}")));
            }
            for j in 0..n {
                let v = d[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Parameter(format!(
                        "invalid distance {v} at ({i}, {j})"
                    )));
                }
                if v != d[j * n + i] {
                    return Err(Error::Parameter(format!(
                        "asymmetric entries at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { d, n, metric })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    /// Largest entry, i.e. the diameter of the cloud.
    pub fn max_entry(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }
}

/// Computes the full distance matrix. Rows are filled in parallel; each entry
/// is evaluated once for `i < j` and mirrored, so the result does not depend
/// on scheduling.
pub fn pairwise_distances(pc: &PointCloud, metric: Metric) -> DistanceMatrix {
    let n = pc.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = pc.point(i);
            (i + 1..n).map(|j| metric.eval(a, pc.point(j))).collect()
        })
        .collect();
    let mut d = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            let j = i + 1 + k;
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    DistanceMatrix { d, n, metric }
}

/// Draws `m` distinct rows uniformly without replacement.
///
/// Sampling uses ChaCha8 seeded with `seed`; selected rows keep their original
/// relative order, so `m == n` returns the cloud unchanged.
pub fn subsample(pc: &PointCloud, m: usize, seed: u64) -> Result<PointCloud> {
    if m == 0 {
        return Err(Error::Size("subsample size must be at least 1".into()));
    }
    if m > pc.len() {
        return Err(Error::Size(format!(
            "cannot subsample {m} points from a cloud of {}",
            pc.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices = rand::seq::index::sample(&mut rng, pc.len(), m).into_vec();
    indices.sort_unstable();
    pc.select(&indices)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    Csv,
    Packed,
}

impl CloudFormat {
    /// Picks the format from the file contents: packed binary if the file
    /// starts with the magic bytes, CSV otherwise.
    pub fn sniff(path: &Path) -> Result<Self> {
        use std::io::Read;
        let mut head = [0u8; 4];
        let mut f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let got = f.read(&mut head).map_err(|e| Error::io(path, e))?;
        Ok(if got == 4 && &head == PACKED_MAGIC {
            CloudFormat::Packed
        } else {
            CloudFormat::Csv
        })
    }

    /// Picks the format for writing from the file extension.
    pub fn from_extension(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") | Some("txt") => CloudFormat::Csv,
            Some(_) => CloudFormat::Packed,
            None => CloudFormat::Csv,
        }
    }
}

impl FromStr for CloudFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(CloudFormat::Csv),
            "packed" | "packed-binary" | "binary" => Ok(CloudFormat::Packed),
            other => Err(Error::Parameter(format!(
                "unknown point-cloud format {other:?}"
            ))),
        }
    }
}

pub fn load_pointcloud(path: impl AsRef<Path>, format: CloudFormat) -> Result<PointCloud> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let parsed = match format {
        CloudFormat::Csv => {
            let text = std::str::from_utf8(&bytes).map_err(|e| Error::Format {
                row: 0,
                message: format!("not UTF-8 text: {e}"),
            })?;
            parse_csv(text)
        }
        CloudFormat::Packed => decode_packed(&bytes),
    };
    parsed.map_err(|e| e.in_file(path))
}

/// Loads a cloud, detecting the format from the file contents.
pub fn load_pointcloud_auto(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    load_pointcloud(path, CloudFormat::sniff(path)?)
}

pub fn save_pointcloud(pc: &PointCloud, path: impl AsRef<Path>, format: CloudFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        CloudFormat::Csv => to_csv(pc).into_bytes(),
        CloudFormat::Packed => encode_packed(pc),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Parses CSV text. Row numbers in errors count data rows from 0.
pub fn parse_csv(text: &str) -> Result<PointCloud> {
    let mut coords = Vec::new();
    let mut dim = None;
    let mut row = 0;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let start = coords.len();
        for (column, token) in line.split(',').enumerate() {
            let token = token.trim();
            let v: f64 = token.parse().map_err(|_| Error::Parse {
                row,
                column,
                token: token.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column,
                    token: token.to_string(),
                });
            }
            coords.push(v);
        }
        let width = coords.len() - start;
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err(Error::Format {
                    row,
                    message: format!("expected {d} columns, found {width}"),
                })
            }
            _ => {}
        }
        row += 1;
    }
    let dim = dim.ok_or_else(|| Error::EmptyInput("no data rows".into()))?;
    PointCloud::from_flat(coords, dim)
}

pub fn to_csv(pc: &PointCloud) -> String {
    let mut out = String::new();
    for row in pc.rows() {
        let line: Vec<String> = row.iter().map(|&v| format_real(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn encode_packed(pc: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(PACKED_HEADER_LEN + 8 * pc.coords.len());
    out.extend_from_slice(PACKED_MAGIC);
    out.push(PACKED_VERSION);
    out.extend_from_slice(&(pc.n as u32).to_le_bytes());
    out.extend_from_slice(&(pc.dim as u32).to_le_bytes());
    for v in &pc.coords {
        out.write_all(&v.to_le_bytes()).expect("write to Vec");
    }
    out
}

pub fn decode_packed(bytes: &[u8]) -> Result<PointCloud> {
    if bytes.is_empty() {
        return Err(Error::EmptyInput("empty file".into()));
    }
    if bytes.len() < PACKED_HEADER_LEN || &bytes[..4] != PACKED_MAGIC {
        return Err(Error::Format {
            row: 0,
            message: "missing MQPC header".into(),
        });
    }
    if bytes[4] != PACKED_VERSION {
        return Err(Error::Format {
            row: 0,
            message: format!("unsupported packed version {:#04x}", bytes[4]),
        });
    }
    let n = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    if n == 0 {
        return Err(Error::EmptyInput("header declares zero points".into()));
    }
    let body = &bytes[PACKED_HEADER_LEN..];
    let expected = n
        .checked_mul(dim)
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| Error::Shape(format!("header n={n}, D={dim} overflows")))?;
    if body.len() != expected {
        let complete_rows = if dim == 0 { 0 } else { body.len() / (8 * dim) };
        return Err(Error::Format {
            row: complete_rows,
            message: format!(
                "header declares {n}x{dim} doubles ({expected} bytes) but body has {} bytes",
                body.len()
            ),
        });
    }
    let coords = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    PointCloud::from_flat(coords, dim)
}

/// A single image as raw bytes in row-major (height, width, channel) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<u8>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != height * width * channels {
            return Err(Error::Shape(format!(
                "{height}x{width}x{channels} image needs {} bytes, got {}",
                height * width * channels,
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PixelScale {
    /// Raw byte values.
    #[default]
    None,
    /// `v / 127.5 - 1`, mapping 0..=255 onto [-1, 1].
    MinusOneToOne,
}

impl PixelScale {
    fn apply(self, v: u8) -> f64 {
        match self {
            PixelScale::None => f64::from(v),
            PixelScale::MinusOneToOne => f64::from(v) / 127.5 - 1.0,
        }
    }

    fn invert(self, x: f64) -> u8 {
        let v = match self {
            PixelScale::None => x,
            PixelScale::MinusOneToOne => (x + 1.0) * 127.5,
        };
        v.round().clamp(0.0, 255.0) as u8
    }
}

impl FromStr for PixelScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PixelScale::None),
            "minus-one-to-one" => Ok(PixelScale::MinusOneToOne),
            other => Err(Error::Parameter(format!("unknown pixel scale {other:?}"))),
        }
    }
}

/// Embeds each image as one point with a coordinate per pixel channel.
pub fn flatten_images(images: &[Image], scale: PixelScale) -> Result<PointCloud> {
    let first = images
        .first()
        .ok_or_else(|| Error::EmptyInput("no images".into()))?;
    let shape = first.shape();
    let dim = first.data.len();
    let mut coords = Vec::with_capacity(images.len() * dim);
    for (i, img) in images.iter().enumerate() {
        if img.shape() != shape {
            return Err(Error::Shape(format!(
                "image {i} has shape {:?}, expected {:?}",
                img.shape(),
                shape
            )));
        }
        coords.extend(img.data.iter().map(|&v| scale.apply(v)));
    }
    PointCloud::from_flat(coords, dim)
}

/// Splits a flat byte tensor of shape `n × H × W × C` into images.
pub fn images_from_raw(
    bytes: &[u8],
    height: usize,
    width: usize,
    channels: usize,
) -> Result<Vec<Image>> {
    let size = height * width * channels;
    if size == 0 || !bytes.len().is_multiple_of(size) {
        return Err(Error::Shape(format!(
            "{} bytes is not a whole number of {height}x{width}x{channels} images",
            bytes.len()
        )));
    }
    bytes
        .chunks_exact(size)
        .map(|c| Image::new(height, width, channels, c.to_vec()))
        .collect()
}

/// Inverse of [`flatten_images`] for a known image shape.
pub fn unflatten_images(
    pc: &PointCloud,
    height: usize,
    width: usize,
    channels: usize,
    scale: PixelScale,
) -> Result<Vec<Image>> {
    if pc.dim() != height * width * channels {
        return Err(Error::Shape(format!(
            "dimension {} does not match {height}x{width}x{channels}",
            pc.dim()
        )));
    }
    pc.rows()
        .map(|row| {
            let data = row.iter().map(|&x| scale.invert(x)).collect();
            Image::new(height, width, channels, data)
        })
        .collect()
}
