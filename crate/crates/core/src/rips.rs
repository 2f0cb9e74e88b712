//! Vietoris–Rips clique filtrations.
//!
//! A simplex enters the filtration at its diameter, the largest pairwise
//! distance among its vertices. Simplices are built up to dimension 3
//! (tetrahedra), which is what homology in dimensions 0..=2 needs.
//!
//! The reduction order is `(value, dim, vertices)` ascending. Because a face
//! never has a larger diameter or a larger dimension than its cofaces, every
//! face precedes its cofaces in this order.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DistanceMatrix;
use crate::numfmt::format_real;

pub const MAX_SIMPLEX_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilteredSimplex {
    verts: [u32; 4],
    dim: u8,
    value: f64,
}

impl FilteredSimplex {
    /// Builds a simplex from strictly increasing vertex indices.
    pub fn new(vertices: &[u32], value: f64) -> Result<Self> {
        if vertices.is_empty() || vertices.len() > MAX_SIMPLEX_DIM + 1 {
            return Err(Error::UnsupportedDimension(
                vertices.len().saturating_sub(1),
            ));
        }
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter(format!(
                "simplex vertices must be strictly increasing, got {vertices:?}"
            )));
        }
        let mut verts = [0; 4];
        verts[..vertices.len()].copy_from_slice(vertices);
        Ok(Self {
            verts,
            dim: (vertices.len() - 1) as u8,
            value,
        })
    }

    #[inline]
    pub(crate) fn from_parts(verts: [u32; 4], dim: u8, value: f64) -> Self {
        Self { verts, dim, value }
    }

    #[inline]
    pub fn vertices(&self) -> &[u32] {
        &self.verts[..=self.dim as usize]
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Total order used for reduction: value, then dimension, then vertices.
    pub fn filtration_cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.dim.cmp(&other.dim))
            .then_with(|| self.vertices().cmp(other.vertices()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsMax {
    /// Use the largest pairwise distance, i.e. the full filtration.
    #[default]
    Auto,
    Value(f64),
}

impl EpsMax {
    pub fn resolve(self, dm: &DistanceMatrix) -> Result<f64> {
        match self {
            EpsMax::Auto => Ok(dm.max_entry()),
            EpsMax::Value(v) if v > 0.0 && !v.is_nan() => Ok(v),
            EpsMax::Value(v) => Err(Error::Parameter(format!(
                "eps_max must be positive, got {v}"
            ))),
        }
    }
}

impl std::str::FromStr for EpsMax {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(EpsMax::Auto);
        }
        s.parse::<f64>()
            .map(EpsMax::Value)
            .map_err(|_| Error::Parameter(format!("eps_max must be a real or \"auto\", got {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    simplices: Vec<FilteredSimplex>,
    n_vertices: usize,
    eps_max: f64,
    max_dim: usize,
}

impl Filtration {
    /// Assembles a filtration from arbitrary simplices, sorting them into
    /// reduction order. Face closure is not checked here; the reduction
    /// reports a missing or late face as an integrity error.
    pub fn from_simplices(
        mut simplices: Vec<FilteredSimplex>,
        n_vertices: usize,
        eps_max: f64,
        max_dim: usize,
    ) -> Result<Self> {
        if max_dim > MAX_SIMPLEX_DIM {
            return Err(Error::UnsupportedDimension(max_dim));
        }
        if let Some(s) = simplices
            .iter()
            .find(|s| s.dim() > max_dim || s.vertices().iter().any(|&v| v as usize >= n_vertices))
        {
            return Err(Error::Parameter(format!(
                "simplex {:?} exceeds max_dim {max_dim} or vertex count {n_vertices}",
                s.vertices()
            )));
        }
        simplices.par_sort_unstable_by(FilteredSimplex::filtration_cmp);
        Ok(Self {
            simplices,
            n_vertices,
            eps_max,
            max_dim,
        })
    }

    pub fn simplices(&self) -> &[FilteredSimplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn eps_max(&self) -> f64 {
        self.eps_max
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// Number of simplices of each dimension `0..=max_dim`.
    pub fn counts_by_dim(&self) -> Vec<usize> {
        let mut counts = vec![0; self.max_dim + 1];
        for s in &self.simplices {
            counts[s.dim()] += 1;
        }
        counts
    }

    /// Text dump, one simplex per line: `value dim v0 v1 ...`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in &self.simplices {
            write!(out, "{} {}", format_real(s.value), s.dim).unwrap();
            for v in s.vertices() {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn write_dump(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f =
            std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
        f.write_all(self.dump().as_bytes())
            .and_then(|_| f.flush())
            .map_err(|e| Error::io(path, e))
    }
}

/// Builds the Rips filtration of `dm` with simplices up to `max_dim` and
/// diameter at most `eps_max`.
///
/// Clique enumeration runs in parallel over the lowest vertex of each simplex;
/// the final sort makes the output independent of scheduling.
pub fn build_rips(dm: &DistanceMatrix, max_dim: usize, eps_max: EpsMax) -> Result<Filtration> {
    if max_dim > MAX_SIMPLEX_DIM {
        return Err(Error::UnsupportedDimension(max_dim));
    }
    if max_dim == 0 {
        return Err(Error::Parameter("max_dim must be at least 1".into()));
    }
    let eps = eps_max.resolve(dm)?;
    let n = dm.len();
    if n > u32::MAX as usize {
        return Err(Error::Size(format!(
            "{n} points exceed the vertex index range"
        )));
    }

    // Higher-indexed neighbours within eps, ascending.
    let upper: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = dm.row(i);
            (i + 1..n)
                .filter(|&j| row[j] <= eps)
                .map(|j| j as u32)
                .collect()
        })
        .collect();
    let adjacent = |a: u32, b: u32| dm.get(a as usize, b as usize) <= eps;

    let mut simplices: Vec<FilteredSimplex> = (0..n as u32)
        .map(|v| FilteredSimplex::from_parts([v, 0, 0, 0], 0, 0.0))
        .collect();

    if max_dim >= 1 {
        let higher: Vec<Vec<FilteredSimplex>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let a = i as u32;
                let nbrs = &upper[i];
                let mut out = Vec::new();
                for (x, &b) in nbrs.iter().enumerate() {
                    let dab = dm.get(i, b as usize);
                    out.push(FilteredSimplex::from_parts([a, b, 0, 0], 1, dab));
                    if max_dim < 2 {
                        continue;
                    }
                    for (y, &c) in nbrs.iter().enumerate().skip(x + 1) {
                        if !adjacent(b, c) {
                            continue;
                        }
                        let dabc = dab
                            .max(dm.get(i, c as usize))
                            .max(dm.get(b as usize, c as usize));
                        out.push(FilteredSimplex::from_parts([a, b, c, 0], 2, dabc));
                        if max_dim < 3 {
                            continue;
                        }
                        for &d in &nbrs[y + 1..] {
                            if !adjacent(b, d) || !adjacent(c, d) {
                                continue;
                            }
                            let v = dabc
                                .max(dm.get(i, d as usize))
                                .max(dm.get(b as usize, d as usize))
                                .max(dm.get(c as usize, d as usize));
                            out.push(FilteredSimplex::from_parts([a, b, c, d], 3, v));
                        }
                    }
                }
                out
            })
            .collect();
        simplices.reserve(higher.iter().map(Vec::len).sum());
        for chunk in higher {
            simplices.extend(chunk);
        }
    }

    log::debug!(
        "rips: {} points, eps_max {eps}, max_dim {max_dim}: {} simplices",
        n,
        simplices.len()
    );
    Filtration::from_simplices(simplices, n, eps, max_dim)
}
