//! Persistence diagrams by boundary-matrix reduction over Z/2.
//!
//! Columns are reduced one dimension at a time, from the top dimension down.
//! Whenever a `k`-column ends up with lowest one in row `r`, the `(k-1)`-column
//! of simplex `r` is known to reduce to zero and is skipped ("clearing").
//! Pairs whose birth and death values coincide are dropped; classes that never
//! die carry `f64::INFINITY` as their death.

use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;
use std::hash::{BuildHasherDefault, Hasher};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DistanceMatrix;
use crate::numfmt::{format_real, parse_real};
use crate::rips::{FilteredSimplex, Filtration};
use crate::union_find::DisjointSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

impl PersistencePair {
    pub fn lifespan(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_essential(&self) -> bool {
        self.death == f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    dim: usize,
    pairs: Vec<PersistencePair>,
}

impl PersistenceDiagram {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            pairs: Vec::new(),
        }
    }

    /// Builds a diagram from `(birth, death)` points. Every point must have
    /// `death > birth`, a finite birth, and a death that is finite or `+inf`.
    pub fn from_points(dim: usize, points: &[(f64, f64)]) -> Result<Self> {
        let mut pairs = Vec::with_capacity(points.len());
        for &(birth, death) in points {
            if !birth.is_finite() || death.is_nan() || death <= birth {
                return Err(Error::Parameter(format!(
                    "invalid persistence pair ({birth}, {death})"
                )));
            }
            pairs.push(PersistencePair { dim, birth, death });
        }
        Ok(Self { dim, pairs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pairs(&self) -> &[PersistencePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn essential_count(&self) -> usize {
        self.pairs.iter().filter(|p| p.is_essential()).count()
    }

    /// `(birth, death)` points sorted ascending, for multiset comparison.
    pub fn sorted_points(&self) -> Vec<(f64, f64)> {
        let mut pts: Vec<(f64, f64)> = self.pairs.iter().map(|p| (p.birth, p.death)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pts
    }

    /// Lifespans of all pairs, longest first.
    pub fn lifespans_desc(&self) -> Vec<f64> {
        let mut l: Vec<f64> = self.pairs.iter().map(PersistencePair::lifespan).collect();
        l.sort_by(|a, b| b.total_cmp(a));
        l
    }

    fn canonicalize(&mut self) {
        self.pairs.sort_by(|a, b| {
            a.birth
                .total_cmp(&b.birth)
                .then(a.death.total_cmp(&b.death))
        });
    }
}

/// The facets of a simplex, each obtained by deleting one vertex in turn.
/// Over Z/2 the boundary carries no signs. A vertex has empty boundary.
pub fn boundary(simplex: &FilteredSimplex) -> Vec<Vec<u32>> {
    boundary_of(simplex.vertices())
}

pub fn boundary_of(vertices: &[u32]) -> Vec<Vec<u32>> {
    if vertices.len() < 2 {
        return Vec::new();
    }
    (0..vertices.len())
        .map(|skip| {
            vertices
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect()
}

/// Boundary of a Z/2 chain given as a list of simplices: faces appearing an
/// even number of times cancel. The result is sorted.
pub fn chain_boundary(chain: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let mut parity: HashMap<Vec<u32>, bool> = HashMap::new();
    for s in chain {
        for face in boundary_of(s) {
            *parity.entry(face).or_insert(false) ^= true;
        }
    }
    let mut out: Vec<Vec<u32>> = parity
        .into_iter()
        .filter(|(_, odd)| *odd)
        .map(|(f, _)| f)
        .collect();
    out.sort();
    out
}

#[derive(Default)]
struct KeyHasher(u64);

impl Hasher for KeyHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0.rotate_left(5) ^ u64::from(b)).wrapping_mul(0x51_7c_c1_b7_27_22_0a_95);
        }
    }

    fn write_u128(&mut self, v: u128) {
        let folded = (v as u64) ^ ((v >> 64) as u64).rotate_left(29);
        self.0 = (self.0 ^ folded).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        self.0 ^= self.0 >> 32;
    }
}

type KeyMap = HashMap<u128, u32, BuildHasherDefault<KeyHasher>>;

fn simplex_key(vertices: &[u32]) -> u128 {
    vertices
        .iter()
        .fold(0u128, |k, &v| (k << 32) | u128::from(v))
}

/// Working column for the reduction: a toggle bitset over all rows plus a
/// max-heap of rows that were switched on. Adding a column costs its length
/// regardless of how long the working column has grown.
struct WorkColumn {
    bits: Vec<u64>,
    heap: BinaryHeap<u32>,
}

impl WorkColumn {
    fn new(rows: usize) -> Self {
        Self {
            bits: vec![0; rows.div_ceil(64)],
            heap: BinaryHeap::new(),
        }
    }

    #[inline]
    fn toggle(&mut self, r: u32) {
        let (w, b) = ((r / 64) as usize, r % 64);
        self.bits[w] ^= 1 << b;
        if self.bits[w] & (1 << b) != 0 {
            self.heap.push(r);
        }
    }

    #[inline]
    fn is_set(&self, r: u32) -> bool {
        self.bits[(r / 64) as usize] & (1 << (r % 64)) != 0
    }

    fn add(&mut self, col: &[u32]) {
        for &r in col {
            self.toggle(r);
        }
    }

    /// Largest set row, discarding stale heap entries.
    fn low(&mut self) -> Option<u32> {
        while let Some(&top) = self.heap.peek() {
            if self.is_set(top) {
                return Some(top);
            }
            self.heap.pop();
        }
        None
    }

    /// Empties the column, returning its rows in ascending order.
    fn drain_sorted(&mut self) -> Vec<u32> {
        let mut out = Vec::new();
        while let Some(r) = self.heap.pop() {
            if self.is_set(r) {
                self.bits[(r / 64) as usize] &= !(1 << (r % 64));
                out.push(r);
            }
        }
        out.reverse();
        out
    }

    fn clear(&mut self) {
        while let Some(r) = self.heap.pop() {
            self.bits[(r / 64) as usize] &= !(1 << (r % 64));
        }
    }
}

const NONE: u32 = u32::MAX;

/// Computes the diagrams of dimensions `0..max_dim` of the filtration.
pub fn compute_persistence(f: &Filtration) -> Result<Vec<PersistenceDiagram>> {
    let simplices = f.simplices();
    let m = simplices.len();
    if m >= NONE as usize {
        return Err(Error::Size(format!(
            "{m} simplices exceed the column index range"
        )));
    }
    let max_dim = f.max_dim();

    let mut by_dim: Vec<Vec<u32>> = vec![Vec::new(); max_dim + 1];
    for (idx, s) in simplices.iter().enumerate() {
        by_dim[s.dim()].push(idx as u32);
    }

    // Face lookup for every dimension that occurs as a face.
    let mut index_of: Vec<KeyMap> = (0..max_dim).map(|_| KeyMap::default()).collect();
    for (k, map) in index_of.iter_mut().enumerate() {
        map.reserve(by_dim[k].len());
        for &idx in &by_dim[k] {
            if map
                .insert(simplex_key(simplices[idx as usize].vertices()), idx)
                .is_some()
            {
                return Err(Error::Integrity(format!(
                    "duplicate simplex {:?}",
                    simplices[idx as usize].vertices()
                )));
            }
        }
    }

    // pivot_slot[row] = slot in `reduced` of the column whose lowest one is
    // `row`. Rows of dimension k-1 are only ever lows of k-columns, so slots
    // never collide across dimensions.
    let mut pivot_slot = vec![NONE; m];
    let mut death_of = vec![NONE; m];
    let mut reduced: Vec<Vec<u32>> = Vec::new();
    let mut work = WorkColumn::new(m);
    let mut facets: Vec<u32> = Vec::with_capacity(4);

    for k in (1..=max_dim).rev() {
        let faces = &index_of[k - 1];
        reduced.clear();
        for &j in &by_dim[k] {
            if death_of[j as usize] != NONE {
                // Cleared: a birth, so its column reduces to zero.
                continue;
            }
            let s = &simplices[j as usize];
            facets.clear();
            for face in boundary(s) {
                let idx = *faces.get(&simplex_key(&face)).ok_or_else(|| {
                    Error::Integrity(format!("face {face:?} of {:?} is missing", s.vertices()))
                })?;
                if idx >= j {
                    return Err(Error::Integrity(format!(
                        "face {face:?} enters after its coface {:?}",
                        s.vertices()
                    )));
                }
                facets.push(idx);
            }

            work.add(&facets);
            while let Some(low) = work.low() {
                let slot = pivot_slot[low as usize];
                if slot == NONE {
                    pivot_slot[low as usize] = reduced.len() as u32;
                    death_of[low as usize] = j;
                    reduced.push(work.drain_sorted());
                    break;
                }
                work.add(&reduced[slot as usize]);
            }
            work.clear();
        }
    }

    let mut is_death = vec![false; m];
    for &d in death_of.iter().filter(|&&d| d != NONE) {
        is_death[d as usize] = true;
    }

    let mut diagrams: Vec<PersistenceDiagram> =
        (0..max_dim.max(1)).map(PersistenceDiagram::empty).collect();
    for (idx, s) in simplices.iter().enumerate() {
        let k = s.dim();
        if k >= diagrams.len() || is_death[idx] {
            continue;
        }
        let birth = s.value();
        let death = match death_of[idx] {
            NONE => f64::INFINITY,
            d => simplices[d as usize].value(),
        };
        if death > birth {
            diagrams[k].pairs.push(PersistencePair {
                dim: k,
                birth,
                death,
            });
        }
    }
    for d in &mut diagrams {
        d.canonicalize();
    }
    Ok(diagrams)
}

/// Dimension-0 diagram by a Kruskal sweep over edges of length at most
/// `eps_max`. Agrees with the dimension-0 output of [`compute_persistence`].
pub fn compute_h0_unionfind(dm: &DistanceMatrix, eps_max: f64) -> PersistenceDiagram {
    let n = dm.len();
    let mut edges: Vec<(f64, u32, u32)> = Vec::new();
    for i in 0..n {
        let row = dm.row(i);
        for (j, &v) in row.iter().enumerate().skip(i + 1) {
            if v <= eps_max {
                edges.push((v, i as u32, j as u32));
            }
        }
    }
    edges.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));

    let mut ds = DisjointSet::new(n);
    let mut pairs = Vec::with_capacity(n);
    for (v, i, j) in edges {
        if ds.components() == 1 {
            break;
        }
        if ds.union(i as usize, j as usize) && v > 0.0 {
            pairs.push(PersistencePair {
                dim: 0,
                birth: 0.0,
                death: v,
            });
        }
    }
    for _ in 0..ds.components() {
        pairs.push(PersistencePair {
            dim: 0,
            birth: 0.0,
            death: f64::INFINITY,
        });
    }
    let mut d = PersistenceDiagram { dim: 0, pairs };
    d.canonicalize();
    d
}

/// CSV with header `dim,birth,death`; infinite deaths are written as `inf`.
pub fn diagrams_to_csv(diagrams: &[PersistenceDiagram]) -> String {
    let mut out = String::from("dim,birth,death\n");
    for d in diagrams {
        for p in &d.pairs {
            writeln!(
                out,
                "{},{},{}",
                p.dim,
                format_real(p.birth),
                format_real(p.death)
            )
            .unwrap();
        }
    }
    out
}

/// Parses diagram CSV back into diagrams, one per dimension from 0 to the
/// largest dimension present (or `min_dims - 1`, whichever is larger).
pub fn diagrams_from_csv(text: &str, min_dims: usize) -> Result<Vec<PersistenceDiagram>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.trim() == "dim,birth,death" => {}
        _ => {
            return Err(Error::Format {
                row: 0,
                message: "expected header \"dim,birth,death\"".into(),
            })
        }
    }
    let mut diagrams: Vec<PersistenceDiagram> =
        (0..min_dims).map(PersistenceDiagram::empty).collect();
    for (row, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Format {
                row,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let dim: usize = fields[0].parse().map_err(|_| Error::Parse {
            row,
            column: 0,
            token: fields[0].to_string(),
        })?;
        let mut vals = [0.0; 2];
        for (c, v) in vals.iter_mut().enumerate() {
            *v = parse_real(fields[c + 1]).ok_or_else(|| Error::Parse {
                row,
                column: c + 1,
                token: fields[c + 1].to_string(),
            })?;
        }
        let [birth, death] = vals;
        if !birth.is_finite() || death.is_nan() || death <= birth {
            return Err(Error::Format {
                row,
                message: format!("invalid pair ({birth}, {death})"),
            });
        }
        while diagrams.len() <= dim {
            diagrams.push(PersistenceDiagram::empty(diagrams.len()));
        }
        diagrams[dim]
            .pairs
            .push(PersistencePair { dim, birth, death });
    }
    Ok(diagrams)
}

pub fn write_diagrams_csv(diagrams: &[PersistenceDiagram], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, diagrams_to_csv(diagrams)).map_err(|e| Error::io(path, e))
}
