//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls into the crate's filtration or reduction code: simplices
//! come from exhaustive subset enumeration and persistence from a dense Z/2
//! reduction without any optimisation.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_rows(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

pub fn naive_euclidean(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for (a, b) in rows[i].iter().zip(&rows[j]) {
                let t = a - b;
                s += t * t;
            }
            d[i][j] = s.sqrt();
        }
    }
    d
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSimplex {
    pub verts: Vec<u32>,
    pub value: f64,
}

impl OracleSimplex {
    pub fn dim(&self) -> usize {
        self.verts.len() - 1
    }
}

/// Every vertex subset of size `1..=max_dim+1` whose diameter is at most `eps`,
/// ordered by (value, dimension, lexicographic vertices).
pub fn enumerate_subsets(d: &[Vec<f64>], max_dim: usize, eps: f64) -> Vec<OracleSimplex> {
    let n = d.len();
    assert!(n <= 20, "exhaustive enumeration only for tiny clouds");
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let size = mask.count_ones() as usize;
        if size > max_dim + 1 {
            continue;
        }
        let verts: Vec<u32> = (0..n as u32).filter(|&v| mask & (1 << v) != 0).collect();
        let mut value = 0.0f64;
        for (a, &i) in verts.iter().enumerate() {
            for &j in &verts[a + 1..] {
                value = value.max(d[i as usize][j as usize]);
            }
        }
        if value <= eps {
            out.push(OracleSimplex { verts, value });
        }
    }
    out.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.verts.len().cmp(&b.verts.len()))
            .then_with(|| a.verts.cmp(&b.verts))
    });
    out
}

/// Persistence diagrams for dims `0..max_dim`, each a sorted list of
/// `(birth, death)` with zero-length pairs removed.
pub fn dense_persistence(simplices: &[OracleSimplex], max_dim: usize) -> Vec<Vec<(f64, f64)>> {
    let m = simplices.len();
    let words = m.div_ceil(64);
    let index_of = |verts: &[u32]| {
        simplices
            .iter()
            .position(|s| s.verts == verts)
            .expect("face closure")
    };
    let mut cols: Vec<Vec<u64>> = vec![vec![0u64; words]; m];
    for (j, s) in simplices.iter().enumerate() {
        if s.verts.len() < 2 {
            continue;
        }
        for skip in 0..s.verts.len() {
            let face: Vec<u32> = s
                .verts
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != skip)
                .map(|(_, &v)| v)
                .collect();
            let i = index_of(&face);
            cols[j][i / 64] ^= 1 << (i % 64);
        }
    }
    let low = |c: &[u64]| -> Option<usize> {
        (0..c.len())
            .rev()
            .find(|&w| c[w] != 0)
            .map(|w| w * 64 + 63 - c[w].leading_zeros() as usize)
    };
    let mut low_owner: Vec<Option<usize>> = vec![None; m];
    let mut paired_birth = vec![false; m];
    let mut is_death = vec![false; m];
    for j in 0..m {
        while let Some(l) = low(&cols[j]) {
            match low_owner[l] {
                Some(k) => {
                    let other = cols[k].clone();
                    for (a, b) in cols[j].iter_mut().zip(other) {
                        *a ^= b;
                    }
                }
                None => {
                    low_owner[l] = Some(j);
                    paired_birth[l] = true;
                    is_death[j] = true;
                    break;
                }
            }
        }
    }
    let mut diagrams = vec![Vec::new(); max_dim.max(1)];
    for (i, s) in simplices.iter().enumerate() {
        if is_death[i] || s.dim() >= max_dim {
            continue;
        }
        let death = if paired_birth[i] {
            simplices[low_owner[i].unwrap()].value
        } else {
            f64::INFINITY
        };
        if death > s.value {
            diagrams[s.dim()].push((s.value, death));
        }
    }
    for d in &mut diagrams {
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    }
    diagrams
}

/// Diagram values exactly as the oracle sees them, starting from raw rows.
pub fn oracle_diagrams(
    rows: &[Vec<f64>],
    max_dim: usize,
    eps: Option<f64>,
) -> Vec<Vec<(f64, f64)>> {
    let d = naive_euclidean(rows);
    let eps = eps.unwrap_or_else(|| d.iter().flatten().copied().fold(0.0, f64::max));
    dense_persistence(&enumerate_subsets(&d, max_dim, eps), max_dim)
}

pub fn brute_force_assignment(cost: &[Vec<f64>]) -> f64 {
    fn go(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
        if row == cost.len() {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for c in 0..cost.len() {
            if !used[c] {
                used[c] = true;
                best = best.min(cost[row][c] + go(cost, row + 1, used));
                used[c] = false;
            }
        }
        best
    }
    go(cost, 0, &mut vec![false; cost.len()])
}

/// p-Wasserstein between two finite diagrams by exhaustive search over
/// matchings of the diagonal-augmented point sets.
pub fn brute_force_wasserstein(a: &[(f64, f64)], b: &[(f64, f64)], p: f64) -> f64 {
    let n = a.len() + b.len();
    let half = |&(x, y): &(f64, f64)| (y - x) / 2.0;
    let linf = |u: &(f64, f64), v: &(f64, f64)| (u.0 - v.0).abs().max((u.1 - v.1).abs());
    let mut cost = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let c = match (i < a.len(), j < b.len()) {
                (true, true) => linf(&a[i], &b[j]),
                (true, false) => half(&a[i]),
                (false, true) => half(&b[j]),
                (false, false) => 0.0,
            };
            cost[i][j] = c.powf(p);
        }
    }
    brute_force_assignment(&cost).powf(1.0 / p)
}
