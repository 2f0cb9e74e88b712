//! Scalar summaries and distances for persistence diagrams.
//!
//! Distances follow the usual diagram metric: points are compared with the
//! L∞ ground distance, and any point may instead be matched to its
//! projection onto the diagonal at cost `(death - birth) / 2`. The trivial
//! diagram is the empty diagram, so the distance to it reduces to a closed
//! form over half-lifespans.
//!
//! Infinite deaths must be resolved before any of this applies; see
//! [`InfinitePolicy`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{has_perfect_matching, min_cost_assignment};
use crate::persistence::PersistenceDiagram;

/// How pairs with infinite death enter the metrics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfinitePolicy {
    /// Essential classes are left out.
    #[default]
    Excluded,
    /// Infinite deaths are replaced by the given scale (normally eps_max).
    Capped(f64),
}

impl InfinitePolicy {
    /// The capped policy needs a finite, positive cap.
    pub fn capped(eps_max: Option<f64>) -> Result<Self> {
        match eps_max {
            Some(c) if c.is_finite() && c > 0.0 => Ok(InfinitePolicy::Capped(c)),
            Some(c) => Err(Error::Parameter(format!(
                "cap must be finite and positive, got {c}"
            ))),
            None => Err(Error::Parameter(
                "capped infinite policy requires eps_max".into(),
            )),
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            InfinitePolicy::Capped(c) => Self::capped(Some(c)).map(|_| ()),
            InfinitePolicy::Excluded => Ok(()),
        }
    }

    /// `(birth, death)` points retained under this policy, all finite.
    pub fn apply(self, d: &PersistenceDiagram) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        Ok(d.pairs()
            .iter()
            .filter_map(|p| match (self, p.is_essential()) {
                (_, false) => Some((p.birth, p.death)),
                (InfinitePolicy::Excluded, true) => None,
                (InfinitePolicy::Capped(c), true) => (c > p.birth).then_some((p.birth, c)),
            })
            .collect())
    }
}

impl fmt::Display for InfinitePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfinitePolicy::Excluded => f.write_str("excluded"),
            InfinitePolicy::Capped(c) => write!(f, "capped({c})"),
        }
    }
}

/// Shannon entropy (nats) of the normalised lifespans.
pub fn persistence_entropy(d: &PersistenceDiagram, policy: InfinitePolicy) -> Result<f64> {
    Ok(entropy_of_points(&policy.apply(d)?))
}

fn entropy_of_points(points: &[(f64, f64)]) -> f64 {
    if points.len() <= 1 {
        return 0.0;
    }
    let total: f64 = points.iter().map(|(b, d)| d - b).sum();
    if total <= 0.0 {
        return 0.0;
    }
    -points
        .iter()
        .map(|(b, d)| (d - b) / total)
        .filter(|&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 || p.is_infinite() {
        return Err(Error::Parameter(format!(
            "p must be a finite real >= 1, got {p}"
        )));
    }
    Ok(())
}

fn check_dims(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<()> {
    if d1.dim() != d2.dim() {
        return Err(Error::Parameter(format!(
            "cannot compare diagrams of dimensions {} and {}",
            d1.dim(),
            d2.dim()
        )));
    }
    Ok(())
}

#[inline]
fn linf(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

#[inline]
fn to_diagonal(a: (f64, f64)) -> f64 {
    (a.1 - a.0) / 2.0
}

/// p-Wasserstein distance, solved exactly as an assignment problem on the
/// diagram points augmented with diagonal slots.
pub fn wasserstein(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    p: f64,
    policy: InfinitePolicy,
) -> Result<f64> {
    check_dims(d1, d2)?;
    check_p(p)?;
    let a = policy.apply(d1)?;
    let b = policy.apply(d2)?;
    let (n, m) = (a.len(), b.len());
    let size = n + m;
    if size == 0 {
        return Ok(0.0);
    }

    // Rows: points of a, then diagonal slots for b. Columns: points of b,
    // then diagonal slots for a.
    let mut cost = vec![0.0; size * size];
    for (i, &pa) in a.iter().enumerate() {
        let row = &mut cost[i * size..(i + 1) * size];
        for (j, &pb) in b.iter().enumerate() {
            row[j] = linf(pa, pb).powf(p);
        }
        row[m..].fill(to_diagonal(pa).powf(p));
    }
    for (j, &pb) in b.iter().enumerate() {
        let c = to_diagonal(pb).powf(p);
        for i in n..size {
            cost[i * size + j] = c;
        }
    }
    let (total, _) = min_cost_assignment(&cost, size);
    Ok(total.max(0.0).powf(1.0 / p))
}

/// Distance to the empty diagram in closed form:
/// `(Σ ((death - birth) / 2)^p)^(1/p)`. For `p = 1` this is half the total
/// lifespan.
pub fn wasserstein_to_trivial(
    d: &PersistenceDiagram,
    p: f64,
    policy: InfinitePolicy,
) -> Result<f64> {
    check_p(p)?;
    let total: f64 = policy
        .apply(d)?
        .into_iter()
        .map(|pt| to_diagonal(pt).powf(p))
        .sum();
    Ok(total.powf(1.0 / p))
}

/// Bottleneck distance: the smallest `t` admitting a perfect matching that
/// uses only pairs of cost at most `t`, found by binary search over the
/// finitely many candidate costs.
pub fn bottleneck(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    policy: InfinitePolicy,
) -> Result<f64> {
    check_dims(d1, d2)?;
    let a = policy.apply(d1)?;
    let b = policy.apply(d2)?;
    let (n, m) = (a.len(), b.len());
    if n + m == 0 {
        return Ok(0.0);
    }

    let mut candidates: Vec<f64> = Vec::with_capacity(n * m + n + m + 1);
    candidates.push(0.0);
    candidates.extend(a.iter().map(|&x| to_diagonal(x)));
    candidates.extend(b.iter().map(|&x| to_diagonal(x)));
    for &pa in &a {
        candidates.extend(b.iter().map(|&pb| linf(pa, pb)));
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let feasible = |t: f64| {
        // Left: a points, then b's diagonal copies. Right: b points, then a's
        // diagonal copies.
        let mut adj: Vec<Vec<usize>> = Vec::with_capacity(n + m);
        for (i, &pa) in a.iter().enumerate() {
            let mut row: Vec<usize> = (0..m).filter(|&j| linf(pa, b[j]) <= t).collect();
            if to_diagonal(pa) <= t {
                row.push(m + i);
            }
            adj.push(row);
        }
        for (j, &pb) in b.iter().enumerate() {
            let mut row: Vec<usize> = Vec::with_capacity(n + 1);
            if to_diagonal(pb) <= t {
                row.push(j);
            }
            row.extend(m..m + n);
            adj.push(row);
        }
        has_perfect_matching(&adj, n + m)
    };

    // The largest candidate is always feasible (everything to the diagonal).
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(candidates[lo])
}

/// Bottleneck distance to the empty diagram: the largest half-lifespan.
pub fn bottleneck_to_trivial(d: &PersistenceDiagram, policy: InfinitePolicy) -> Result<f64> {
    Ok(policy
        .apply(d)?
        .into_iter()
        .map(to_diagonal)
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WassersteinValue {
    pub p: f64,
    pub value: f64,
}

/// Per-diagram scalar summary. The distances are to the trivial diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramSummary {
    pub dim: usize,
    pub entropy: f64,
    pub wasserstein: WassersteinValue,
    pub bottleneck: f64,
    pub n_features: usize,
    pub infinite_policy: InfinitePolicy,
}

pub fn summarize(d: &PersistenceDiagram, p: f64, policy: InfinitePolicy) -> Result<DiagramSummary> {
    check_p(p)?;
    let points = policy.apply(d)?;
    Ok(DiagramSummary {
        dim: d.dim(),
        entropy: entropy_of_points(&points),
        wasserstein: WassersteinValue {
            p,
            value: wasserstein_to_trivial(d, p, policy)?,
        },
        bottleneck: bottleneck_to_trivial(d, policy)?,
        n_features: points.len(),
        infinite_policy: policy,
    })
}
