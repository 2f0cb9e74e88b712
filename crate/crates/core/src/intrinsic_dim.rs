//! Intrinsic-dimension estimators.
//!
//! * Two nearest neighbours (2NN): for each point the ratio `μ = r2 / r1` of
//!   second- to first-neighbour distance follows `F(μ) = 1 - μ^(-d)` on a
//!   locally uniform `d`-manifold. `d` is recovered either by maximum
//!   likelihood or by a least-squares fit of `-ln(1 - F_emp)` against `ln μ`.
//! * Box counting: slope of `log N(ε)` against `log(1/ε)` over a geometric
//!   ladder of grid sizes.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdMethod {
    TwoNnMle,
    TwoNnFit,
    BoxCount,
}

impl fmt::Display for IdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IdMethod::TwoNnMle => "two-nn-mle",
            IdMethod::TwoNnFit => "two-nn-fit",
            IdMethod::BoxCount => "box-count",
        })
    }
}

impl FromStr for IdMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-nn-mle" => Ok(IdMethod::TwoNnMle),
            "two-nn-fit" => Ok(IdMethod::TwoNnFit),
            "box-count" => Ok(IdMethod::BoxCount),
            other => Err(Error::Parameter(format!("unknown ID method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwoNnMethod {
    #[default]
    Mle,
    Fit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IdDiagnostics {
    TwoNn {
        discard_fraction: f64,
        n_discarded: usize,
    },
    BoxCount {
        scales: Vec<f64>,
        counts: Vec<usize>,
        r_squared: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdEstimate {
    pub value: f64,
    pub method: IdMethod,
    pub n_used: usize,
    pub diagnostics: IdDiagnostics,
}

/// Distances to and indices of the two nearest neighbours of every point,
/// by exhaustive search. Equal distances resolve to the smaller index.
pub fn two_nearest(pc: &PointCloud) -> Vec<[(f64, usize); 2]> {
    let n = pc.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let a = pc.point(i);
            let mut best = [(f64::INFINITY, usize::MAX); 2];
            for j in (0..n).filter(|&j| j != i) {
                let d = a
                    .iter()
                    .zip(pc.point(j))
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                // j ascends, so a strict comparison keeps the smaller index on ties.
                if d < best[0].0 {
                    best[1] = best[0];
                    best[0] = (d, j);
                } else if d < best[1].0 {
                    best[1] = (d, j);
                }
            }
            best
        })
        .collect()
}

pub fn estimate_id_2nn(
    pc: &PointCloud,
    discard_fraction: f64,
    method: TwoNnMethod,
) -> Result<IdEstimate> {
    let n = pc.len();
    if n < 3 {
        return Err(Error::Size(format!("2NN needs at least 3 points, got {n}")));
    }
    if !(0.0..1.0).contains(&discard_fraction) {
        return Err(Error::Parameter(format!(
            "discard fraction must lie in [0, 1), got {discard_fraction}"
        )));
    }

    let neighbours = two_nearest(pc);
    if let Some((i, nb)) = neighbours.iter().enumerate().find(|(_, nb)| nb[0].0 == 0.0) {
        return Err(Error::Degenerate(format!(
            "points {i} and {} coincide (zero nearest-neighbour distance)",
            nb[0].1
        )));
    }
    let mut log_mu: Vec<f64> = neighbours
        .iter()
        .map(|nb| (nb[1].0 / nb[0].0).ln())
        .collect();
    log_mu.sort_by(f64::total_cmp);

    let n_discarded = ((n as f64) * discard_fraction).floor() as usize;
    let n_used = n - n_discarded;
    if n_used < 2 {
        return Err(Error::Size(format!(
            "discarding {n_discarded} of {n} ratios leaves fewer than 2"
        )));
    }
    let kept = &log_mu[..n_used];

    let value = match method {
        TwoNnMethod::Mle => {
            // Trimmed ratios are right-censored at the largest kept ratio.
            let censor = kept[n_used - 1];
            let total = kept.iter().sum::<f64>() + n_discarded as f64 * censor;
            n_used as f64 / total
        }
        TwoNnMethod::Fit => {
            // Empirical CDF over the full sample; the point with F = 1 has
            // no finite ordinate and is left out.
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (k, &x) in kept.iter().enumerate() {
                let f = (k + 1) as f64 / n as f64;
                if f >= 1.0 {
                    continue;
                }
                let y = -(1.0 - f).ln();
                sxy += x * y;
                sxx += x * x;
            }
            sxy / sxx
        }
    };
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::Degenerate(format!(
            "2NN estimate is not a positive finite number ({value})"
        )));
    }
    Ok(IdEstimate {
        value,
        method: match method {
            TwoNnMethod::Mle => IdMethod::TwoNnMle,
            TwoNnMethod::Fit => IdMethod::TwoNnFit,
        },
        n_used,
        diagnostics: IdDiagnostics::TwoNn {
            discard_fraction,
            n_discarded,
        },
    })
}

/// Number of grid cells of side `eps` occupied by the (already translated)
/// cloud. `sides` is the bounding-box extent per coordinate.
fn occupied_cells(shifted: &[Vec<f64>], sides: &[f64], eps: f64) -> usize {
    let last: Vec<u64> = sides
        .iter()
        .map(|&s| ((s / eps).ceil() as u64).saturating_sub(1))
        .collect();
    let cells: HashSet<Vec<u64>> = shifted
        .par_iter()
        .map(|p| {
            p.iter()
                .zip(&last)
                .map(|(&x, &hi)| ((x / eps).floor() as u64).min(hi))
                .collect()
        })
        .collect();
    cells.len()
}

pub fn estimate_id_boxcount(
    pc: &PointCloud,
    n_scales: usize,
    scale_decay: f64,
) -> Result<IdEstimate> {
    let n = pc.len();
    if n < 2 {
        return Err(Error::Size(format!(
            "box counting needs at least 2 points, got {n}"
        )));
    }
    if n_scales < 2 {
        return Err(Error::Parameter(format!(
            "need at least 2 scales, got {n_scales}"
        )));
    }
    if !(scale_decay > 0.0 && scale_decay < 1.0) {
        return Err(Error::Parameter(format!(
            "scale decay must lie in (0, 1), got {scale_decay}"
        )));
    }

    let dim = pc.dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for row in pc.rows() {
        for (k, &x) in row.iter().enumerate() {
            lo[k] = lo[k].min(x);
            hi[k] = hi[k].max(x);
        }
    }
    let sides: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| h - l).collect();
    let eps0 = sides.iter().copied().fold(0.0, f64::max);
    if eps0 <= 0.0 {
        return Err(Error::Degenerate(
            "cloud has zero extent in every coordinate".into(),
        ));
    }
    let shifted: Vec<Vec<f64>> = pc
        .rows()
        .map(|r| r.iter().zip(&lo).map(|(x, l)| x - l).collect())
        .collect();

    let scales: Vec<f64> = (1..=n_scales as i32)
        .map(|j| eps0 * scale_decay.powi(j))
        .collect();
    let counts: Vec<usize> = scales
        .iter()
        .map(|&e| occupied_cells(&shifted, &sides, e))
        .collect();

    let xs: Vec<f64> = scales.iter().map(|e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let (slope, r_squared) = linear_fit(&xs, &ys);
    if !slope.is_finite() || slope <= 0.0 {
        return Err(Error::Degenerate(format!(
            "box counts do not grow with resolution (slope {slope})"
        )));
    }
    Ok(IdEstimate {
        value: slope,
        method: IdMethod::BoxCount,
        n_used: n,
        diagnostics: IdDiagnostics::BoxCount {
            scales,
            counts,
            r_squared,
        },
    })
}

/// Ordinary least squares with intercept; returns (slope, R²).
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    (slope, r2)
}
