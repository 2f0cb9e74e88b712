//! Seeded point-cloud generators with known topology and dimension.
//!
//! All randomness comes from a ChaCha8 stream seeded with [`ShapeSpec::seed`]
//! (`rand_chacha::ChaCha8Rng::seed_from_u64`), so a shape spec always produces the
//! same cloud bit for bit.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

/// Torus radii: distance from the centre to the tube centre, and tube radius.
pub const TORUS_MAJOR: f64 = 2.0;
pub const TORUS_MINOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    /// Unit circle in the plane.
    Circle,
    /// Unit 2-sphere in R³.
    Sphere,
    /// Torus in R³ with radii [`TORUS_MAJOR`] and [`TORUS_MINOR`].
    Torus,
    /// A 2-D strip rolled into a spiral in R³.
    SwissRoll,
    /// Uniform in `[0, 1]^d`.
    UniformCube(usize),
    /// Standard normal in `R^d`.
    GaussianBlob(usize),
}

impl ShapeKind {
    /// Parses a kind name; `dim` is used by the cube and blob kinds.
    pub fn parse(name: &str, dim: usize) -> Result<Self> {
        Ok(match name {
            "circle" => ShapeKind::Circle,
            "sphere" => ShapeKind::Sphere,
            "torus" => ShapeKind::Torus,
            "swiss-roll" => ShapeKind::SwissRoll,
            "uniform-cube" => ShapeKind::UniformCube(dim),
            "gaussian-blob" => ShapeKind::GaussianBlob(dim),
            other => return Err(Error::Parameter(format!("unknown shape {other:?}"))),
        })
    }

    pub fn ambient_dim(self) -> usize {
        match self {
            ShapeKind::Circle => 2,
            ShapeKind::Sphere | ShapeKind::Torus | ShapeKind::SwissRoll => 3,
            ShapeKind::UniformCube(d) | ShapeKind::GaussianBlob(d) => d,
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeKind::Circle => f.write_str("circle"),
            ShapeKind::Sphere => f.write_str("sphere"),
            ShapeKind::Torus => f.write_str("torus"),
            ShapeKind::SwissRoll => f.write_str("swiss-roll"),
            ShapeKind::UniformCube(d) => write!(f, "uniform-cube({d})"),
            ShapeKind::GaussianBlob(d) => write!(f, "gaussian-blob({d})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub n: usize,
    /// Standard deviation of the isotropic Gaussian noise added to every
    /// coordinate.
    pub noise: f64,
    pub seed: u64,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, n: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            noise: 0.0,
            seed,
        }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Parameter("shape needs at least one point".into()));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::Parameter(format!(
                "noise must be finite and >= 0, got {}",
                self.noise
            )));
        }
        if self.kind.ambient_dim() == 0 {
            return Err(Error::Parameter(format!(
                "{} needs a dimension of at least 1",
                self.kind
            )));
        }
        Ok(())
    }
}

pub fn generate(spec: &ShapeSpec) -> Result<PointCloud> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dim = spec.kind.ambient_dim();
    let mut coords = Vec::with_capacity(spec.n * dim);

    for _ in 0..spec.n {
        match spec.kind {
            ShapeKind::Circle => {
                let t = rng.random_range(0.0..TAU);
                coords.extend_from_slice(&[t.cos(), t.sin()]);
            }
            ShapeKind::Sphere => {
                let v = loop {
                    let g: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
                    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm > 1e-12 {
                        break g.map(|x| x / norm);
                    }
                };
                coords.extend_from_slice(&v);
            }
            ShapeKind::Torus => {
                // Area element is proportional to R + r cos(tube angle).
                let (tube, around) = loop {
                    let tube = rng.random_range(0.0..TAU);
                    let around = rng.random_range(0.0..TAU);
                    let accept = rng.random_range(0.0..1.0)
                        < (TORUS_MAJOR + TORUS_MINOR * tube.cos()) / (TORUS_MAJOR + TORUS_MINOR);
                    if accept {
                        break (tube, around);
                    }
                };
                let ring = TORUS_MAJOR + TORUS_MINOR * tube.cos();
                coords.extend_from_slice(&[
                    ring * around.cos(),
                    ring * around.sin(),
                    TORUS_MINOR * tube.sin(),
                ]);
            }
            ShapeKind::SwissRoll => {
                let t = 1.5 * PI * (1.0 + 2.0 * rng.random_range(0.0..1.0));
                let h = 21.0 * rng.random_range(0.0..1.0);
                coords.extend_from_slice(&[t * t.cos(), h, t * t.sin()]);
            }
            ShapeKind::UniformCube(d) => {
                coords.extend((0..d).map(|_| rng.random_range(0.0..1.0)));
            }
            ShapeKind::GaussianBlob(d) => {
                coords.extend((0..d).map(|_| -> f64 { StandardNormal.sample(&mut rng) }));
            }
        }
    }

    if spec.noise > 0.0 {
        let normal = Normal::new(0.0, spec.noise)
            .map_err(|e| Error::Parameter(format!("noise distribution: {e}")))?;
        for c in &mut coords {
            *c += normal.sample(&mut rng);
        }
    }
    PointCloud::from_flat(coords, dim)
}

/// Points on the unit circle at the given angles.
pub fn circle_from_angles(angles: &[f64]) -> Result<PointCloud> {
    let rows: Vec<[f64; 2]> = angles.iter().map(|t| [t.cos(), t.sin()]).collect();
    PointCloud::from_rows(&rows)
}
