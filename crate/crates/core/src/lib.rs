//! Quantifying the manifold behind a point cloud.
//!
//! The crate computes Vietoris–Rips persistent homology (H0–H2) with scalar
//! diagram summaries, intrinsic-dimension estimates, and metric trajectories
//! across a series of snapshot clouds measured against a reference cloud.
//!
//! ```
//! use manifold_quant::prelude::*;
//!
//! let pc = generate(&ShapeSpec::new(ShapeKind::Circle, 60, 7)).unwrap();
//! let dm = pairwise_distances(&pc, Metric::Euclidean);
//! let f = build_rips(&dm, 2, EpsMax::Auto).unwrap();
//! let diagrams = compute_persistence(&f).unwrap();
//! assert_eq!(diagrams[0].essential_count(), 1);
//! let loop_size = wasserstein_to_trivial(&diagrams[1], 1.0, InfinitePolicy::Excluded).unwrap();
//! assert!(loop_size > 0.0);
//! ```

pub mod error;
pub mod geometry;
pub mod intrinsic_dim;
pub mod matching;
pub mod metrics;
pub mod numfmt;
pub mod persistence;
pub mod rips;
pub mod shapes;
pub mod tracker;
pub mod union_find;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::geometry::{
        flatten_images, load_pointcloud, load_pointcloud_auto, pairwise_distances, save_pointcloud,
        subsample, CloudFormat, DistanceMatrix, Image, Metric, PixelScale, PointCloud,
    };
    pub use crate::intrinsic_dim::{
        estimate_id_2nn, estimate_id_boxcount, IdEstimate, IdMethod, TwoNnMethod,
    };
    pub use crate::metrics::{
        bottleneck, bottleneck_to_trivial, persistence_entropy, summarize, wasserstein,
        wasserstein_to_trivial, DiagramSummary, InfinitePolicy,
    };
    pub use crate::persistence::{
        boundary, compute_h0_unionfind, compute_persistence, PersistenceDiagram, PersistencePair,
    };
    pub use crate::rips::{build_rips, EpsMax, FilteredSimplex, Filtration};
    pub use crate::shapes::{generate, ShapeKind, ShapeSpec};
    pub use crate::tracker::{
        analyze_snapshot, export_report, track, track_clouds, AnalysisConfig, ConvergenceReport,
        MetricVector, PolicyKind, ReportFormat,
    };
}
