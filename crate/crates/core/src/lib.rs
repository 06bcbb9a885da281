//! 2-Mapper and multiscale 2-Mapper.
//!
//! The pipeline: a [`PointCloud`] is pushed through a [`Lens`], the lens image
//! is covered by a cubical cover (or a [`Tower`] of them), each cover-set
//! preimage is clustered with DBSCAN, and the nerve of the resulting
//! [`ClusterCover`] is truncated to dimension two. Over a tower, consecutive
//! complexes are aligned into a [`FilteredComplex`] whose Z/2 [`Barcode`]
//! guides the choice of cover parameters.

pub mod clustering;
pub mod cover;
pub mod exec;
pub mod export;
pub mod multiscale;
pub mod nerve;
pub mod persistence;
pub mod pointcloud;
pub mod simplex;

mod error;

pub use clustering::{cluster_cover, cluster_map, dbscan, ClusterCover, ClusterNode, DbscanParams};
pub use cover::{
    bounding_box, build_cubical_cover, build_tower, BoundingBox, CubicalCoverSpec, Schedule, Tower, TowerMode,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use multiscale::{build_multiscale, complexity_probe, MultiscaleResult};
pub use nerve::{betti, build_two_mapper, one_skeleton, TwoMapperComplex};
pub use persistence::{reduce, Barcode, BettiCurve};
pub use pointcloud::{apply_lens, generate_klein_bottle, generate_torus, load_csv, Lens, LensImage, PointCloud, Points};
pub use simplex::{FilteredComplex, Simplex};
