//! Interacting particle systems coupled on digraph measures.
//!
//! A digraph measure (DGM) assigns to every vertex `x` of a compact vertex
//! space a finite positive measure `eta_x` describing the out-edge mass from
//! `x`. Dynamics driven by finitely many DGMs are represented here by finite
//! particle ensembles: the vertex space is partitioned into `m` cells, each
//! cell carries `n` particles, and both the initial distribution and the DGM
//! fibers are replaced by deterministic `n`-atom empirical approximations.
//! The crate provides
//!
//! * exact bounded-Lipschitz, Kantorovich-Rubinstein and total-variation
//!   distances between discrete measures ([`measure`], [`distance`]),
//! * vertex spaces, reference measures and partition schemes ([`vertex`]),
//! * a catalog of digraph measures and their discretizations ([`dgm`]),
//! * the application models with their invariant regions ([`model`]),
//! * the coupled ODE system, its RK4 integrator, flow maps and the Picard
//!   fixed-point solver ([`solver`]).
//!
//! Everything is deterministic: given identical inputs all routines produce
//! bit-identical outputs. The crate is `no_std`-compatible (enable the `libm`
//! feature and disable `std`); all data lives in `alloc` containers.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("dgmsim-core requires either the `std` or the `libm` feature");

pub(crate) mod float;

pub mod distance;
pub mod dgm;
pub mod lp;
pub mod measure;
pub mod metric;
pub mod model;
pub mod quantile;
pub mod solver;
pub mod vertex;

pub use distance::{bl_distance, d_infinity, kr_distance, product_lift, tv_distance, BlConfig};
pub use measure::{DiscreteMeasure, FiberFunction, MeasureError};
pub use metric::{Metric, MetricPoint};
pub use quantile::{empirical_approximation, MeasureDescriptor, QuantileRule};
pub use vertex::{Cell, Partition, VertexSpace};
