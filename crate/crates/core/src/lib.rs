//! Stationary Poisson hyperplane processes and their intersection processes.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: hyperplanes, affine flats, convex windows, halfspace polytopes.
//! * [`process`]: the seeded, lazily extended hyperplane sampler ([`WorldOracle`]).
//! * [`intersection`]: intersection points and the measures `Φ_m(B)`.
//! * [`reconstruct`]: recovery of every hyperplane hitting a convex body from
//!   intersection points observed outside of it, with its stopping radius.
//! * [`stats`]: Monte Carlo estimators (variance scaling, pair correlation,
//!   stopping tails, Cox/thinning randomizations, normality diagnostics).
//! * [`report`]: config hashing and CSV/JSON artifact helpers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod intersection;
pub mod linalg;
pub mod process;
pub mod reconstruct;
pub mod report;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::{ConvexBody, Flat, Halfspace, Hyperplane, Point, Polytope};
pub use intersection::{IntersectionMeasureSample, IntersectionPoint};
pub use process::{DirectionalModel, Directions, WorldOracle};
pub use reconstruct::{ReconstructionParams, ReconstructionResult};
