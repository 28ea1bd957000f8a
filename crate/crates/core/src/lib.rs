//! Reductive Cartan geometries on matrix Lie groups.
//!
//! Geometries come in two concrete forms: *mutations* (a bundle group `P`
//! with a linear isomorphism `sigma: Lie(P) -> g`, covering Klein models and
//! the hyperboloid model of hyperbolic space) and *gauges* (a chart with a
//! `g`-valued connection form, usually built from a metric). On top of those
//! the crate computes curvature and torsion, the covariant derivative,
//! geodesics, parallel transport, developments and Jacobi fields, and runs
//! numerical probes of completeness, geodesic connectivity and geodesic maps.

pub mod analysis;
pub mod calculus;
pub mod error;
pub mod lie;
pub mod models;
pub mod numeric;
pub mod output;
pub mod par;
pub mod transport;

pub use error::{Error, Result};
pub use lie::{AlgebraVector, MatrixAlgebra, ModelPair};
pub use models::{catalog, BundlePoint, Geometry, Tangent};
pub use par::Execution;
