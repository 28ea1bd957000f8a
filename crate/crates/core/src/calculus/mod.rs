//! Curvature, torsion and the covariant derivative.

pub mod field;
pub mod identities;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use field::{
    covariant_derivative, covariant_derivative_with_step, star_relation_residual, EquivariantField,
};
pub use identities::{check_structure_identities, IdentityReport};

use crate::error::Result;
use crate::lie::{AlgebraVector, ModelPair};
use crate::models::{BundlePoint, Geometry};
use crate::numeric::Vector;
use crate::par::{self, Execution};

/// Curvature split along `g = m (+) h`. The m-part is the torsion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureValue {
    #[serde(serialize_with = "crate::output::vector")]
    pub omega_m: Vector,
    #[serde(serialize_with = "crate::output::vector")]
    pub omega_h: Vector,
}

impl CurvatureValue {
    pub fn from_algebra(pair: &ModelPair, v: &AlgebraVector) -> Self {
        Self {
            omega_m: pair.m_part(v),
            omega_h: pair.h_part(v),
        }
    }

    pub fn to_algebra(&self, pair: &ModelPair) -> AlgebraVector {
        pair.assemble(&self.omega_m, &self.omega_h)
    }

    pub fn max_abs(&self) -> f64 {
        self.omega_m.amax().max(self.omega_h.amax())
    }
}

/// `Omega(omega^-1 X, omega^-1 Y)` at a bundle point.
pub fn curvature(
    geometry: &Geometry,
    point: &BundlePoint,
    x: &AlgebraVector,
    y: &AlgebraVector,
) -> Result<CurvatureValue> {
    let value = match (geometry, point) {
        (Geometry::Mutation(g), BundlePoint::Group(_)) => g.curvature(x, y)?,
        (Geometry::Gauge(g), BundlePoint::Chart { x: c, h }) => g.curvature(c, h, x, y)?,
        _ => {
            return Err(crate::Error::Unsupported(
                "bundle point does not match the geometry's representation".into(),
            ))
        }
    };
    Ok(CurvatureValue::from_algebra(geometry.model(), &value))
}

/// The m-part of the curvature.
pub fn torsion(
    geometry: &Geometry,
    point: &BundlePoint,
    x: &AlgebraVector,
    y: &AlgebraVector,
) -> Result<Vector> {
    Ok(curvature(geometry, point, x, y)?.omega_m)
}

pub const CONSTANT_CURVATURE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub samples: usize,
    pub seed: u64,
    /// Largest max-norm difference between curvature values at two samples.
    pub deviation: f64,
    pub tolerance: f64,
    pub constant: bool,
    /// Curvature on each m-basis pair `(i, j)`, `i < j`, at the first sample.
    pub reference: Vec<CurvatureValue>,
}

fn m_basis_pairs(pair: &ModelPair) -> Vec<(AlgebraVector, AlgebraVector)> {
    let dim = pair.dim();
    let m = pair.m_indices();
    let mut out = Vec::new();
    for a in 0..m.len() {
        for b in (a + 1)..m.len() {
            out.push((
                AlgebraVector::basis(dim, m[a]),
                AlgebraVector::basis(dim, m[b]),
            ));
        }
    }
    out
}

/// Samples the curvature of all m-basis pairs at seeded random points and
/// compares them.
pub fn constant_curvature_probe(
    geometry: &Geometry,
    n_samples: usize,
    seed: u64,
) -> Result<ProbeReport> {
    constant_curvature_probe_with(geometry, n_samples, seed, Execution::default())
}

pub fn constant_curvature_probe_with(
    geometry: &Geometry,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<ProbeReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n_samples.max(2))
        .map(|_| geometry.random_point(&mut rng))
        .collect::<Result<Vec<_>>>()?;
    let pairs = m_basis_pairs(geometry.model());
    let values = par::map(exec, points, |p| {
        pairs
            .iter()
            .map(|(x, y)| curvature(geometry, &p, x, y))
            .collect::<Result<Vec<_>>>()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut deviation = 0.0_f64;
    for k in 0..pairs.len() {
        let first = values[0][k].to_algebra(geometry.model());
        let mut lo = first.coords().clone();
        let mut hi = lo.clone();
        for v in &values[1..] {
            let c = v[k].to_algebra(geometry.model());
            lo = lo.inf(c.coords());
            hi = hi.sup(c.coords());
        }
        deviation = deviation.max((hi - lo).amax());
    }
    Ok(ProbeReport {
        samples: values.len(),
        seed,
        deviation,
        tolerance: CONSTANT_CURVATURE_TOL,
        constant: deviation <= CONSTANT_CURVATURE_TOL,
        reference: values.into_iter().next().unwrap_or_default(),
    })
}
