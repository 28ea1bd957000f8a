use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::completeness::sphere_directions;
use crate::calculus::constant_curvature_probe;
use crate::error::{Error, Result};
use crate::models::{BundlePoint, Geometry, MutationGeometry};
use crate::numeric::{Mat, Vector};
use crate::transport::{geodesic, GeodesicSpec};

pub const DEFAULT_T_GRID: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
const PROBE_SAMPLES: usize = 20;

type PointMap = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// A candidate geodesic map: base points are matched by `point_map` and
/// initial velocities by `phi`.
#[derive(Clone)]
pub struct GeodesicMapSpec {
    pub source: Geometry,
    pub target: Geometry,
    pub phi: Mat,
    pub source_base: BundlePoint,
    pub target_base: BundlePoint,
    pub point_map: PointMap,
}

impl GeodesicMapSpec {
    pub fn new<F>(source: Geometry, target: Geometry, phi: Mat, point_map: F) -> Result<Self>
    where
        F: Fn(&Vector) -> Vector + Send + Sync + 'static,
    {
        let (ds, dt) = (source.dim_m(), target.dim_m());
        if phi.shape() != (dt, ds) || ds != dt {
            return Err(Error::InvalidDimension {
                expected: ds,
                found: phi.nrows(),
            });
        }
        if phi.clone().try_inverse().is_none() {
            return Err(Error::NotAnIsomorphism);
        }
        Ok(Self {
            source_base: source.origin_point(),
            target_base: target.origin_point(),
            source,
            target,
            phi,
            point_map: Arc::new(point_map),
        })
    }

    /// Same chart coordinates on both sides.
    pub fn identity(source: Geometry, target: Geometry, phi: Mat) -> Result<Self> {
        Self::new(source, target, phi, |x| x.clone())
    }

    pub fn with_bases(mut self, source_base: BundlePoint, target_base: BundlePoint) -> Self {
        self.source_base = source_base;
        self.target_base = target_base;
        self
    }

    /// Target to source, with `phi^-1` and the given inverse point map.
    pub fn reversed<F>(&self, inverse_map: F) -> Result<Self>
    where
        F: Fn(&Vector) -> Vector + Send + Sync + 'static,
    {
        let phi_inv = self
            .phi
            .clone()
            .try_inverse()
            .ok_or(Error::NotAnIsomorphism)?;
        Ok(Self {
            source: self.target.clone(),
            target: self.source.clone(),
            phi: phi_inv,
            source_base: self.target_base.clone(),
            target_base: self.source_base.clone(),
            point_map: Arc::new(inverse_map),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MapReport {
    pub geodesics: usize,
    pub t_grid: Vec<f64>,
    /// Largest max-norm distance between mapped and target geodesic points.
    pub mismatch: f64,
    pub tolerance: f64,
    pub geodesics_match: bool,
    pub source_deviation: f64,
    pub target_deviation: f64,
    pub source_constant: bool,
    pub target_constant: bool,
    /// Constant source curvature implies constant target curvature.
    pub curvature_consistent: bool,
    pub seed: u64,
    pub passed: bool,
}

pub fn verify_geodesic_map(
    spec: &GeodesicMapSpec,
    n_geodesics: usize,
    t_grid: &[f64],
    tol: f64,
    seed: u64,
) -> Result<MapReport> {
    let mut grid: Vec<f64> = t_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let t_max = grid.last().copied().unwrap_or(0.0).max(0.0);
    let chart_step = 1e-3;
    let mut mismatch = 0.0_f64;
    for dir in sphere_directions(spec.source.dim_m(), n_geodesics, seed) {
        let mapped_dir = &spec.phi * &dir;
        let trace_s = geodesic(
            &spec.source,
            &GeodesicSpec::new(spec.source_base.clone(), dir, [0.0, t_max], chart_step),
        )?;
        let trace_t = geodesic(
            &spec.target,
            &GeodesicSpec::new(
                spec.target_base.clone(),
                mapped_dir,
                [0.0, t_max],
                chart_step,
            ),
        )?;
        for &t in &grid {
            let find = |tr: &crate::transport::Trace| {
                tr.samples
                    .iter()
                    .find(|s| (s.t - t).abs() < 1e-9)
                    .map(|s| s.base.clone())
            };
            let (Some(a), Some(b)) = (find(&trace_s), find(&trace_t)) else {
                mismatch = f64::INFINITY;
                continue;
            };
            let image = (spec.point_map)(&a);
            let gap = if image.len() == b.len() {
                (image - b).amax()
            } else {
                f64::INFINITY
            };
            mismatch = mismatch.max(gap);
        }
    }
    let sp = constant_curvature_probe(&spec.source, PROBE_SAMPLES, seed)?;
    let tp = constant_curvature_probe(&spec.target, PROBE_SAMPLES, seed)?;
    let geodesics_match = mismatch <= tol;
    let curvature_consistent = !sp.constant || tp.constant;
    Ok(MapReport {
        geodesics: n_geodesics,
        t_grid: grid,
        mismatch,
        tolerance: tol,
        geodesics_match,
        source_deviation: sp.deviation,
        target_deviation: tp.deviation,
        source_constant: sp.constant,
        target_constant: tp.constant,
        curvature_consistent,
        seed,
        passed: geodesics_match && curvature_consistent,
    })
}

/// Max-norm gap between the target connection and `phi (+) id_h` applied to
/// the source connection, on seeded random tangents of a shared bundle group.
pub fn mutation_relation_residual(
    source: &MutationGeometry,
    target: &MutationGeometry,
    phi: &Mat,
    n: usize,
    seed: u64,
) -> Result<f64> {
    let bundle = source.bundle_algebra();
    if bundle.basis() != target.bundle_algebra().basis() {
        return Err(Error::Unsupported(
            "geometries must share the bundle group".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let BundlePoint::Group(p) = source.random_point(&mut rng)? else {
            unreachable!("mutation points are group elements")
        };
        let a = Vector::from_fn(bundle.dim(), |_, _| StandardNormal.sample(&mut rng));
        let v = &p * bundle.matrix_of(&crate::lie::AlgebraVector::new(a));
        let w = source.connection(&p, &v)?;
        let eta = target.connection(&p, &v)?;
        let sm = source.model();
        let mapped = target
            .model()
            .assemble(&(phi * sm.m_part(&w)), &sm.h_part(&w));
        worst = worst.max((eta.coords() - mapped.coords()).amax());
    }
    Ok(worst)
}
