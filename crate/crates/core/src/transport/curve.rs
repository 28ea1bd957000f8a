use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lie::AlgebraVector;
use crate::models::{BundlePoint, Geometry};
use crate::numeric::Vector;

/// Stencil step for connection values of curves without a closed form.
pub const VELOCITY_STEP: f64 = 1e-5;

/// A curve in the bundle over a base curve.
pub trait LiftedCurve: Send + Sync {
    fn span(&self) -> [f64; 2];

    fn point(&self, geometry: &Geometry, t: f64) -> Result<BundlePoint>;

    /// `omega` of the velocity at time `t`.
    fn omega(&self, geometry: &Geometry, t: f64) -> Result<AlgebraVector> {
        let p = self.point(geometry, t)?;
        let v = geometry.curve_tangent(|s| self.point(geometry, s), t, VELOCITY_STEP)?;
        geometry.connection_at(&p, &v)
    }

    fn covers(&self, t: f64) -> bool {
        let [a, b] = self.span();
        t >= a.min(b) - 1e-12 && t <= a.max(b) + 1e-12
    }
}

/// `t -> p exp((t - t0) omega^-1(X)) exp((t - t0) Y)` with `X` in m and an
/// optional twist `Y` in h. Without the twist this is the horizontal lift of
/// a geodesic.
#[derive(Clone, Debug)]
pub struct LiftedGeodesic {
    pub base: BundlePoint,
    pub direction: Vector,
    pub twist: Option<Vector>,
    pub span: [f64; 2],
}

impl LiftedGeodesic {
    pub fn new(base: BundlePoint, direction: Vector, span: [f64; 2]) -> Self {
        Self {
            base,
            direction,
            twist: None,
            span,
        }
    }

    pub fn with_twist(mut self, twist: Vector) -> Self {
        self.twist = Some(twist);
        self
    }

    fn elapsed(&self, t: f64) -> f64 {
        t - self.span[0]
    }
}

impl LiftedCurve for LiftedGeodesic {
    fn span(&self) -> [f64; 2] {
        self.span
    }

    fn point(&self, geometry: &Geometry, t: f64) -> Result<BundlePoint> {
        let s = self.elapsed(t);
        let xi = geometry.model().from_m(&self.direction);
        let p = geometry.flow(&self.base, &xi, s)?;
        match &self.twist {
            None => Ok(p),
            Some(y) => geometry.right_act(&p, &geometry.h_element(&(y * s))?),
        }
    }

    fn omega(&self, geometry: &Geometry, t: f64) -> Result<AlgebraVector> {
        let pair = geometry.model();
        let xi = pair.from_m(&self.direction);
        match &self.twist {
            None => Ok(xi),
            Some(y) => {
                let s = self.elapsed(t);
                let k_inv = geometry.h_element(&(y * (-s)))?.model;
                Ok(pair.algebra().adjoint(&k_inv, &xi)? + pair.from_h(y))
            }
        }
    }
}

type PointFn = Arc<dyn Fn(f64) -> Result<BundlePoint> + Send + Sync>;
type OmegaFn = Arc<dyn Fn(f64) -> Result<AlgebraVector> + Send + Sync>;

/// A curve given by a closure, with an optional closed form for `omega`.
#[derive(Clone)]
pub struct FnCurve {
    span: [f64; 2],
    point: PointFn,
    omega: Option<OmegaFn>,
}

impl FnCurve {
    pub fn new<F>(span: [f64; 2], point: F) -> Self
    where
        F: Fn(f64) -> Result<BundlePoint> + Send + Sync + 'static,
    {
        Self {
            span,
            point: Arc::new(point),
            omega: None,
        }
    }

    pub fn with_omega<F>(mut self, omega: F) -> Self
    where
        F: Fn(f64) -> Result<AlgebraVector> + Send + Sync + 'static,
    {
        self.omega = Some(Arc::new(omega));
        self
    }
}

impl LiftedCurve for FnCurve {
    fn span(&self) -> [f64; 2] {
        self.span
    }

    fn point(&self, _geometry: &Geometry, t: f64) -> Result<BundlePoint> {
        (self.point)(t)
    }

    fn omega(&self, geometry: &Geometry, t: f64) -> Result<AlgebraVector> {
        match &self.omega {
            Some(f) => f(t),
            None => {
                let p = (self.point)(t)?;
                let v = geometry.curve_tangent(|s| (self.point)(s), t, VELOCITY_STEP)?;
                geometry.connection_at(&p, &v)
            }
        }
    }
}

/// Curves traversed one after another; segment `k` runs on its own span,
/// shifted to start where segment `k - 1` ends.
pub struct CompositeCurve {
    segments: Vec<Box<dyn LiftedCurve>>,
    starts: Vec<f64>,
    end: f64,
}

impl CompositeCurve {
    pub fn new(start: f64, segments: Vec<Box<dyn LiftedCurve>>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::DomainError("composite curve needs a segment".into()));
        }
        let mut starts = Vec::with_capacity(segments.len());
        let mut t = start;
        for s in &segments {
            let [a, b] = s.span();
            if b < a {
                return Err(Error::DomainError("segment spans must increase".into()));
            }
            starts.push(t);
            t += b - a;
        }
        Ok(Self {
            segments,
            starts,
            end: t,
        })
    }

    /// Chained geodesic arcs `(direction, length)`, each direction read in
    /// the frame reached at the end of the previous arc.
    pub fn geodesic_polygon(
        geometry: &Geometry,
        start: BundlePoint,
        arcs: &[(Vector, f64)],
    ) -> Result<Self> {
        let mut p = start;
        let mut segments: Vec<Box<dyn LiftedCurve>> = Vec::new();
        for (dir, len) in arcs {
            let arc = LiftedGeodesic::new(p.clone(), dir.clone(), [0.0, *len]);
            p = arc.point(geometry, *len)?;
            segments.push(Box::new(arc));
        }
        Self::new(0.0, segments)
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let k = self.starts.iter().rposition(|&s| t >= s).unwrap_or(0);
        (k, t - self.starts[k] + self.segments[k].span()[0])
    }

    pub fn segment_starts(&self) -> &[f64] {
        &self.starts
    }
}

impl LiftedCurve for CompositeCurve {
    fn span(&self) -> [f64; 2] {
        [self.starts[0], self.end]
    }

    fn point(&self, geometry: &Geometry, t: f64) -> Result<BundlePoint> {
        let (k, local) = self.locate(t);
        self.segments[k].point(geometry, local)
    }

    fn omega(&self, geometry: &Geometry, t: f64) -> Result<AlgebraVector> {
        let (k, local) = self.locate(t);
        self.segments[k].omega(geometry, local)
    }
}
