//! Concrete Cartan geometries: mutation models over a matrix bundle group
//! and gauge models over a single chart.

pub mod catalog;
pub mod coframe;
pub mod expr;
pub mod gauge;
pub mod json;
pub mod mutation;

use std::sync::Arc;

use rand::Rng;

pub use catalog::{catalog, catalog_names};
pub use expr::{parse_expression, Dual, Expression, Real};
pub use gauge::{
    build_gauge_from_metric, build_gauge_from_metric_with, ColumnFn, DerivativeMode, Domain,
    GaugeGeometry, GaugeSource, SectionKind,
};
pub use mutation::{build_mutation, MutationGeometry};

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, ModelPair};
use crate::numeric::{Mat, Vector};

/// A point of the Cartan bundle.
#[derive(Clone, Debug, PartialEq)]
pub enum BundlePoint {
    /// An element of the bundle group of a mutation model.
    Group(Mat),
    /// A chart point with a structure-group element, for gauge models.
    Chart { x: Vector, h: Mat },
}

/// A tangent vector to the bundle, in the representation of its point.
#[derive(Clone, Debug, PartialEq)]
pub enum Tangent {
    Group(Mat),
    Chart { xdot: Vector, hdot: Mat },
}

impl Tangent {
    pub fn scale(&self, s: f64) -> Tangent {
        match self {
            Tangent::Group(m) => Tangent::Group(m * s),
            Tangent::Chart { xdot, hdot } => Tangent::Chart {
                xdot: xdot * s,
                hdot: hdot * s,
            },
        }
    }

    pub fn add(&self, other: &Tangent) -> Result<Tangent> {
        match (self, other) {
            (Tangent::Group(a), Tangent::Group(b)) => Ok(Tangent::Group(a + b)),
            (Tangent::Chart { xdot: a, hdot: ha }, Tangent::Chart { xdot: b, hdot: hb }) => {
                Ok(Tangent::Chart {
                    xdot: a + b,
                    hdot: ha + hb,
                })
            }
            _ => Err(Error::Unsupported("mixed tangent representations".into())),
        }
    }
}

/// A structure-group element in the bundle group and in the model group.
/// The two coincide for gauge models and Klein geometries.
#[derive(Clone, Debug, PartialEq)]
pub struct HElement {
    pub bundle: Mat,
    pub model: Mat,
}

#[derive(Clone, Debug)]
pub enum Geometry {
    Mutation(MutationGeometry),
    Gauge(GaugeGeometry),
}

impl From<MutationGeometry> for Geometry {
    fn from(g: MutationGeometry) -> Self {
        Geometry::Mutation(g)
    }
}

impl From<GaugeGeometry> for Geometry {
    fn from(g: GaugeGeometry) -> Self {
        Geometry::Gauge(g)
    }
}

fn wrong_point() -> Error {
    Error::Unsupported("bundle point does not match the geometry's representation".into())
}

/// Chart version of a mutation geometry through a group-valued section.
pub fn gauge_from_section(
    geometry: &MutationGeometry,
    kind: SectionKind,
    domain: Domain,
) -> Result<GaugeGeometry> {
    GaugeGeometry::from_section(Arc::new(geometry.clone()), kind, domain)
}

impl Geometry {
    pub fn name(&self) -> &str {
        match self {
            Geometry::Mutation(g) => g.name(),
            Geometry::Gauge(g) => g.name(),
        }
    }

    pub fn model(&self) -> &ModelPair {
        match self {
            Geometry::Mutation(g) => g.model(),
            Geometry::Gauge(g) => g.model(),
        }
    }

    pub fn as_mutation(&self) -> Option<&MutationGeometry> {
        match self {
            Geometry::Mutation(g) => Some(g),
            Geometry::Gauge(_) => None,
        }
    }

    pub fn as_gauge(&self) -> Option<&GaugeGeometry> {
        match self {
            Geometry::Gauge(g) => Some(g),
            Geometry::Mutation(_) => None,
        }
    }

    pub fn is_klein(&self) -> bool {
        self.as_mutation().is_some_and(|g| g.is_klein())
    }

    pub fn dim_m(&self) -> usize {
        self.model().dim_m()
    }

    pub fn dim_h(&self) -> usize {
        self.model().dim_h()
    }

    /// The default start point: the identity, or the chart origin.
    pub fn origin_point(&self) -> BundlePoint {
        match self {
            Geometry::Mutation(g) => g.identity_point(),
            Geometry::Gauge(g) => g.origin_point(),
        }
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BundlePoint> {
        match self {
            Geometry::Mutation(g) => g.random_point(rng),
            Geometry::Gauge(g) => g.random_point(rng),
        }
    }

    /// Re-projects a point onto its group and checks the chart domain.
    pub fn validate_point(&self, p: &BundlePoint) -> Result<BundlePoint> {
        match (self, p) {
            (Geometry::Mutation(g), BundlePoint::Group(m)) => g.point(m.clone()),
            (Geometry::Gauge(g), BundlePoint::Chart { x, h }) => g.point(x.clone(), h.clone()),
            _ => Err(wrong_point()),
        }
    }

    pub fn h_element(&self, y: &Vector) -> Result<HElement> {
        match self {
            Geometry::Mutation(g) => g.h_element(y),
            Geometry::Gauge(g) => g.h_element(y),
        }
    }

    pub fn h_samples(&self) -> Result<Vec<HElement>> {
        match self {
            Geometry::Mutation(g) => g.h_samples(),
            Geometry::Gauge(g) => g.h_samples(),
        }
    }

    /// `omega` at `p` applied to a tangent vector.
    pub fn connection_at(&self, p: &BundlePoint, t: &Tangent) -> Result<AlgebraVector> {
        match (self, p, t) {
            (Geometry::Mutation(g), BundlePoint::Group(p), Tangent::Group(v)) => g.connection(p, v),
            (Geometry::Gauge(g), BundlePoint::Chart { x, h }, Tangent::Chart { xdot, hdot }) => {
                g.connection(x, h, xdot, hdot)
            }
            _ => Err(wrong_point()),
        }
    }

    /// `omega_p^-1(xi)`.
    pub fn connection_inverse(&self, p: &BundlePoint, xi: &AlgebraVector) -> Result<Tangent> {
        match (self, p) {
            (Geometry::Mutation(g), BundlePoint::Group(p)) => Ok(g.connection_inverse(p, xi)),
            (Geometry::Gauge(g), BundlePoint::Chart { x, h }) => g.connection_inverse(x, h, xi),
            _ => Err(wrong_point()),
        }
    }

    /// Flow of the frame field `omega^-1(xi)` through `p` for time `t`.
    pub fn flow(&self, p: &BundlePoint, xi: &AlgebraVector, t: f64) -> Result<BundlePoint> {
        match (self, p) {
            (Geometry::Mutation(g), BundlePoint::Group(p)) => {
                Ok(BundlePoint::Group(g.flow(p, xi, t)?))
            }
            (Geometry::Gauge(g), BundlePoint::Chart { x, h }) => {
                let (x, h) = g.flow(x, h, xi, t)?;
                Ok(BundlePoint::Chart { x, h })
            }
            _ => Err(wrong_point()),
        }
    }

    /// Right action of the structure group.
    pub fn right_act(&self, p: &BundlePoint, h: &HElement) -> Result<BundlePoint> {
        match (self, p) {
            (Geometry::Mutation(_), BundlePoint::Group(p)) => Ok(BundlePoint::Group(p * &h.bundle)),
            (Geometry::Gauge(_), BundlePoint::Chart { x, h: k }) => Ok(BundlePoint::Chart {
                x: x.clone(),
                h: k * &h.model,
            }),
            _ => Err(wrong_point()),
        }
    }

    /// Push-forward of a tangent under right translation by `h`.
    pub fn right_act_tangent(&self, t: &Tangent, h: &HElement) -> Tangent {
        match t {
            Tangent::Group(v) => Tangent::Group(v * &h.bundle),
            Tangent::Chart { xdot, hdot } => Tangent::Chart {
                xdot: xdot.clone(),
                hdot: hdot * &h.model,
            },
        }
    }

    /// A basis of the tangent space at `p`.
    pub fn tangent_basis(&self, p: &BundlePoint) -> Result<Vec<Tangent>> {
        match (self, p) {
            (Geometry::Mutation(g), BundlePoint::Group(p)) => Ok(g
                .bundle_algebra()
                .basis()
                .iter()
                .map(|b| Tangent::Group(p * b))
                .collect()),
            (Geometry::Gauge(g), BundlePoint::Chart { x, h }) => {
                let d = x.len();
                let n = h.nrows();
                let mut out: Vec<Tangent> = (0..d)
                    .map(|i| Tangent::Chart {
                        xdot: Vector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 }),
                        hdot: Mat::zeros(n, n),
                    })
                    .collect();
                let model = g.model();
                for &k in model.h_indices() {
                    out.push(Tangent::Chart {
                        xdot: Vector::zeros(d),
                        hdot: h * &model.algebra().basis()[k],
                    });
                }
                Ok(out)
            }
            _ => Err(wrong_point()),
        }
    }

    /// Base-manifold coordinates of a bundle point.
    pub fn base_coords(&self, p: &BundlePoint) -> Result<Vector> {
        match (self, p) {
            (Geometry::Mutation(g), BundlePoint::Group(p)) => Ok(g.base_projection().apply(p)),
            (Geometry::Gauge(g), BundlePoint::Chart { x, h }) => g.base_coords(x, h),
            _ => Err(wrong_point()),
        }
    }

    /// The group matrix recorded in traces for a bundle point.
    pub fn frame(&self, p: &BundlePoint) -> Result<Mat> {
        match (self, p) {
            (Geometry::Mutation(_), BundlePoint::Group(p)) => Ok(p.clone()),
            (Geometry::Gauge(g), BundlePoint::Chart { x, h }) => g.frame(x, h),
            _ => Err(wrong_point()),
        }
    }

    /// Violation of the defining relations by a recorded frame.
    pub fn frame_residual(&self, frame: &Mat) -> f64 {
        match self {
            Geometry::Mutation(g) => g.bundle_algebra().group().residual(frame),
            Geometry::Gauge(g) => g.model().algebra().group().residual(frame),
        }
    }

    /// Fourth-order central difference of a bundle curve, as a tangent.
    pub fn curve_tangent<F>(&self, curve: F, t: f64, step: f64) -> Result<Tangent>
    where
        F: Fn(f64) -> Result<BundlePoint>,
    {
        let pts = [
            curve(t - 2.0 * step)?,
            curve(t - step)?,
            curve(t + step)?,
            curve(t + 2.0 * step)?,
        ];
        let w = [1.0, -8.0, 8.0, -1.0];
        let denom = 12.0 * step;
        match &pts[0] {
            BundlePoint::Group(m0) => {
                let mut acc = Mat::zeros(m0.nrows(), m0.ncols());
                for (p, wi) in pts.iter().zip(w) {
                    let BundlePoint::Group(m) = p else {
                        return Err(wrong_point());
                    };
                    acc += m * wi;
                }
                Ok(Tangent::Group(acc / denom))
            }
            BundlePoint::Chart { x: x0, h: h0 } => {
                let mut ax = Vector::zeros(x0.len());
                let mut ah = Mat::zeros(h0.nrows(), h0.ncols());
                for (p, wi) in pts.iter().zip(w) {
                    let BundlePoint::Chart { x, h } = p else {
                        return Err(wrong_point());
                    };
                    ax += x * wi;
                    ah += h * wi;
                }
                Ok(Tangent::Chart {
                    xdot: ax / denom,
                    hdot: ah / denom,
                })
            }
        }
    }
}
