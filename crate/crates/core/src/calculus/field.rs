use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lie::AlgebraVector;
use crate::models::{BundlePoint, GaugeGeometry, Geometry, MutationGeometry};
use crate::numeric::{try_central_diff4, Vector};

/// Stencil step for derivatives along frame curves.
pub const FD_STEP: f64 = 1e-5;

type FieldFn = Arc<dyn Fn(&BundlePoint) -> Result<Vector> + Send + Sync>;

/// A vector field on the base, represented on the bundle by its m-valued,
/// H-equivariant coordinate function: `F(p h) = Ad_{h^-1} F(p)`.
#[derive(Clone)]
pub enum EquivariantField {
    /// Constant coordinates. Not equivariant unless zero; kept for the closed
    /// form of the covariant derivative.
    Constant(Vector),
    Function(FieldFn),
}

impl fmt::Debug for EquivariantField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquivariantField::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            EquivariantField::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl EquivariantField {
    pub fn constant(v: Vector) -> Self {
        EquivariantField::Constant(v)
    }

    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(&BundlePoint) -> Result<Vector> + Send + Sync + 'static,
    {
        EquivariantField::Function(Arc::new(f))
    }

    /// The field induced by left multiplication with `exp(t W)` on the bundle
    /// group, `W` in bundle-algebra coordinates: `F(p) = sigma(Ad_{p^-1} W)_m`.
    pub fn killing(geometry: &MutationGeometry, w: &AlgebraVector) -> Self {
        let g = geometry.clone();
        let w = w.clone();
        Self::from_fn(move |p| {
            let BundlePoint::Group(p) = p else {
                return Err(Error::FieldError("expected a group point".into()));
            };
            let p_inv = p
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::FieldError("singular bundle point".into()))?;
            let v = g
                .bundle_algebra()
                .coords_of(&(&p_inv * g.bundle_algebra().matrix_of(&w) * p))?;
            Ok(g.model().m_part(&g.sigma(&v)))
        })
    }

    /// Extends chart data `f(x)`, read at `h = 1`, equivariantly over `H`.
    pub fn from_section<F>(geometry: &GaugeGeometry, f: F) -> Self
    where
        F: Fn(&Vector) -> Result<Vector> + Send + Sync + 'static,
    {
        let model = geometry.model().clone();
        Self::from_fn(move |p| {
            let BundlePoint::Chart { x, h } = p else {
                return Err(Error::FieldError("expected a chart point".into()));
            };
            let h_inv = h
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::FieldError("singular structure-group element".into()))?;
            let v = model.algebra().adjoint(&h_inv, &model.from_m(&f(x)?))?;
            Ok(model.m_part(&v))
        })
    }

    pub fn eval(&self, p: &BundlePoint) -> Result<Vector> {
        match self {
            EquivariantField::Constant(v) => Ok(v.clone()),
            EquivariantField::Function(f) => f(p).map_err(|e| match e {
                Error::FieldError(_) => e,
                other => Error::FieldError(other.to_string()),
            }),
        }
    }
}

/// `[F, xi_h]` read in m.
fn rotation_term(geometry: &Geometry, f: &Vector, xi: &AlgebraVector) -> Result<Vector> {
    let pair = geometry.model();
    let b = pair
        .algebra()
        .bracket(&pair.from_m(f), &pair.project_h(xi))?;
    Ok(pair.m_part(&b))
}

/// `nabla_xi F = d/dt F(p exp(t omega^-1 xi)) - [F(p), xi_h]`.
pub fn covariant_derivative(
    geometry: &Geometry,
    point: &BundlePoint,
    direction: &AlgebraVector,
    field: &EquivariantField,
) -> Result<Vector> {
    covariant_derivative_with_step(geometry, point, direction, field, FD_STEP)
}

pub fn covariant_derivative_with_step(
    geometry: &Geometry,
    point: &BundlePoint,
    direction: &AlgebraVector,
    field: &EquivariantField,
    step: f64,
) -> Result<Vector> {
    let f0 = field.eval(point)?;
    let turn = rotation_term(geometry, &f0, direction)?;
    if let EquivariantField::Constant(_) = field {
        return Ok(-turn);
    }
    let slope = try_central_diff4(|t| field.eval(&geometry.flow(point, direction, t)?), step)?;
    Ok(slope - turn)
}

/// Compares the derivative of `F` along the vertical curve `p exp(t xi)`
/// with `[F(p), xi]`; returns the max-norm difference.
pub fn star_relation_residual(
    geometry: &Geometry,
    point: &BundlePoint,
    vertical: &AlgebraVector,
    field: &EquivariantField,
) -> Result<f64> {
    let pair = geometry.model();
    if pair.m_part(vertical).amax() != 0.0 {
        return Err(Error::DomainError("direction must lie in h".into()));
    }
    let slope = try_central_diff4(|t| field.eval(&geometry.flow(point, vertical, t)?), FD_STEP)?;
    let expected = rotation_term(geometry, &field.eval(point)?, vertical)?;
    Ok((slope - expected).amax())
}
