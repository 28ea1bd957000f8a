//! Numerical check of the torsion and curvature identities for the covariant
//! derivative on mutation geometries.
//!
//! Vector fields are the projections of right-invariant fields `q -> W q` on
//! the bundle group. Their coordinate functions are equivariant, their flows
//! are left multiplications, and their Lie brackets are computed here by
//! differentiating the matrix-valued fields, independently of any structure
//! constants.

use serde::Serialize;

use super::curvature;
use super::field::{EquivariantField, FD_STEP};
use crate::error::{Error, Result};
use crate::lie::{group_exp, AlgebraVector};
use crate::models::{BundlePoint, Geometry, MutationGeometry};
use crate::numeric::{try_central_diff4, try_central_diff4_mat, Mat, Vector};

/// Outer step when differentiating a field that is itself a difference
/// quotient; the inner step stays at the default.
pub const NESTED_STEP: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    #[serde(serialize_with = "crate::output::vector")]
    pub first_lhs: Vector,
    #[serde(serialize_with = "crate::output::vector")]
    pub first_rhs: Vector,
    pub first_residual: f64,
    #[serde(serialize_with = "crate::output::vector")]
    pub second_lhs: Vector,
    #[serde(serialize_with = "crate::output::vector")]
    pub second_rhs: Vector,
    pub second_residual: f64,
}

struct Frame<'a> {
    geom: &'a MutationGeometry,
    w: Mat,
    field: EquivariantField,
}

impl Frame<'_> {
    /// `omega(W q)`.
    fn omega(&self, q: &Mat) -> Result<AlgebraVector> {
        self.geom.connection(q, &(&self.w * q))
    }

    fn flow(&self, q: &Mat, t: f64) -> Result<Mat> {
        Ok(group_exp(&(&self.w * t))? * q)
    }
}

/// `nabla_V F` at `q` for the field `V(q) = W q`.
fn nabla(
    geom: &MutationGeometry,
    q: &Mat,
    frame: &Frame,
    field: &EquivariantField,
    step: f64,
) -> Result<Vector> {
    let pair = geom.model();
    let f0 = field.eval(&BundlePoint::Group(q.clone()))?;
    let xi = frame.omega(q)?;
    let turn = pair.m_part(
        &pair
            .algebra()
            .bracket(&pair.from_m(&f0), &pair.project_h(&xi))?,
    );
    let slope = try_central_diff4(|t| field.eval(&BundlePoint::Group(frame.flow(q, t)?)), step)?;
    Ok(slope - turn)
}

/// `[V, U](p) = DU(p)[V(p)] - DV(p)[U(p)]` for matrix fields, by differences.
fn lie_bracket(p: &Mat, v: &Frame, u: &Frame) -> Result<Mat> {
    let du_v = try_central_diff4_mat(|t| Ok::<_, Error>(&u.w * v.flow(p, t)?), FD_STEP)?;
    let dv_u = try_central_diff4_mat(|t| Ok::<_, Error>(&v.w * u.flow(p, t)?), FD_STEP)?;
    Ok(du_v - dv_u)
}

/// Evaluates both sides of
///
/// `nabla_X Y - nabla_Y X - omega_m([X^, Y^]) = Omega_m(X^, Y^) - [X, Y]_m`
///
/// and
///
/// `nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
///     = [Z, Omega_h(Y^, X^) - [Y, X]_h]`
///
/// at `point` for `X, Y, Z` in m, with the left sides by finite differences
/// and the right sides from the curvature and the model bracket.
pub fn check_structure_identities(
    geometry: &Geometry,
    point: &BundlePoint,
    x: &Vector,
    y: &Vector,
    z: &Vector,
) -> Result<IdentityReport> {
    let Geometry::Mutation(geom) = geometry else {
        return Err(Error::Unsupported(
            "structure identities are checked on mutation geometries only".into(),
        ));
    };
    let BundlePoint::Group(p) = point else {
        return Err(Error::Unsupported("expected a group point".into()));
    };
    let pair = geom.model();
    let g = pair.algebra();
    let bundle = geom.bundle_algebra();
    let p_inv = p
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericalFailure("singular bundle point".into()))?;

    let frame = |v: &Vector| -> Result<Frame> {
        // W = Ad_p sigma^-1(v), so that omega(W p) = v
        let w_mat = p * geom.bundle_matrix(&pair.from_m(v)) * &p_inv;
        let w = bundle.coords_of(&w_mat)?;
        Ok(Frame {
            geom,
            w: w_mat,
            field: EquivariantField::killing(geom, &w),
        })
    };
    let (fx, fy, fz) = (frame(x)?, frame(y)?, frame(z)?);
    let xs = pair.from_m(x);
    let ys = pair.from_m(y);
    let zs = pair.from_m(z);

    let bracket_xy = lie_bracket(p, &fx, &fy)?;
    let omega_bracket = geom.connection(p, &bracket_xy)?;

    let nabla_xy = nabla(geom, p, &fx, &fy.field, FD_STEP)?;
    let nabla_yx = nabla(geom, p, &fy, &fx.field, FD_STEP)?;
    let first_lhs = nabla_xy - nabla_yx - pair.m_part(&omega_bracket);
    let omega_xy = curvature(geometry, point, &xs, &ys)?;
    let first_rhs = omega_xy.omega_m - pair.m_part(&g.bracket(&xs, &ys)?);

    let inner = |outer: &Frame, dir: &Frame| -> Result<Vector> {
        let composite = EquivariantField::from_fn({
            let geom = geom.clone();
            let w = dir.w.clone();
            let field = fz.field.clone();
            move |q| {
                let BundlePoint::Group(q) = q else {
                    return Err(Error::FieldError("expected a group point".into()));
                };
                let f = Frame {
                    geom: &geom,
                    w: w.clone(),
                    field: field.clone(),
                };
                nabla(&geom, q, &f, &field, FD_STEP)
            }
        });
        nabla(geom, p, outer, &composite, NESTED_STEP)
    };
    let xyz = inner(&fx, &fy)?;
    let yxz = inner(&fy, &fx)?;
    let bracket_dir = Frame {
        geom,
        w: &bracket_xy * &p_inv,
        field: EquivariantField::constant(Vector::zeros(pair.dim_m())),
    };
    let along_bracket = nabla(geom, p, &bracket_dir, &fz.field, FD_STEP)?;
    let second_lhs = xyz - yxz - along_bracket;

    let omega_yx = curvature(geometry, point, &ys, &xs)?;
    let inner_h = pair.from_h(&omega_yx.omega_h) - pair.project_h(&g.bracket(&ys, &xs)?);
    let second_rhs = pair.m_part(&g.bracket(&zs, &inner_h)?);

    Ok(IdentityReport {
        first_residual: (&first_lhs - &first_rhs).amax(),
        first_lhs,
        first_rhs,
        second_residual: (&second_lhs - &second_rhs).amax(),
        second_lhs,
        second_rhs,
    })
}
