//! Jacobi fields along mutation geodesics.
//!
//! Along a horizontal lift the connection's h-part vanishes and its m-part is
//! the constant direction `X`, so the Jacobi equation becomes the constant
//! coefficient system
//!
//! `J'' = -[X, Omega_h(X, J)] + [J', X]_m - [X, [J, X]_h]`.
//!
//! The same field is also obtained by differentiating a one-parameter family
//! of geodesics, which serves as a cross-check.

use serde::Serialize;

use super::ode::{rk4_step, time_grid};
use super::GeodesicSpec;
use crate::error::{Error, Result};
use crate::lie::{group_exp, group_log};
use crate::models::{BundlePoint, Geometry, MutationGeometry};
use crate::numeric::{Mat, Vector};

/// Parameter offset for the geodesic-variation difference quotient.
pub const VARIATION_STEP: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JacobiState {
    #[serde(serialize_with = "crate::output::vector")]
    pub j: Vector,
    /// Covariant derivative of `j` along the geodesic.
    #[serde(serialize_with = "crate::output::vector")]
    pub j_prime: Vector,
}

#[derive(Clone, Debug, Serialize)]
pub struct JacobiSample {
    pub t: f64,
    pub state: JacobiState,
    /// The field read off the family of nearby geodesics.
    #[serde(serialize_with = "crate::output::vector")]
    pub variation: Vector,
}

#[derive(Clone, Debug, Serialize)]
pub struct JacobiTrace {
    pub samples: Vec<JacobiSample>,
    /// Largest max-norm gap between the integrated and the variation field.
    pub discrepancy: f64,
}

fn acceleration(geom: &MutationGeometry, x: &Vector, j: &Vector, jp: &Vector) -> Result<Vector> {
    let pair = geom.model();
    let g = pair.algebra();
    let xs = pair.from_m(x);
    let js = pair.from_m(j);
    let curv_h = pair.project_h(&geom.curvature(&xs, &js)?);
    let a = pair.m_part(&g.bracket(&xs, &curv_h)?);
    let b = pair.m_part(&g.bracket(&pair.from_m(jp), &xs)?);
    let c = pair.m_part(&g.bracket(&xs, &pair.project_h(&g.bracket(&js, &xs)?))?);
    Ok(b - a - c)
}

/// Family `p exp(s zeta) exp(t (xi + s eta))` of geodesics whose variation
/// field starts at `(J0, J0')`.
struct Variation<'a> {
    geom: &'a MutationGeometry,
    p: Mat,
    xi: Mat,
    zeta: Mat,
    eta: Mat,
}

impl<'a> Variation<'a> {
    fn new(geom: &'a MutationGeometry, p: &Mat, x: &Vector, init: &JacobiState) -> Result<Self> {
        let pair = geom.model();
        let xi = geom.bundle_matrix(&pair.from_m(x));
        let zeta = geom.bundle_matrix(&pair.from_m(&init.j));
        let twist = geom
            .bundle_algebra()
            .coords_of(&(&xi * &zeta - &zeta * &xi))?;
        let eta_m = &init.j_prime + pair.m_part(&geom.sigma(&twist));
        Ok(Self {
            geom,
            p: p.clone(),
            xi,
            zeta,
            eta: geom.bundle_matrix(&pair.from_m(&eta_m)),
        })
    }

    fn curve(&self, s: f64, t: f64) -> Result<Mat> {
        Ok(&self.p * group_exp(&(&self.zeta * s))? * group_exp(&((&self.xi + &self.eta * s) * t))?)
    }

    fn field(&self, t: f64) -> Result<Vector> {
        let s = VARIATION_STEP;
        let g = self.curve(0.0, t)?;
        let g_inv = g
            .try_inverse()
            .ok_or_else(|| Error::NumericalFailure("singular geodesic frame".into()))?;
        let plus = group_log(&(&g_inv * self.curve(s, t)?))?;
        let minus = group_log(&(&g_inv * self.curve(-s, t)?))?;
        let d = self
            .geom
            .bundle_algebra()
            .coords_of(&((plus - minus) / (2.0 * s)))?;
        Ok(self.geom.model().m_part(&self.geom.sigma(&d)))
    }
}

/// Integrates the Jacobi equation with RK4 from `init` at `spec.t_span[0]`
/// and records the geodesic-variation field next to it.
pub fn jacobi_field(
    geometry: &Geometry,
    spec: &GeodesicSpec,
    init: &JacobiState,
    step: f64,
) -> Result<JacobiTrace> {
    let Geometry::Mutation(geom) = geometry else {
        return Err(Error::Unsupported(
            "Jacobi fields need a mutation geometry".into(),
        ));
    };
    let BundlePoint::Group(p) = geometry.validate_point(&spec.base)? else {
        return Err(Error::Unsupported("expected a group point".into()));
    };
    let dim = geom.model().dim_m();
    for v in [&spec.direction, &init.j, &init.j_prime] {
        if v.len() != dim {
            return Err(Error::InvalidDimension {
                expected: dim,
                found: v.len(),
            });
        }
    }
    if !(step > 0.0) || !(spec.t_span[1] >= spec.t_span[0]) {
        return Err(Error::DomainError("need step > 0 and t1 >= t0".into()));
    }
    let x = &spec.direction;
    let variation = Variation::new(geom, &p, x, init)?;
    let rhs = |_: f64, s: &(Vector, Vector)| -> Result<(Vector, Vector)> {
        Ok((s.1.clone(), acceleration(geom, x, &s.0, &s.1)?))
    };
    let t0 = spec.t_span[0];
    let mut state = (init.j.clone(), init.j_prime.clone());
    let mut samples = Vec::new();
    let mut discrepancy = 0.0_f64;
    let grid = time_grid(t0, spec.t_span[1], step);
    for (k, &t) in grid.iter().enumerate() {
        if k > 0 {
            state = rk4_step(rhs, grid[k - 1], &state, t - grid[k - 1])?;
        }
        let var = variation.field(t - t0)?;
        discrepancy = discrepancy.max((&var - &state.0).amax());
        samples.push(JacobiSample {
            t,
            state: JacobiState {
                j: state.0.clone(),
                j_prime: state.1.clone(),
            },
            variation: var,
        });
    }
    Ok(JacobiTrace {
        samples,
        discrepancy,
    })
}
