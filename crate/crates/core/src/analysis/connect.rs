use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{group_exp, group_log};
use crate::models::MutationGeometry;
use crate::numeric::{Mat, Vector};

/// Structure-group samples tried before giving up.
pub const H_SAMPLE_BUDGET: usize = 256;
/// Newton iterations per sample.
pub const NEWTON_BUDGET: usize = 8;
/// Acceptance bound for `|exp(X) - p^-1 q h|`.
pub const CONNECT_TOL: f64 = 1e-8;
const SAMPLE_SEED: u64 = 0xC0_77EC7;

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict")]
pub enum ConnectOutcome {
    Found {
        /// m-coordinates of the initial velocity.
        #[serde(serialize_with = "crate::output::vector")]
        direction: Vector,
        #[serde(serialize_with = "crate::output::matrix")]
        h: Mat,
        residual: f64,
        attempts: usize,
    },
    NoGeodesicFound {
        attempts: usize,
        h_budget: usize,
        newton_budget: usize,
    },
}

impl ConnectOutcome {
    pub fn found(&self) -> bool {
        matches!(self, ConnectOutcome::Found { .. })
    }
}

fn candidates(geom: &MutationGeometry) -> Result<Vec<Mat>> {
    let pair = geom.model();
    let n = pair.algebra().ambient_dim();
    let mut out = vec![Mat::identity(n, n)];
    out.extend(pair.h_samples()?);
    let gens = pair.h_generators();
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let mut k = 0;
    while out.len() < H_SAMPLE_BUDGET && pair.dim_h() > 0 {
        let y = Vector::from_fn(pair.dim_h(), |_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            2.0 * z
        });
        let h = pair.h_element(&y)?;
        out.push(if gens.is_empty() {
            h
        } else {
            h * &gens[k % gens.len()]
        });
        k += 1;
    }
    out.truncate(H_SAMPLE_BUDGET);
    Ok(out)
}

/// Newton iteration on `y` so that `log(T h exp(y))` has no h-part.
fn refine(geom: &MutationGeometry, target: &Mat, h: &Mat) -> Option<(Vector, Mat)> {
    let pair = geom.model();
    let g = pair.algebra();
    let dh = pair.dim_h();
    let eval = |y: &Vector| -> Option<(Vector, Vector)> {
        let hy = h * pair.h_element(y).ok()?;
        let log = group_log(&(target * hy)).ok()?;
        let (coords, residual) = g.coords_with_residual(&log);
        if !(residual <= 1e-8) {
            return None;
        }
        let v = crate::lie::AlgebraVector::new(coords);
        Some((pair.m_part(&v), pair.h_part(&v)))
    };
    let mut y = Vector::zeros(dh);
    let (mut m, mut f) = eval(&y)?;
    for _ in 0..NEWTON_BUDGET {
        if f.amax() <= 1e-13 {
            break;
        }
        let eps = 1e-7;
        let mut jac = Mat::zeros(dh, dh);
        for k in 0..dh {
            let mut yp = y.clone();
            yp[k] += eps;
            let mut ym = y.clone();
            ym[k] -= eps;
            let col = (eval(&yp)?.1 - eval(&ym)?.1) / (2.0 * eps);
            jac.set_column(k, &col);
        }
        y -= jac.lu().solve(&f)?;
        (m, f) = eval(&y)?;
    }
    Some((m, h * pair.h_element(&y).ok()?))
}

/// Looks for `X` in m with `exp(X)` in `p^-1 q H` on a Klein model. A miss
/// after the budget is evidence only.
pub fn connect_by_geodesic(
    geometry: &MutationGeometry,
    p: &Mat,
    q: &Mat,
) -> Result<ConnectOutcome> {
    if !geometry.is_klein() {
        return Err(Error::Unsupported(
            "geodesic connection search needs a Klein model".into(),
        ));
    }
    let p_inv = p.clone().try_inverse().ok_or_else(|| Error::NotInGroup {
        residual: f64::INFINITY,
    })?;
    let target = p_inv * q;
    let pair = geometry.model();
    let mut attempts = 0;
    for h in candidates(geometry)? {
        attempts += 1;
        let Some((m, h_found)) = refine(geometry, &target, &h) else {
            continue;
        };
        let x = pair.algebra().matrix_of(&pair.from_m(&m));
        let residual = (group_exp(&x)? - &target * &h_found).amax();
        if residual <= CONNECT_TOL {
            return Ok(ConnectOutcome::Found {
                direction: m,
                h: h_found,
                residual,
                attempts,
            });
        }
    }
    Ok(ConnectOutcome::NoGeodesicFound {
        attempts,
        h_budget: H_SAMPLE_BUDGET,
        newton_budget: NEWTON_BUDGET,
    })
}

/// Whether a 2x2 matrix of determinant one is `exp` of a traceless matrix:
/// false exactly when the trace is below -2, or equals -2 away from `-I`.
pub fn sl2_in_exp_image(m: &Mat, tol: f64) -> bool {
    let tr = m.trace();
    if tr < -2.0 - tol {
        return false;
    }
    if (tr + 2.0).abs() <= tol {
        return (m + Mat::identity(2, 2)).amax() <= tol;
    }
    true
}
