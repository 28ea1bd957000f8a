use super::curve::LiftedCurve;
use super::ode::{rk4_step, time_grid};
use super::{Sample, Status, Trace};
use crate::error::{Error, Result};
use crate::models::Geometry;
use crate::numeric::{Mat, Vector};

fn check_span(curve: &dyn LiftedCurve, t0: f64, t1: f64, step: f64) -> Result<()> {
    if !curve.covers(t0) || !curve.covers(t1) {
        let [a, b] = curve.span();
        return Err(Error::DomainError(format!(
            "times {t0}..{t1} leave the curve's span {a}..{b}"
        )));
    }
    if !(step > 0.0) {
        return Err(Error::DomainError("step must be positive".into()));
    }
    Ok(())
}

/// Transports the m-coordinates `v` from `t0` to `t1` along the lifted
/// curve by integrating `Y' = [Y, omega_h(c')]`. `t1 < t0` runs backwards.
pub fn parallel_transport(
    geometry: &Geometry,
    curve: &dyn LiftedCurve,
    v: &Vector,
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<Vector> {
    check_span(curve, t0, t1, step)?;
    let pair = geometry.model();
    if v.len() != pair.dim_m() {
        return Err(Error::InvalidDimension {
            expected: pair.dim_m(),
            found: v.len(),
        });
    }
    let g = pair.algebra();
    let rhs = |t: f64, y: &Vector| -> Result<Vector> {
        let turn = pair.project_h(&curve.omega(geometry, t)?);
        Ok(pair.m_part(&g.bracket(&pair.from_m(y), &turn)?))
    };
    let mut y = v.clone();
    if t0 == t1 {
        return Ok(y);
    }
    for w in time_grid(t0, t1, step).windows(2) {
        y = rk4_step(rhs, w[0], &y, w[1] - w[0])?;
    }
    Ok(y)
}

/// The model-group curve starting at the identity whose Maurer-Cartan
/// velocity equals `omega` of the given curve's velocity, over its span.
pub fn develop(geometry: &Geometry, curve: &dyn LiftedCurve, step: f64) -> Result<Trace> {
    let [t0, t1] = curve.span();
    check_span(curve, t0, t1, step)?;
    let pair = geometry.model();
    let g = pair.algebra();
    let group = g.group();
    let velocity = |t: f64| -> Result<Mat> { Ok(g.matrix_of(&curve.omega(geometry, t)?)) };
    let rhs = |t: f64, m: &Mat| -> Result<Mat> { Ok(m * velocity(t)?) };
    let sample = |t: f64, m: &Mat| -> Result<Sample> {
        Ok(Sample {
            t,
            base: pair.base().apply(m),
            frame: m.clone(),
            velocity: pair.m_part(&curve.omega(geometry, t)?),
        })
    };
    let n = g.ambient_dim();
    let mut m = Mat::identity(n, n);
    let grid = time_grid(t0, t1, step);
    let mut samples = vec![sample(t0, &m)?];
    for w in grid.windows(2) {
        m = group.project(&rk4_step(rhs, w[0], &m, w[1] - w[0])?);
        samples.push(sample(w[1], &m)?);
    }
    Ok(Trace {
        samples,
        status: Status::Completed,
    })
}
