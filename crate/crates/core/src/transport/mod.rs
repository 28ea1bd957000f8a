//! Geodesics, parallel transport, developments and Jacobi fields.

pub mod curve;
pub mod jacobi;
pub mod ode;
pub mod parallel;

use std::fmt;
use std::io::Write;

use serde::Serialize;

pub use curve::{CompositeCurve, FnCurve, LiftedCurve, LiftedGeodesic};
pub use jacobi::{jacobi_field, JacobiSample, JacobiState, JacobiTrace};
pub use parallel::{develop, parallel_transport};

use crate::error::{Error, Result};
use crate::models::{BundlePoint, GaugeGeometry, Geometry};
use crate::numeric::{fmt17, Mat, Vector};
use ode::{rk4_step, time_grid};

/// Chart speed beyond which a gauge geodesic is declared to escape.
pub const ESCAPE_SPEED: f64 = 1e8;
/// Smallest adaptive sub-step before giving up.
pub const MIN_SUBSTEP: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct GeodesicSpec {
    /// Lift of the start point, at time `t_span[0]`.
    pub base: BundlePoint,
    /// m-coordinates of the initial velocity.
    pub direction: Vector,
    pub t_span: [f64; 2],
    /// Sampling interval; also the largest integration step on charts.
    pub step: f64,
}

impl GeodesicSpec {
    pub fn new(base: BundlePoint, direction: Vector, t_span: [f64; 2], step: f64) -> Self {
        Self {
            base,
            direction,
            t_span,
            step,
        }
    }

    fn validate(&self, geometry: &Geometry) -> Result<()> {
        if self.direction.len() != geometry.dim_m() {
            return Err(Error::InvalidDimension {
                expected: geometry.dim_m(),
                found: self.direction.len(),
            });
        }
        let len = self.t_span[1] - self.t_span[0];
        if !(self.step > 0.0) || !(len >= 0.0) || !len.is_finite() {
            return Err(Error::DomainError("need step > 0 and t1 >= t0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    #[serde(serialize_with = "crate::output::vector")]
    pub base: Vector,
    #[serde(serialize_with = "crate::output::matrix")]
    pub frame: Mat,
    /// `omega_m` of the lift's velocity.
    #[serde(serialize_with = "crate::output::vector")]
    pub velocity: Vector,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Status {
    Completed,
    BlowUp { t_escape: f64 },
    LeftChart { t_exit: f64 },
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Completed => f.write_str("Completed"),
            Status::BlowUp { t_escape } => write!(f, "BlowUp:t={}", fmt17(*t_escape)),
            Status::LeftChart { t_exit } => write!(f, "LeftChart:t={}", fmt17(*t_exit)),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Trace {
    pub samples: Vec<Sample>,
    pub status: Status,
}

impl Trace {
    /// Columns `t, x1.., frame00.., vel_m1..` and a trailing status comment.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let Some(first) = self.samples.first() else {
            return writeln!(w, "t\n# status={}", self.status);
        };
        let mut header = vec!["t".to_string()];
        header.extend((1..=first.base.len()).map(|i| format!("x{i}")));
        let (r, c) = first.frame.shape();
        for i in 0..r {
            for j in 0..c {
                header.push(format!("frame{i}{j}"));
            }
        }
        header.extend((1..=first.velocity.len()).map(|i| format!("vel_m{i}")));
        writeln!(w, "{}", header.join(","))?;
        for s in &self.samples {
            let mut row = vec![fmt17(s.t)];
            row.extend(s.base.iter().map(|v| fmt17(*v)));
            for i in 0..r {
                for j in 0..c {
                    row.push(fmt17(s.frame[(i, j)]));
                }
            }
            row.extend(s.velocity.iter().map(|v| fmt17(*v)));
            writeln!(w, "{}", row.join(","))?;
        }
        writeln!(w, "# status={}", self.status)
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("traces hold at least the start sample")
    }
}

/// The geodesic with initial velocity `direction` through the start point,
/// traced through its horizontal lift.
pub fn geodesic(geometry: &Geometry, spec: &GeodesicSpec) -> Result<Trace> {
    spec.validate(geometry)?;
    let base = geometry.validate_point(&spec.base)?;
    match (geometry, &base) {
        (Geometry::Mutation(_), _) => {
            let xi = geometry.model().from_m(&spec.direction);
            let samples = time_grid(spec.t_span[0], spec.t_span[1], spec.step)
                .into_iter()
                .map(|t| {
                    let p = geometry.flow(&base, &xi, t - spec.t_span[0])?;
                    Ok(Sample {
                        t,
                        base: geometry.base_coords(&p)?,
                        frame: geometry.frame(&p)?,
                        velocity: spec.direction.clone(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Trace {
                samples,
                status: Status::Completed,
            })
        }
        (Geometry::Gauge(g), BundlePoint::Chart { x, h }) => chart_geodesic(g, x, h, spec),
        _ => Err(Error::Unsupported(
            "bundle point does not match the geometry's representation".into(),
        )),
    }
}

enum Attempt {
    Accepted(Vector, Mat),
    Outside,
    TooLarge,
}

fn chart_geodesic(g: &GaugeGeometry, x0: &Vector, h0: &Mat, spec: &GeodesicSpec) -> Result<Trace> {
    let pair = g.model();
    let group = pair.algebra().group().clone();
    let xi = pair.from_m(&spec.direction);
    let field = |_: f64, s: &(Vector, Mat)| g.frame_velocity(&s.0, &s.1, &xi);
    let sample = |t: f64, x: &Vector, h: &Mat| -> Result<Sample> {
        Ok(Sample {
            t,
            base: g.base_coords(x, h)?,
            frame: g.frame(x, h)?,
            velocity: spec.direction.clone(),
        })
    };

    let grid = time_grid(spec.t_span[0], spec.t_span[1], spec.step);
    let mut state = (x0.clone(), h0.clone());
    let mut samples = vec![sample(grid[0], x0, h0)?];
    let mut t = grid[0];
    let mut dt = spec.step;
    for &target in &grid[1..] {
        while t < target {
            let sub = dt.min(target - t);
            let attempt = match rk4_step(field, t, &state, sub) {
                Err(Error::OutOfChart { .. }) => Attempt::Outside,
                Err(Error::DegenerateMetric { .. }) | Err(Error::NumericalFailure(_)) => {
                    Attempt::TooLarge
                }
                Err(e) => return Err(e),
                Ok((x, h)) => {
                    let jump = (&x - &state.0).norm();
                    if !x.iter().chain(h.iter()).all(|v| v.is_finite()) {
                        Attempt::TooLarge
                    } else if !g.domain().contains(x.as_slice()) {
                        Attempt::Outside
                    } else if jump > 0.1 * (1.0 + state.0.norm()) {
                        Attempt::TooLarge
                    } else {
                        Attempt::Accepted(x, h)
                    }
                }
            };
            match attempt {
                Attempt::Accepted(x, h) => {
                    t = if sub == target - t { target } else { t + sub };
                    let h = group.project(&h);
                    let speed = g
                        .frame_velocity(&x, &h, &xi)
                        .map(|v| v.0.norm())
                        .unwrap_or(f64::INFINITY);
                    state = (x, h);
                    if !(speed <= ESCAPE_SPEED) {
                        return Ok(Trace {
                            samples,
                            status: Status::BlowUp { t_escape: t },
                        });
                    }
                    dt = (2.0 * sub).min(spec.step);
                }
                failed => {
                    dt = sub / 2.0;
                    if dt < MIN_SUBSTEP {
                        let status = match failed {
                            Attempt::Outside => Status::LeftChart { t_exit: t },
                            _ => Status::BlowUp { t_escape: t },
                        };
                        return Ok(Trace { samples, status });
                    }
                }
            }
        }
        samples.push(sample(t, &state.0, &state.1)?);
    }
    Ok(Trace {
        samples,
        status: Status::Completed,
    })
}
