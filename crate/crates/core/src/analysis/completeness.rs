use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::Result;
use crate::lie::group_exp;
use crate::models::{GaugeGeometry, Geometry};
use crate::numeric::{all_finite, Vector};
use crate::par::{self, Execution};
use crate::transport::{geodesic, GeodesicSpec, Status};

#[derive(Clone, Debug, Serialize)]
pub struct DirectionRecord {
    #[serde(serialize_with = "crate::output::vector")]
    pub direction: Vector,
    /// Last time reached by the trace.
    pub max_time: f64,
    pub status: Status,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind")]
pub enum CompletenessVerdict {
    CompleteUpToHorizon,
    IncompleteWitness {
        #[serde(serialize_with = "crate::output::vector")]
        direction: Vector,
        t_escape: f64,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct CompletenessReport {
    pub horizon: f64,
    pub seed: u64,
    pub step: f64,
    pub records: Vec<DirectionRecord>,
    /// Whether every vertical frame field flows to the horizon; always true
    /// for chart models, where vertical flows are right multiplications.
    pub vertical_complete: bool,
    pub verdict: CompletenessVerdict,
}

impl CompletenessReport {
    pub fn is_complete(&self) -> bool {
        matches!(self.verdict, CompletenessVerdict::CompleteUpToHorizon)
    }
}

/// Uniform directions on the coordinate unit sphere.
pub fn sphere_directions(dim: usize, n: usize, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v = Vector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
        let norm = v.norm();
        if norm > 1e-8 {
            out.push(v / norm);
        }
    }
    out
}

/// Light-like coordinate directions of an indefinite metric chart.
fn null_directions(g: &GaugeGeometry) -> Vec<Vector> {
    let Some(source) = g.metric_source() else {
        return Vec::new();
    };
    let eta = source.eta();
    let d = eta.len();
    let mut out = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            if eta[i] * eta[j] < 0.0 {
                for s in [1.0, -1.0] {
                    let mut v = Vector::zeros(d);
                    v[i] = std::f64::consts::FRAC_1_SQRT_2;
                    v[j] = s * std::f64::consts::FRAC_1_SQRT_2;
                    out.push(v);
                }
            }
        }
    }
    out
}

pub const DEFAULT_CHART_STEP: f64 = 1e-2;

pub fn completeness_report(
    geometry: &Geometry,
    horizon: f64,
    n_directions: usize,
    seed: u64,
) -> Result<CompletenessReport> {
    completeness_report_with(
        geometry,
        horizon,
        n_directions,
        seed,
        DEFAULT_CHART_STEP,
        Execution::default(),
    )
}

/// Traces geodesics from the default start point in seeded random
/// directions, both ways, out to `horizon`. Null directions of indefinite
/// metric charts are always included.
pub fn completeness_report_with(
    geometry: &Geometry,
    horizon: f64,
    n_directions: usize,
    seed: u64,
    step: f64,
    exec: Execution,
) -> Result<CompletenessReport> {
    let horizon = horizon.abs();
    let mut dirs = match geometry {
        Geometry::Gauge(g) => null_directions(g),
        Geometry::Mutation(_) => Vec::new(),
    };
    dirs.extend(sphere_directions(geometry.dim_m(), n_directions, seed));
    let signed: Vec<Vector> = dirs.iter().flat_map(|d| [d.clone(), -d]).collect();
    let step = match geometry {
        Geometry::Mutation(_) => horizon.max(f64::MIN_POSITIVE) / 16.0,
        Geometry::Gauge(_) => step,
    };
    let start = geometry.origin_point();
    let records = par::map(exec, signed, |d| {
        let trace = geodesic(
            geometry,
            &GeodesicSpec::new(start.clone(), d.clone(), [0.0, horizon], step),
        )?;
        let mut status = trace.status;
        if status == Status::Completed && !trace.samples.iter().all(|s| all_finite(&s.frame)) {
            status = Status::BlowUp {
                t_escape: trace.last().t,
            };
        }
        Ok(DirectionRecord {
            direction: d,
            max_time: trace.last().t,
            status,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let vertical_complete = match geometry {
        Geometry::Mutation(g) => {
            let pair = g.model();
            let mut ok = true;
            for k in 0..pair.dim_h() {
                let y = pair.from_h(&Vector::from_fn(pair.dim_h(), |i, _| {
                    if i == k {
                        1.0
                    } else {
                        0.0
                    }
                }));
                for t in [horizon, -horizon] {
                    ok &= all_finite(&group_exp(&(g.bundle_matrix(&y) * t))?);
                }
            }
            ok
        }
        Geometry::Gauge(_) => true,
    };

    let witness = records
        .iter()
        .filter_map(|r| match r.status {
            Status::Completed => None,
            Status::BlowUp { t_escape: t } | Status::LeftChart { t_exit: t } => Some((t, r)),
        })
        .min_by(|a, b| a.0.total_cmp(&b.0));
    let verdict = match witness {
        Some((t, r)) => CompletenessVerdict::IncompleteWitness {
            direction: r.direction.clone(),
            t_escape: t,
        },
        None => CompletenessVerdict::CompleteUpToHorizon,
    };
    Ok(CompletenessReport {
        horizon,
        seed,
        step,
        records,
        vertical_complete,
        verdict,
    })
}
