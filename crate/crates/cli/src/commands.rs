use std::io::Write;
use std::path::PathBuf;

use cartan_core::analysis::{connect_by_geodesic, run_suites};
use cartan_core::calculus::{constant_curvature_probe, curvature};
use cartan_core::models::json::geometry_to_json;
use cartan_core::numeric::{fmt17, Mat};
use cartan_core::output::to_json;
use cartan_core::transport::{
    develop, geodesic, jacobi_field, parallel_transport, GeodesicSpec, JacobiState, LiftedCurve,
    LiftedGeodesic,
};
use cartan_core::{catalog::catalog_names, AlgebraVector, BundlePoint, Execution, Geometry};
use serde_json::json;

use crate::input::{load_model, parse_matrix, parse_vector};
use crate::Command;

pub enum Outcome {
    Success,
    Failed,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| e.to_string())
        }
    }
}

fn start_point(g: &Geometry, at: &Option<String>) -> Result<BundlePoint, String> {
    match (at, g) {
        (None, _) => Ok(g.origin_point()),
        (Some(s), Geometry::Gauge(gauge)) => {
            let x = parse_vector(s)?;
            let n = gauge.model().algebra().ambient_dim();
            gauge
                .point(x, Mat::identity(n, n))
                .map_err(|e| e.to_string())
        }
        (Some(_), Geometry::Mutation(_)) => Err("--at applies to chart models only".into()),
    }
}

fn check_span(t_max: f64, step: f64) -> Result<(), String> {
    if !(t_max >= 0.0 && t_max.is_finite()) || !(step > 0.0 && step.is_finite()) {
        return Err("need --t-max >= 0 and --step > 0".into());
    }
    Ok(())
}

fn curve(
    g: &Geometry,
    start: BundlePoint,
    direction: &str,
    twist: &Option<String>,
    t_max: f64,
) -> Result<LiftedGeodesic, String> {
    let dir = parse_vector(direction)?;
    if dir.len() != g.dim_m() {
        return Err(format!("direction needs {} entries", g.dim_m()));
    }
    let mut c = LiftedGeodesic::new(start, dir, [0.0, t_max]);
    if let Some(tw) = twist {
        let y = parse_vector(tw)?;
        if y.len() != g.dim_h() {
            return Err(format!("twist needs {} entries", g.dim_h()));
        }
        c = c.with_twist(y);
    }
    Ok(c)
}

/// A group element given either in full or by base coordinates.
fn group_element(g: &Geometry, text: &str) -> Result<Mat, String> {
    let m = parse_matrix(text)?;
    let Geometry::Mutation(mg) = g else {
        return Err("group elements need a mutation model".into());
    };
    let n = mg.bundle_algebra().ambient_dim();
    if m.shape() == (n, n) {
        return Ok(m);
    }
    let coords: Vec<f64> = m.transpose().as_slice().to_vec();
    mg.base_projection()
        .lift(&coords, n)
        .ok_or_else(|| format!("expected a {n}x{n} matrix"))
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

pub fn run(command: Command) -> Result<Outcome, String> {
    match command {
        Command::TraceGeodesic {
            model,
            start,
            direction,
            t_max,
            step,
            out,
        } => {
            check_span(t_max, step)?;
            let g = load_model(&model.model)?;
            let p = start_point(&g, &start.at)?;
            let spec = GeodesicSpec::new(p, parse_vector(&direction)?, [0.0, t_max], step);
            let trace = geodesic(&g, &spec).map_err(err)?;
            emit(&out.out, &trace.to_csv())?;
        }
        Command::Transport {
            model,
            start,
            direction,
            twist,
            vector,
            t_max,
            step,
            out,
        } => {
            check_span(t_max, step)?;
            let g = load_model(&model.model)?;
            let c = curve(&g, start_point(&g, &start.at)?, &direction, &twist, t_max)?;
            let v = parse_vector(&vector)?;
            let moved = parallel_transport(&g, &c, &v, 0.0, t_max, step).map_err(err)?;
            let vel = |t: f64| -> Result<Vec<f64>, String> {
                Ok(g.model()
                    .m_part(&c.omega(&g, t).map_err(err)?)
                    .as_slice()
                    .to_vec())
            };
            let report = json!({
                "model": g.name(),
                "t_max": t_max,
                "step": step,
                "vector_in": v.as_slice(),
                "vector_out": moved.as_slice(),
                "velocity_in": vel(0.0)?,
                "velocity_out": vel(t_max)?,
            });
            emit(&out.out, &(to_json(&report).map_err(err)? + "\n"))?;
        }
        Command::Develop {
            model,
            start,
            direction,
            twist,
            t_max,
            step,
            out,
        } => {
            check_span(t_max, step)?;
            let g = load_model(&model.model)?;
            let c = curve(&g, start_point(&g, &start.at)?, &direction, &twist, t_max)?;
            let trace = develop(&g, &c, step).map_err(err)?;
            emit(&out.out, &trace.to_csv())?;
        }
        Command::Jacobi {
            model,
            direction,
            j0,
            j1,
            t_max,
            step,
            out,
        } => {
            check_span(t_max, step)?;
            let g = load_model(&model.model)?;
            let spec = GeodesicSpec::new(
                g.origin_point(),
                parse_vector(&direction)?,
                [0.0, t_max],
                step,
            );
            let init = JacobiState {
                j: parse_vector(&j0)?,
                j_prime: parse_vector(&j1)?,
            };
            let trace = jacobi_field(&g, &spec, &init, step).map_err(err)?;
            let d = g.dim_m();
            let mut header = vec!["t".to_string()];
            header.extend((1..=d).map(|i| format!("j{i}")));
            header.extend((1..=d).map(|i| format!("jp{i}")));
            header.extend((1..=d).map(|i| format!("var{i}")));
            let mut text = header.join(",") + "\n";
            for s in &trace.samples {
                let row: Vec<String> = std::iter::once(s.t)
                    .chain(s.state.j.iter().copied())
                    .chain(s.state.j_prime.iter().copied())
                    .chain(s.variation.iter().copied())
                    .map(fmt17)
                    .collect();
                text += &(row.join(",") + "\n");
            }
            text += &format!("# discrepancy={}\n", fmt17(trace.discrepancy));
            emit(&out.out, &text)?;
        }
        Command::Curvature {
            model,
            start,
            samples,
            seed,
            out,
        } => {
            let g = load_model(&model.model)?;
            let p = start_point(&g, &start.at)?;
            let pair = g.model();
            let m = pair.m_indices();
            let mut values = Vec::new();
            for a in 0..m.len() {
                for b in (a + 1)..m.len() {
                    let x = AlgebraVector::basis(pair.dim(), m[a]);
                    let y = AlgebraVector::basis(pair.dim(), m[b]);
                    let c = curvature(&g, &p, &x, &y).map_err(err)?;
                    values.push(json!({
                        "pair": [a + 1, b + 1],
                        "omega_m": c.omega_m.as_slice(),
                        "omega_h": c.omega_h.as_slice(),
                    }));
                }
            }
            let probe = constant_curvature_probe(&g, samples.max(2), seed).map_err(err)?;
            let report = json!({
                "model": g.name(),
                "point": g.base_coords(&p).map_err(err)?.as_slice(),
                "curvature": values,
                "probe": {
                    "samples": probe.samples,
                    "seed": probe.seed,
                    "deviation": probe.deviation,
                    "tolerance": probe.tolerance,
                    "constant": probe.constant,
                },
            });
            emit(&out.out, &(to_json(&report).map_err(err)? + "\n"))?;
        }
        Command::Verify {
            suite,
            seed,
            sequential,
            out,
        } => {
            let names: Vec<String> = suite.split(',').map(|s| s.trim().to_string()).collect();
            let exec = if sequential {
                Execution::Sequential
            } else {
                Execution::default()
            };
            let reports = run_suites(&names, seed, exec).map_err(err)?;
            let passed = reports.iter().all(|r| r.passed());
            let summary = json!({
                "verdict": if passed { "pass" } else { "fail" },
                "seed": seed,
                "suites": reports,
            });
            emit(&out.out, &(to_json(&summary).map_err(err)? + "\n"))?;
            if !passed {
                return Ok(Outcome::Failed);
            }
        }
        Command::Connect {
            model,
            target,
            from,
            out,
        } => {
            let g = load_model(&model.model)?;
            let Geometry::Mutation(mg) = &g else {
                return Err("connect needs a Klein mutation model".into());
            };
            let q = group_element(&g, &target)?;
            let n = mg.bundle_algebra().ambient_dim();
            let p = match &from {
                Some(s) => group_element(&g, s)?,
                None => Mat::identity(n, n),
            };
            let outcome = connect_by_geodesic(mg, &p, &q).map_err(err)?;
            emit(&out.out, &(to_json(&outcome).map_err(err)? + "\n"))?;
            if !outcome.found() {
                return Ok(Outcome::Failed);
            }
        }
        Command::Catalog { model, out } => match model {
            None => emit(&out.out, &(catalog_names().join("\n") + "\n"))?,
            Some(name) => {
                let g = load_model(&name)?;
                emit(&out.out, &(geometry_to_json(&g).map_err(err)? + "\n"))?;
            }
        },
    }
    Ok(Outcome::Success)
}
