use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{
    completeness_report_with, connect_by_geodesic, error_ratios, mutation_relation_residual,
    sl2_in_exp_image, trotter_probe, verify_geodesic_map, CompletenessVerdict, GeodesicMapSpec,
    Report, DEFAULT_T_GRID,
};
use crate::calculus::{
    check_structure_identities, constant_curvature_probe, curvature, star_relation_residual,
    EquivariantField,
};
use crate::error::{Error, Result};
use crate::lie::{builtins::sl2, group_exp, AlgebraVector};
use crate::models::{catalog, Geometry};
use crate::numeric::{Mat, Vector};
use crate::par::{self, Execution};
use crate::transport::{
    develop, geodesic, jacobi_field, parallel_transport, GeodesicSpec, JacobiState, LiftedCurve,
    LiftedGeodesic, Status,
};

const SUITES: &[&str] = &[
    "clifton-pohl",
    "completeness",
    "connect",
    "curvature",
    "development",
    "geodesic-map",
    "identities",
    "jacobi",
    "transport",
    "trotter",
];

const MUTATION_MODELS: &[&str] = &[
    "euclidean:2",
    "euclidean:3",
    "hyperbolic:2",
    "hyperbolic:3",
    "hyperbolic-klein:2",
    "affine:2",
    "sl2xh",
];

pub fn suite_names() -> &'static [&'static str] {
    SUITES
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_vec<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vector {
    Vector::from_fn(n, |_, _| rng.random_range(-scale..scale))
}

fn unit(n: usize, i: usize) -> AlgebraVector {
    AlgebraVector::basis(n, i)
}

fn curvature_suite(seed: u64) -> Result<Report> {
    let mut r = Report::new("curvature", seed);
    let hyp = catalog("hyperbolic:2")?;
    let lorentz = hyp
        .as_mutation()
        .expect("mutation")
        .bundle_algebra()
        .clone();
    let b = lorentz.basis();
    let expected = lorentz.coords_of(&-(&b[0] * &b[1] - &b[1] * &b[0]))?;
    let c = curvature(&hyp, &hyp.origin_point(), &unit(3, 0), &unit(3, 1))?;
    r.bound("hyperbolic_torsion", c.omega_m.amax(), 1e-9);
    r.bound(
        "hyperbolic_omega_h",
        (c.omega_h[0] - expected.coords()[2]).abs(),
        1e-10,
    );
    let probe = constant_curvature_probe(&hyp, 100, seed)?;
    r.bound("hyperbolic_probe_deviation", probe.deviation, 1e-9);
    let mut flat = 0.0_f64;
    let mut rng = rng_for(seed, 1);
    for name in MUTATION_MODELS
        .iter()
        .filter(|n| !n.starts_with("hyperbolic:"))
    {
        let g = catalog(name)?;
        let n = g.model().dim();
        for _ in 0..20 {
            let p = g.random_point(&mut rng)?;
            let x = AlgebraVector::new(random_vec(&mut rng, n, 1.0));
            let y = AlgebraVector::new(random_vec(&mut rng, n, 1.0));
            flat = flat.max(curvature(&g, &p, &x, &y)?.max_abs());
        }
    }
    r.bound("klein_curvature", flat, 1e-10);
    Ok(r)
}

fn identities_suite(seed: u64) -> Result<Report> {
    let mut r = Report::new("identities", seed);
    let mut rng = rng_for(seed, 2);
    for name in ["euclidean:2", "hyperbolic:2"] {
        let g = catalog(name)?;
        let (mut first, mut second, mut star) = (0.0_f64, 0.0_f64, 0.0_f64);
        for _ in 0..10 {
            let p = g.random_point(&mut rng)?;
            let [x, y, z] = [0; 3].map(|_| random_vec(&mut rng, 2, 1.0));
            let rep = check_structure_identities(&g, &p, &x, &y, &z)?;
            first = first.max(rep.first_residual);
            second = second.max(rep.second_residual);
            let w = AlgebraVector::new(random_vec(&mut rng, 3, 1.0));
            let field = EquivariantField::killing(g.as_mutation().expect("mutation"), &w);
            let vertical = AlgebraVector::from_slice(&[0.0, 0.0, rng.random_range(-1.0..1.0)]);
            star = star.max(star_relation_residual(&g, &p, &vertical, &field)?);
        }
        r.bound(&format!("{name}_first"), first, 1e-6);
        r.bound(&format!("{name}_second"), second, 1e-6);
        r.bound(&format!("{name}_star"), star, 1e-6);
    }
    Ok(r)
}

fn twisted_velocity(g: &Geometry, curve: &LiftedGeodesic, t: f64) -> Result<Vector> {
    Ok(g.model().m_part(&curve.omega(g, t)?))
}

fn transport_suite(seed: u64) -> Result<Report> {
    let mut r = Report::new("transport", seed);
    let g = catalog("hyperbolic:2")?;
    let mut rng = rng_for(seed, 3);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let p = g.random_point(&mut rng)?;
        let curve = LiftedGeodesic::new(p, random_vec(&mut rng, 2, 1.0), [0.0, 1.0])
            .with_twist(random_vec(&mut rng, 1, 2.0));
        let v0 = twisted_velocity(&g, &curve, 0.0)?;
        let moved = parallel_transport(&g, &curve, &v0, 0.0, 1.0, 1e-3)?;
        worst = worst.max((moved - twisted_velocity(&g, &curve, 1.0)?).amax());
    }
    r.bound("velocity_transport", worst, 1e-7);
    r.budget.insert("step".into(), json!(1e-3));
    Ok(r)
}

fn development_suite(seed: u64) -> Result<Report> {
    let mut r = Report::new("development", seed);
    let g = catalog("hyperbolic:2")?;
    let alg = g.model().algebra();
    let mut rng = rng_for(seed, 4);
    let mut worst = 0.0_f64;
    for _ in 0..5 {
        let x = random_vec(&mut rng, 2, 1.0);
        let curve = LiftedGeodesic::new(g.random_point(&mut rng)?, x.clone(), [0.0, 2.0]);
        let dev = develop(&g, &curve, 1e-2)?;
        let xm = alg.matrix_of(&g.model().from_m(&x));
        for s in &dev.samples {
            worst = worst.max((&s.frame - group_exp(&(&xm * s.t))?).amax());
        }
    }
    r.bound("geodesic_development", worst, 1e-7);
    Ok(r)
}

fn completeness_suite(seed: u64) -> Result<Report> {
    let mut r = Report::new("completeness", seed);
    for name in MUTATION_MODELS {
        let rep =
            completeness_report_with(&catalog(name)?, 50.0, 8, seed, 1e-2, Execution::Sequential)?;
        r.require(rep.is_complete() && rep.vertical_complete);
    }
    let cp = completeness_report_with(
        &catalog("clifton-pohl")?,
        2.0,
        4,
        seed,
        1e-2,
        Execution::Sequential,
    )?;
    match cp.verdict {
        CompletenessVerdict::IncompleteWitness {
            direction,
            t_escape,
        } => {
            r.floor("clifton_pohl_escape_margin", 1.0 - t_escape, 0.0);
            r.witnesses.push(json!({"model": "clifton-pohl", "direction": direction.as_slice(), "t_escape": t_escape}));
        }
        CompletenessVerdict::CompleteUpToHorizon => r.fail(),
    }
    r.budget.insert("horizon".into(), json!(50.0));
    r.budget.insert("directions".into(), json!(8));
    Ok(r)
}

fn trotter_suite(seed: u64) -> Result<Report> {
    let mut r = Report::new("trotter", seed);
    let g = sl2()?;
    let errs = trotter_probe(&g, &unit(3, 0), &unit(3, 1), 1.0, &[64, 128, 256, 512])?;
    for (k, ratio) in error_ratios(&errs).into_iter().enumerate() {
        r.residuals.insert(format!("ratio_{}", 64 << k), ratio);
        r.require((1.8..=2.2).contains(&ratio));
    }
    Ok(r)
}

/// `P diag(l, 1/l) P^-1` with `l > 1`, so the trace exceeds 2.
pub fn random_hyperbolic_sl2<R: Rng>(rng: &mut R) -> Mat {
    let l: f64 = rng.random_range(1.2..5.0);
    loop {
        let p = Mat::from_fn(2, 2, |_, _| rng.random_range(-2.0..2.0));
        let det = p.determinant();
        if det.abs() > 0.2 {
            let d = Mat::from_diagonal(&Vector::from_column_slice(&[l, 1.0 / l]));
            return &p * d * p.try_inverse().expect("checked determinant");
        }
    }
}

fn connect_suite(seed: u64) -> Result<Report> {
    let mut r = Report::new("connect", seed);
    let geom = catalog("sl2xh")?;
    let m = geom.as_mutation().expect("mutation");
    let base = m.base_projection().clone();
    let n = m.model().algebra().ambient_dim();
    let id = Mat::identity(n, n);
    let bad = base.lift(&[-1.0, 1.0, 0.0, -1.0], n).expect("block lift");
    let outcome = connect_by_geodesic(m, &id, &bad)?;
    r.require(!outcome.found());
    r.require(!sl2_in_exp_image(
        &Mat::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -1.0]),
        1e-12,
    ));
    r.witnesses
        .push(json!({"target": [[-1.0, 1.0], [0.0, -1.0]], "outcome": "NoGeodesicFound"}));
    let mut rng = rng_for(seed, 5);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let t = random_hyperbolic_sl2(&mut rng);
        let q = base
            .lift(t.as_slice_row_major().as_slice(), n)
            .expect("block lift");
        match connect_by_geodesic(m, &id, &q)? {
            super::ConnectOutcome::Found { residual, .. } => worst = worst.max(residual),
            _ => r.fail(),
        }
    }
    r.bound("found_residual", worst, 1e-8);
    r.budget
        .insert("h_samples".into(), json!(super::connect::H_SAMPLE_BUDGET));
    r.budget
        .insert("newton".into(), json!(super::connect::NEWTON_BUDGET));
    Ok(r)
}

trait RowMajor {
    fn as_slice_row_major(&self) -> Vec<f64>;
}

impl RowMajor for Mat {
    fn as_slice_row_major(&self) -> Vec<f64> {
        self.transpose().as_slice().to_vec()
    }
}

fn geodesic_map_suite(seed: u64) -> Result<Report> {
    let mut r = Report::new("geodesic-map", seed);
    let klein = catalog("hyperbolic-klein:2")?;
    let hyp = catalog("hyperbolic:2")?;
    let spec = GeodesicMapSpec::identity(klein.clone(), hyp.clone(), Mat::identity(2, 2))?;
    let rep = verify_geodesic_map(&spec, 6, &DEFAULT_T_GRID, 1e-6, seed)?;
    r.bound("beltrami_mismatch", rep.mismatch, 1e-6);
    r.require(rep.passed && rep.source_constant && rep.target_constant);
    let back = verify_geodesic_map(
        &spec.reversed(|x| x.clone())?,
        6,
        &DEFAULT_T_GRID,
        1e-6,
        seed,
    )?;
    r.require(back.passed == rep.passed);
    let rel = mutation_relation_residual(
        klein.as_mutation().expect("mutation"),
        hyp.as_mutation().expect("mutation"),
        &Mat::identity(2, 2),
        20,
        seed,
    )?;
    r.bound("mutation_relation", rel, 1e-8);
    let control = GeodesicMapSpec::new(hyp, catalog("euclidean:2")?, Mat::identity(2, 2), |y| {
        Vector::from_column_slice(&[y[1], y[2]])
    })?;
    let ctl = verify_geodesic_map(&control, 6, &DEFAULT_T_GRID, 1e-6, seed)?;
    r.floor("control_mismatch", ctl.mismatch, 0.1);
    r.require(!ctl.passed);
    Ok(r)
}

fn jacobi_suite(seed: u64) -> Result<Report> {
    let mut r = Report::new("jacobi", seed);
    let g = catalog("hyperbolic:2")?;
    let mut rng = rng_for(seed, 6);
    let mut worst = 0.0_f64;
    for _ in 0..5 {
        let spec = GeodesicSpec::new(
            g.random_point(&mut rng)?,
            random_vec(&mut rng, 2, 1.0),
            [0.0, 2.0],
            1e-2,
        );
        let init = JacobiState {
            j: random_vec(&mut rng, 2, 1.0),
            j_prime: random_vec(&mut rng, 2, 1.0),
        };
        worst = worst.max(jacobi_field(&g, &spec, &init, 1e-2)?.discrepancy);
    }
    r.bound("variation_discrepancy", worst, 1e-4);
    let spec = GeodesicSpec::new(
        g.origin_point(),
        Vector::from_column_slice(&[1.0, 0.0]),
        [0.0, 2.0],
        1e-2,
    );
    let init = JacobiState {
        j: Vector::zeros(2),
        j_prime: Vector::from_column_slice(&[0.0, 1.0]),
    };
    let trace = jacobi_field(&g, &spec, &init, 1e-2)?;
    let sinh_gap = trace
        .samples
        .iter()
        .map(|s| (s.state.j.norm() - s.t.sinh()).abs())
        .fold(0.0, f64::max);
    r.bound("sinh_profile", sinh_gap, 1e-4);
    Ok(r)
}

fn clifton_pohl_suite(seed: u64) -> Result<Report> {
    let mut r = Report::new("clifton-pohl", seed);
    let g = catalog("clifton-pohl")?;
    let dir = Vector::from_column_slice(&[1.0, -1.0]) * std::f64::consts::FRAC_1_SQRT_2;
    let trace = geodesic(
        &g,
        &GeodesicSpec::new(g.origin_point(), dir.clone(), [0.0, 2.0], 1e-3),
    )?;
    match trace.status {
        Status::BlowUp { t_escape } => {
            r.bound("t_escape_upper", t_escape, 1.0);
            r.floor("t_escape_lower", t_escape, 0.9);
            r.witnesses
                .push(json!({"direction": dir.as_slice(), "t_escape": t_escape}));
        }
        _ => r.fail(),
    }
    let gauge = g.as_gauge().expect("gauge");
    let mut worst = 0.0_f64;
    for k in 0..=90 {
        let t = k as f64 * 0.01;
        let u = 1.0 / (1.0 - t);
        let res = gauge.acceleration_residual(
            &[u, 0.0],
            &Vector::from_column_slice(&[u * u, 0.0]),
            &Vector::from_column_slice(&[2.0 * u * u * u, 0.0]),
        )?;
        worst = worst.max(res.amax());
    }
    r.bound("analytic_curve_residual", worst, 1e-6);
    Ok(r)
}

pub fn run_suite(name: &str, seed: u64) -> Result<Report> {
    match name {
        "clifton-pohl" => clifton_pohl_suite(seed),
        "completeness" => completeness_suite(seed),
        "connect" => connect_suite(seed),
        "curvature" => curvature_suite(seed),
        "development" => development_suite(seed),
        "geodesic-map" => geodesic_map_suite(seed),
        "identities" => identities_suite(seed),
        "jacobi" => jacobi_suite(seed),
        "transport" => transport_suite(seed),
        "trotter" => trotter_suite(seed),
        other => Err(Error::Unsupported(format!("unknown suite '{other}'"))),
    }
}

/// Runs the named suites (all of them for `"all"`), concurrently when the
/// execution mode allows, and returns reports ordered by name.
pub fn run_suites(
    names: &[String],
    seed: u64,
    exec: Execution,
) -> Result<Vec<crate::analysis::Report>> {
    let mut wanted: Vec<String> = if names.iter().any(|n| n == "all") {
        SUITES.iter().map(|s| s.to_string()).collect()
    } else {
        names.to_vec()
    };
    wanted.sort();
    wanted.dedup();
    for n in &wanted {
        if !SUITES.contains(&n.as_str()) {
            return Err(Error::Unsupported(format!("unknown suite '{n}'")));
        }
    }
    let mut reports = par::map(exec, wanted, |n| run_suite(&n, seed))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| a.suite.cmp(&b.suite));
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes() {
        let reports = run_suites(&["all".to_string()], 7, Execution::default()).unwrap();
        assert_eq!(reports.len(), SUITES.len());
        for r in &reports {
            assert!(r.passed(), "{}", crate::output::to_json(r).unwrap());
        }
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_suites(&["nope".to_string()], 1, Execution::Sequential).is_err());
    }
}
