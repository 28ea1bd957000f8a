//! Built-in geometries addressed by name, e.g. `hyperbolic:3`.

use std::f64::consts::PI;

use super::expr::parse_expression;
use super::gauge::{build_gauge_from_metric, Domain};
use super::mutation::build_mutation;
use super::Geometry;
use crate::error::{Error, Result};
use crate::lie::builtins::{
    affine_pair, euclidean_pair, lorentz_algebra, lorentz_pair, sl2_so2_pair,
};
use crate::lie::BaseProjection;
use crate::numeric::{Mat, Vector};

/// Names accepted by [`catalog`]; `n` stands for a positive dimension.
pub fn catalog_names() -> &'static [&'static str] {
    &[
        "euclidean:n",
        "hyperbolic:n",
        "hyperbolic-klein:n",
        "sphere:2",
        "affine:n",
        "sl2xh",
        "clifton-pohl",
    ]
}

/// Chart variable names: `u, v, w` up to three dimensions, then `x1..xd`.
pub fn chart_variables(d: usize) -> Vec<String> {
    if d <= 3 {
        ["u", "v", "w"][..d].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=d).map(|i| format!("x{i}")).collect()
    }
}

fn dimension(name: &str, family: &str) -> Result<Option<usize>> {
    let Some(rest) = name.strip_prefix(family).and_then(|r| r.strip_prefix(':')) else {
        return Ok(None);
    };
    match rest.parse::<usize>() {
        Ok(n) if (1..=8).contains(&n) => Ok(Some(n)),
        _ => Err(Error::UnknownModel(name.to_string())),
    }
}

fn klein(pair: crate::lie::ModelPair, name: &str) -> Result<Geometry> {
    let dim = pair.dim();
    let g = pair.algebra().clone();
    Ok(build_mutation(g, pair, Mat::identity(dim, dim))?
        .with_name(name)
        .into())
}

/// The metric gauge with entries given as source strings over `u, v, ...`.
pub fn metric_gauge(
    entries: &[&[&str]],
    signature: (usize, usize),
    domain: Domain,
) -> Result<super::GaugeGeometry> {
    let vars = chart_variables(entries.len());
    let names: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
    let parsed = entries
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| parse_expression(s, &names))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    build_gauge_from_metric(parsed, signature, domain)
}

fn sphere() -> Result<Geometry> {
    let domain = Domain {
        bounds: vec![[0.05, PI - 0.05], [-1.0e3, 1.0e3]],
        puncture: None,
    };
    Ok(
        metric_gauge(&[&["1", "0"], &["0", "sin(u)^2"]], (2, 0), domain)?
            .with_name("sphere:2")
            .with_sample_box(vec![[0.3, PI - 0.3], [-PI, PI]])?
            .with_origin(Vector::from_column_slice(&[PI / 2.0, 0.0]))?
            .into(),
    )
}

fn clifton_pohl() -> Result<Geometry> {
    let domain = Domain::cube(2, -1.0e6, 1.0e6).punctured(vec![0.0, 0.0], 1.0e-6);
    let off = "1/(u^2+v^2)";
    Ok(metric_gauge(&[&["0", off], &[off, "0"]], (1, 1), domain)?
        .with_name("clifton-pohl")
        .with_sample_box(vec![[0.5, 2.0], [-1.0, 1.0]])?
        .with_origin(Vector::from_column_slice(&[1.0, 0.0]))?
        .into())
}

/// Looks up a built-in geometry.
pub fn catalog(name: &str) -> Result<Geometry> {
    if let Some(n) = dimension(name, "euclidean")? {
        return klein(euclidean_pair(n)?, name);
    }
    if let Some(n) = dimension(name, "hyperbolic")? {
        let pair = euclidean_pair(n)?;
        let dim = pair.dim();
        let mut origin = vec![0.0; n + 1];
        origin[0] = 1.0;
        return Ok(
            build_mutation(lorentz_algebra(n)?, pair, Mat::identity(dim, dim))?
                .with_name(name)
                .with_base(BaseProjection::Orbit { origin })
                .into(),
        );
    }
    if let Some(n) = dimension(name, "hyperbolic-klein")? {
        return klein(lorentz_pair(n)?, name);
    }
    if let Some(n) = dimension(name, "affine")? {
        return klein(affine_pair(n)?, name);
    }
    match name {
        "sphere:2" => sphere(),
        "sl2xh" => klein(sl2_so2_pair()?, name),
        "clifton-pohl" => clifton_pohl(),
        _ => Err(Error::UnknownModel(name.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolic_dimensions() {
        let g = catalog("hyperbolic:2").unwrap();
        assert_eq!(g.dim_m(), 2);
        assert_eq!(g.dim_h(), 1);
        assert!(!g.is_klein());
    }

    #[test]
    fn sl2xh_is_klein_over_sl2() {
        let g = catalog("sl2xh").unwrap();
        assert!(g.is_klein());
        assert_eq!(g.dim_m(), 3);
        assert_eq!(g.dim_h(), 1);
    }

    #[test]
    fn unknown_names() {
        for bad in [
            "noSuchModel",
            "euclidean:0",
            "hyperbolic:x",
            "sphere:3",
            "euclidean",
        ] {
            assert!(matches!(catalog(bad), Err(Error::UnknownModel(_))), "{bad}");
        }
    }

    #[test]
    fn every_family_builds() {
        for name in [
            "euclidean:1",
            "euclidean:3",
            "hyperbolic:3",
            "hyperbolic-klein:2",
            "sphere:2",
            "affine:2",
            "sl2xh",
            "clifton-pohl",
        ] {
            catalog(name).unwrap();
        }
    }
}
