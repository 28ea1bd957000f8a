//! Geometry documents. Floats are written with seventeen significant digits,
//! so writing, reading and writing again reproduces the bytes.

use serde::{Deserialize, Serialize};

use super::catalog::chart_variables;
use super::expr::parse_expression;
use super::gauge::{build_gauge_from_metric_with, DerivativeMode, Domain};
use super::mutation::build_mutation;
use super::Geometry;
use crate::error::{Error, Result};
use crate::lie::{BaseProjection, GroupKind, MatrixAlgebra, ModelPair};
use crate::numeric::{Mat, Vector};
use crate::output::to_json;

type Rows = Vec<Vec<f64>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    #[serde(default)]
    pub name: Option<String>,
    pub basis: Vec<Rows>,
    pub h_indices: Vec<usize>,
    pub m_indices: Vec<usize>,
    #[serde(default)]
    pub group: Option<GroupKind>,
    #[serde(default)]
    pub base: Option<BaseProjection>,
    #[serde(default)]
    pub h_generators: Vec<Rows>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutationDoc {
    #[serde(default)]
    pub bundle_name: Option<String>,
    pub bundle_basis: Vec<Rows>,
    #[serde(default)]
    pub bundle_group: Option<GroupKind>,
    pub sigma: Rows,
    #[serde(default)]
    pub bundle_base: Option<BaseProjection>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeDoc {
    pub metric: Vec<Vec<String>>,
    #[serde(default)]
    pub variables: Option<Vec<String>>,
    pub signature: [usize; 2],
    pub domain: Domain,
    #[serde(default)]
    pub derivative_mode: Option<DerivativeMode>,
    #[serde(default)]
    pub sample_box: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub origin: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryDoc {
    pub kind: String,
    #[serde(default)]
    pub name: Option<String>,
    pub model: ModelDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation: Option<MutationDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<GaugeDoc>,
}

fn rows(m: &Mat) -> Rows {
    (0..m.nrows())
        .map(|i| m.row(i).iter().cloned().collect())
        .collect()
}

fn matrix(r: &Rows) -> Result<Mat> {
    let n = r.len();
    let cols = r.first().map_or(0, |row| row.len());
    if r.iter().any(|row| row.len() != cols) {
        return Err(Error::Format("ragged matrix rows".into()));
    }
    Ok(Mat::from_fn(n, cols, |i, j| r[i][j]))
}

fn model_doc(pair: &ModelPair) -> ModelDoc {
    let g = pair.algebra();
    ModelDoc {
        name: Some(g.name().to_string()),
        basis: g.basis().iter().map(rows).collect(),
        h_indices: pair.h_indices().to_vec(),
        m_indices: pair.m_indices().to_vec(),
        group: Some(g.group().clone()),
        base: Some(pair.base().clone()),
        h_generators: pair.h_generators().iter().map(rows).collect(),
    }
}

fn model_from_doc(doc: &ModelDoc) -> Result<ModelPair> {
    let basis = doc.basis.iter().map(matrix).collect::<Result<Vec<_>>>()?;
    let g = MatrixAlgebra::new(
        doc.name.clone().unwrap_or_else(|| "g".into()),
        basis,
        doc.group.clone().unwrap_or(GroupKind::General),
    )?;
    let gens = doc
        .h_generators
        .iter()
        .map(matrix)
        .collect::<Result<Vec<_>>>()?;
    ModelPair::new(
        g,
        doc.h_indices.clone(),
        doc.m_indices.clone(),
        gens,
        doc.base.clone().unwrap_or(BaseProjection::Full),
    )
}

pub fn to_document(geometry: &Geometry) -> Result<GeometryDoc> {
    match geometry {
        Geometry::Mutation(g) => {
            let bundle = g.bundle_algebra();
            Ok(GeometryDoc {
                kind: "mutation".into(),
                name: Some(g.name().to_string()),
                model: model_doc(g.model()),
                mutation: Some(MutationDoc {
                    bundle_name: Some(bundle.name().to_string()),
                    bundle_basis: bundle.basis().iter().map(rows).collect(),
                    bundle_group: Some(bundle.group().clone()),
                    sigma: rows(g.sigma_matrix()),
                    bundle_base: Some(g.base_projection().clone()),
                }),
                gauge: None,
            })
        }
        Geometry::Gauge(g) => {
            let src = g.metric_source().ok_or_else(|| {
                Error::Unsupported("only metric gauges have a document form".into())
            })?;
            Ok(GeometryDoc {
                kind: "gauge".into(),
                name: Some(g.name().to_string()),
                model: model_doc(g.model()),
                mutation: None,
                gauge: Some(GaugeDoc {
                    metric: src
                        .entries
                        .iter()
                        .map(|row| row.iter().map(|e| e.source().to_string()).collect())
                        .collect(),
                    variables: Some(src.entries[0][0].variables().to_vec()),
                    signature: [src.signature.0, src.signature.1],
                    domain: g.domain().clone(),
                    derivative_mode: Some(src.mode),
                    sample_box: Some(g.sample_box().to_vec()),
                    origin: Some(g.origin().iter().cloned().collect()),
                }),
            })
        }
    }
}

pub fn from_document(doc: &GeometryDoc) -> Result<Geometry> {
    let model = model_from_doc(&doc.model)?;
    match doc.kind.as_str() {
        "mutation" => {
            let m = doc.mutation.as_ref().ok_or_else(|| {
                Error::Format("mutation geometry needs a \"mutation\" section".into())
            })?;
            let basis = m
                .bundle_basis
                .iter()
                .map(matrix)
                .collect::<Result<Vec<_>>>()?;
            let bundle = MatrixAlgebra::new(
                m.bundle_name.clone().unwrap_or_else(|| "p".into()),
                basis,
                m.bundle_group.clone().unwrap_or(GroupKind::General),
            )?;
            let mut g = build_mutation(bundle, model, matrix(&m.sigma)?)?;
            if let Some(base) = &m.bundle_base {
                g = g.with_base(base.clone());
            }
            if let Some(name) = &doc.name {
                g = g.with_name(name.clone());
            }
            Ok(g.into())
        }
        "gauge" => {
            let gd = doc
                .gauge
                .as_ref()
                .ok_or_else(|| Error::Format("gauge geometry needs a \"gauge\" section".into()))?;
            let d = gd.metric.len();
            let vars = gd.variables.clone().unwrap_or_else(|| chart_variables(d));
            let names: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
            let entries = gd
                .metric
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|s| parse_expression(s, &names))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let mut g = build_gauge_from_metric_with(
                entries,
                (gd.signature[0], gd.signature[1]),
                gd.domain.clone(),
                gd.derivative_mode.unwrap_or(DerivativeMode::Analytic),
            )?;
            let built = g.model();
            let same = built.h_indices() == model.h_indices()
                && built.m_indices() == model.m_indices()
                && built.algebra().basis() == model.algebra().basis();
            if !same {
                return Err(Error::InvalidAlgebra(
                    "gauge model must be the flat model of the metric signature".into(),
                ));
            }
            if let Some(b) = &gd.sample_box {
                g = g.with_sample_box(b.clone())?;
            }
            if let Some(o) = &gd.origin {
                g = g.with_origin(Vector::from_column_slice(o))?;
            }
            if let Some(name) = &doc.name {
                g = g.with_name(name.clone());
            }
            Ok(g.into())
        }
        other => Err(Error::Format(format!("unknown geometry kind \"{other}\""))),
    }
}

pub fn geometry_to_json(geometry: &Geometry) -> Result<String> {
    to_json(&to_document(geometry)?)
}

pub fn geometry_from_json(text: &str) -> Result<Geometry> {
    let doc: GeometryDoc = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    from_document(&doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::catalog;

    #[test]
    fn catalog_round_trips_bit_exactly() {
        for name in [
            "euclidean:2",
            "hyperbolic:2",
            "hyperbolic-klein:3",
            "affine:2",
            "sl2xh",
            "sphere:2",
            "clifton-pohl",
        ] {
            let g = catalog(name).unwrap();
            let first = geometry_to_json(&g).unwrap();
            let back = geometry_from_json(&first).unwrap();
            let second = geometry_to_json(&back).unwrap();
            assert_eq!(first, second, "{name}");
            assert_eq!(back.name(), name);
        }
    }

    #[test]
    fn minimal_document_defaults() {
        let text = r#"{
            "kind": "mutation",
            "model": {
                "basis": [[[0.0, 1.0], [0.0, 0.0]]],
                "h_indices": [],
                "m_indices": [0]
            },
            "mutation": {
                "bundle_basis": [[[0.0, 1.0], [0.0, 0.0]]],
                "sigma": [[1.0]]
            }
        }"#;
        let g = geometry_from_json(text).unwrap();
        assert!(g.is_klein());
        assert_eq!(g.dim_m(), 1);
    }

    #[test]
    fn malformed_documents_are_errors() {
        assert!(matches!(geometry_from_json("{"), Err(Error::Format(_))));
        assert!(matches!(
            geometry_from_json(
                r#"{"kind":"mutation","model":{"basis":[],"h_indices":[],"m_indices":[]}}"#
            ),
            Err(Error::InvalidAlgebra(_))
        ));
        let bad_expr = r#"{"kind":"gauge","model":{"basis":[[[0,0,1],[0,0,0],[0,0,0]],[[0,0,0],[0,0,1],[0,0,0]],[[0,-1,0],[1,0,0],[0,0,0]]],"h_indices":[2],"m_indices":[0,1]},
            "gauge":{"metric":[["1","0"],["0","2*(u+"]],"signature":[2,0],"domain":{"box":[[0,1],[0,1]]}}}"#;
        assert!(matches!(
            geometry_from_json(bad_expr),
            Err(Error::ParseError { offset: 5, .. })
        ));
    }
}
