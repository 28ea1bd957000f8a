use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::coframe::{coframe, SMat};
use super::expr::{Dual, Expression, Real};
use super::mutation::MutationGeometry;
use super::{BundlePoint, HElement, Tangent};
use crate::error::{Error, Result};
use crate::lie::builtins::isometry_pair;
use crate::lie::{group_exp, AlgebraVector, ModelPair};
use crate::numeric::{try_central_diff4_mat, Mat, Vector};

const GROUP_TOL: f64 = 1e-8;
const FD_STEP: f64 = 1e-5;
/// Largest step used when following a frame field through the chart.
const FLOW_STEP: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    /// Forward-mode dual numbers through the metric and the coframe.
    Analytic,
    /// Fourth-order central differences, for entries that are not smooth.
    CentralDifference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Puncture {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// A closed coordinate box, optionally with an open ball removed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub puncture: Option<Puncture>,
}

impl Domain {
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Self {
            bounds: vec![[lo, hi]; dim],
            puncture: None,
        }
    }

    pub fn punctured(mut self, center: Vec<f64>, radius: f64) -> Self {
        self.puncture = Some(Puncture { center, radius });
        self
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.bounds.len() {
            return false;
        }
        let in_box = x
            .iter()
            .zip(&self.bounds)
            .all(|(xi, [lo, hi])| xi.is_finite() && *xi >= *lo && *xi <= *hi);
        let outside_hole = self.puncture.as_ref().is_none_or(|p| {
            let r2: f64 = x
                .iter()
                .zip(&p.center)
                .map(|(a, c)| (a - c) * (a - c))
                .sum();
            r2.sqrt() > p.radius
        });
        in_box && outside_hole
    }
}

/// Which group-valued section of a mutation geometry a chart comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectionKind {
    /// `s(x) = exp(sum x_i b_i)`: normal coordinates at the identity coset.
    Exponential,
    /// `s(x) = exp(x_1 b_1) ... exp(x_d b_d)`.
    Product,
}

#[derive(Clone, Debug)]
pub struct MetricSource {
    pub entries: Vec<Vec<Expression>>,
    pub signature: (usize, usize),
    pub mode: DerivativeMode,
}

impl MetricSource {
    pub fn eta(&self) -> Vec<f64> {
        let (p, q) = self.signature;
        let mut eta = vec![1.0; p];
        eta.extend(std::iter::repeat_n(-1.0, q));
        eta
    }

    pub fn metric(&self, x: &[f64]) -> Mat {
        let d = self.entries.len();
        Mat::from_fn(d, d, |i, j| self.entries[i][j].eval(x))
    }
}

pub type ColumnFn = Arc<dyn Fn(&[f64]) -> Mat + Send + Sync>;

/// Where the chart's connection form comes from.
#[derive(Clone)]
pub enum GaugeSource {
    Metric(MetricSource),
    Section {
        geometry: Arc<MutationGeometry>,
        kind: SectionKind,
    },
    /// Columns `A_x(e_j)` supplied directly, as a `dim g x d` matrix.
    Custom(ColumnFn),
}

impl fmt::Debug for GaugeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeSource::Metric(m) => f.debug_tuple("Metric").field(m).finish(),
            GaugeSource::Section { geometry, kind } => f
                .debug_struct("Section")
                .field("geometry", &geometry.name())
                .field("kind", kind)
                .finish(),
            GaugeSource::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// A connection form `A` on a single chart, realized on `U x H` by
/// `omega = Ad_{h^-1} A_x(xdot) + h^-1 hdot`.
#[derive(Clone, Debug)]
pub struct GaugeGeometry {
    name: String,
    model: ModelPair,
    source: GaugeSource,
    domain: Domain,
    sample_box: Vec<[f64; 2]>,
    origin: Vector,
}

fn check_chart(model: &ModelPair, domain: &Domain, origin: &Vector) -> Result<()> {
    let d = model.dim_m();
    if domain.dim() != d {
        return Err(Error::InvalidDimension {
            expected: d,
            found: domain.dim(),
        });
    }
    if origin.len() != d {
        return Err(Error::InvalidDimension {
            expected: d,
            found: origin.len(),
        });
    }
    if !domain.contains(origin.as_slice()) {
        return Err(Error::OutOfChart {
            x: origin.iter().cloned().collect(),
        });
    }
    Ok(())
}

fn sample_grid(bounds: &[[f64; 2]]) -> Vec<Vec<f64>> {
    let mut pts = vec![Vec::new()];
    for [lo, hi] in bounds {
        let mut next = Vec::new();
        for p in &pts {
            for k in 0..3 {
                let mut q = p.clone();
                q.push(lo + (hi - lo) * (0.1 + 0.4 * k as f64));
                next.push(q);
            }
        }
        pts = next;
    }
    pts
}

/// Builds the Levi-Civita Cartan connection of a metric given by expression
/// entries over the chart variables.
///
/// The model is flat space of the declared signature; the translation part is
/// an orthonormal coframe and the rotation part is the torsion-free,
/// metric-compatible connection form in that coframe, obtained from the
/// Christoffel symbols by a change of frame.
pub fn build_gauge_from_metric(
    entries: Vec<Vec<Expression>>,
    signature: (usize, usize),
    domain: Domain,
) -> Result<GaugeGeometry> {
    build_gauge_from_metric_with(entries, signature, domain, DerivativeMode::Analytic)
}

pub fn build_gauge_from_metric_with(
    entries: Vec<Vec<Expression>>,
    signature: (usize, usize),
    domain: Domain,
    mode: DerivativeMode,
) -> Result<GaugeGeometry> {
    let d = entries.len();
    if d == 0 || entries.iter().any(|row| row.len() != d) {
        return Err(Error::InvalidDimension {
            expected: d,
            found: entries.iter().map(|r| r.len()).max().unwrap_or(0),
        });
    }
    if signature.0 + signature.1 != d {
        return Err(Error::InvalidDimension {
            expected: d,
            found: signature.0 + signature.1,
        });
    }
    let source = MetricSource {
        entries,
        signature,
        mode,
    };
    let eta = source.eta();
    let model = isometry_pair(&eta)?;
    let origin = Vector::from_iterator(d, domain.bounds.iter().map(|[lo, hi]| 0.5 * (lo + hi)));
    let sample_box = domain.bounds.clone();
    let geom = GaugeGeometry {
        name: "metric".into(),
        model,
        source: GaugeSource::Metric(source),
        domain,
        sample_box,
        origin,
    };
    geom.check_metric()?;
    Ok(geom)
}

impl GaugeGeometry {
    /// A gauge whose columns are supplied by a closure.
    pub fn custom(
        name: impl Into<String>,
        model: ModelPair,
        columns: ColumnFn,
        domain: Domain,
    ) -> Result<Self> {
        let d = model.dim_m();
        let origin = Vector::from_iterator(d, domain.bounds.iter().map(|[lo, hi]| 0.5 * (lo + hi)));
        check_chart(&model, &domain, &origin)?;
        let sample_box = domain.bounds.clone();
        let geom = Self {
            name: name.into(),
            model,
            source: GaugeSource::Custom(columns),
            domain,
            sample_box,
            origin,
        };
        geom.coframe(geom.origin.as_slice())?;
        Ok(geom)
    }

    pub(crate) fn from_section(
        geometry: Arc<MutationGeometry>,
        kind: SectionKind,
        domain: Domain,
    ) -> Result<Self> {
        let model = geometry.model().clone();
        let d = model.dim_m();
        let origin = Vector::zeros(d);
        check_chart(&model, &domain, &origin)?;
        let sample_box = domain.bounds.clone();
        let geom = Self {
            name: format!("{}:section", geometry.name()),
            model,
            source: GaugeSource::Section { geometry, kind },
            domain,
            sample_box,
            origin,
        };
        geom.coframe(geom.origin.as_slice())?;
        Ok(geom)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Restricts random points to a sub-box of the domain.
    pub fn with_sample_box(mut self, sample_box: Vec<[f64; 2]>) -> Result<Self> {
        if sample_box.len() != self.chart_dim() {
            return Err(Error::InvalidDimension {
                expected: self.chart_dim(),
                found: sample_box.len(),
            });
        }
        self.sample_box = sample_box;
        Ok(self)
    }

    /// Sets the default start point for probes.
    pub fn with_origin(mut self, origin: Vector) -> Result<Self> {
        check_chart(&self.model, &self.domain, &origin)?;
        self.origin = origin;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn model(&self) -> &ModelPair {
        &self.model
    }

    pub fn source(&self) -> &GaugeSource {
        &self.source
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn sample_box(&self) -> &[[f64; 2]] {
        &self.sample_box
    }

    pub fn origin(&self) -> &Vector {
        &self.origin
    }

    pub fn chart_dim(&self) -> usize {
        self.model.dim_m()
    }

    pub fn metric_source(&self) -> Option<&MetricSource> {
        match &self.source {
            GaugeSource::Metric(m) => Some(m),
            _ => None,
        }
    }

    pub fn check_domain(&self, x: &[f64]) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfChart { x: x.to_vec() })
        }
    }

    fn check_metric(&self) -> Result<()> {
        let Some(src) = self.metric_source() else {
            return Ok(());
        };
        let (p, q) = src.signature;
        let mut points = sample_grid(&self.sample_box);
        points.push(self.origin.iter().cloned().collect());
        for x in points.iter().filter(|x| self.domain.contains(x)) {
            let g = src.metric(x);
            let scale = crate::numeric::max_abs(&g);
            if !g.iter().all(|v| v.is_finite()) {
                return Err(Error::DegenerateMetric { at: x.clone() });
            }
            if crate::numeric::max_abs(&(&g - g.transpose())) > 1e-12 * scale.max(1.0) {
                return Err(Error::InvalidAlgebra(format!(
                    "metric is not symmetric at {x:?}"
                )));
            }
            let eig = g.clone().symmetric_eigen().eigenvalues;
            if eig.iter().any(|l| l.abs() <= 1e-12 * scale) || scale == 0.0 {
                return Err(Error::DegenerateMetric { at: x.clone() });
            }
            let found = (
                eig.iter().filter(|l| **l > 0.0).count(),
                eig.iter().filter(|l| **l < 0.0).count(),
            );
            if found != (p, q) {
                return Err(Error::SignatureError {
                    expected: (p, q),
                    found,
                    at: x.clone(),
                });
            }
            self.coframe(x)?;
        }
        Ok(())
    }

    /// `A_x(e_j)` as the columns of a `dim g x d` matrix.
    pub fn columns(&self, x: &[f64]) -> Result<Mat> {
        self.check_domain(x)?;
        let cols = match &self.source {
            GaugeSource::Metric(src) => match src.mode {
                DerivativeMode::Analytic => {
                    let c = metric_columns::<f64>(src, &self.model, x)
                        .ok_or_else(|| coframe_failure(x))?;
                    Mat::from_fn(self.model.dim(), x.len(), |k, j| c[j][k])
                }
                DerivativeMode::CentralDifference => self.metric_columns_fd(src, x)?,
            },
            GaugeSource::Section { geometry, kind } => section_columns(geometry, *kind, x)?,
            GaugeSource::Custom(f) => f(x),
        };
        if !cols.iter().all(|v| v.is_finite()) {
            return Err(coframe_failure(x));
        }
        Ok(cols)
    }

    /// `d/dx_i` of [`Self::columns`], one matrix per chart direction.
    pub fn column_derivatives(&self, x: &[f64]) -> Result<Vec<Mat>> {
        self.check_domain(x)?;
        let d = x.len();
        if let GaugeSource::Metric(src) = &self.source {
            if src.mode == DerivativeMode::Analytic {
                let mut out = Vec::with_capacity(d);
                for i in 0..d {
                    let xs: Vec<Dual<f64>> = x
                        .iter()
                        .enumerate()
                        .map(|(k, &v)| Dual::new(v, if k == i { 1.0 } else { 0.0 }))
                        .collect();
                    let c = metric_columns::<Dual<f64>>(src, &self.model, &xs)
                        .ok_or_else(|| coframe_failure(x))?;
                    out.push(Mat::from_fn(self.model.dim(), d, |k, j| c[j][k].du));
                }
                return Ok(out);
            }
        }
        let mut out = Vec::with_capacity(d);
        for i in 0..d {
            let step = FD_STEP * x[i].abs().max(1.0);
            out.push(try_central_diff4_mat(
                |s| {
                    let mut y = x.to_vec();
                    y[i] += s;
                    self.columns(&y)
                },
                step,
            )?);
        }
        Ok(out)
    }

    fn metric_columns_fd(&self, src: &MetricSource, x: &[f64]) -> Result<Mat> {
        let d = x.len();
        let eta = src.eta();
        let step = |i: usize| 1e-6 * x[i].abs().max(1.0);
        let theta_at = |y: &[f64]| -> Result<Mat> {
            coframe(&SMat::from_mat(&src.metric(y)), &eta)
                .map(|t| t.values())
                .ok_or_else(|| coframe_failure(y))
        };
        let shifted = |i: usize, s: f64| {
            let mut y = x.to_vec();
            y[i] += s;
            y
        };
        let g = src.metric(x);
        let mut dg = Vec::with_capacity(d);
        let mut dtheta = Vec::with_capacity(d);
        for i in 0..d {
            dg.push(try_central_diff4_mat(
                |s| Ok::<_, Error>(src.metric(&shifted(i, s))),
                step(i),
            )?);
            dtheta.push(try_central_diff4_mat(
                |s| theta_at(&shifted(i, s)),
                step(i),
            )?);
        }
        let theta = theta_at(x)?;
        let c = assemble_columns(
            &self.model,
            &SMat::from_mat(&g),
            &dg.iter().map(SMat::from_mat).collect::<Vec<_>>(),
            &SMat::from_mat(&theta),
            &dtheta.iter().map(SMat::from_mat).collect::<Vec<_>>(),
        )
        .ok_or_else(|| coframe_failure(x))?;
        Ok(Mat::from_fn(self.model.dim(), d, |k, j| c[j][k]))
    }

    /// `A_x(u)`.
    pub fn gauge(&self, x: &[f64], u: &Vector) -> Result<AlgebraVector> {
        Ok(AlgebraVector::new(self.columns(x)? * u))
    }

    /// The m-rows of the gauge: a linear map from chart tangents to m.
    pub fn coframe(&self, x: &[f64]) -> Result<Mat> {
        let cols = self.columns(x)?;
        let theta = cols.select_rows(self.model.m_indices());
        let cond = crate::numeric::condition_number(&theta);
        if !(cond < 1e12) {
            return Err(coframe_failure(x));
        }
        Ok(theta)
    }

    fn h_matrix(&self, h_coords: &Vector) -> Mat {
        self.model.algebra().matrix_of(&self.model.from_h(h_coords))
    }

    /// Checks the chart point and projects `h` onto the model group.
    pub fn point(&self, x: Vector, h: Mat) -> Result<BundlePoint> {
        self.check_domain(x.as_slice())?;
        let n = self.model.algebra().ambient_dim();
        if h.nrows() != n || h.ncols() != n {
            return Err(Error::InvalidDimension {
                expected: n,
                found: h.nrows(),
            });
        }
        let group = self.model.algebra().group();
        let projected = group.project(&h);
        let residual = group.residual(&projected);
        if !(residual <= GROUP_TOL) {
            return Err(Error::NotInGroup { residual });
        }
        Ok(BundlePoint::Chart { x, h: projected })
    }

    pub fn origin_point(&self) -> BundlePoint {
        let n = self.model.algebra().ambient_dim();
        BundlePoint::Chart {
            x: self.origin.clone(),
            h: Mat::identity(n, n),
        }
    }

    pub fn h_element(&self, y: &Vector) -> Result<HElement> {
        let h = self.model.h_element(y)?;
        Ok(HElement {
            bundle: h.clone(),
            model: h,
        })
    }

    pub fn h_samples(&self) -> Result<Vec<HElement>> {
        Ok(self
            .model
            .h_samples()?
            .into_iter()
            .map(|h| HElement {
                bundle: h.clone(),
                model: h,
            })
            .collect())
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BundlePoint> {
        for _ in 0..1000 {
            let x = Vector::from_iterator(
                self.chart_dim(),
                self.sample_box
                    .iter()
                    .map(|[lo, hi]| rng.random_range(*lo..=*hi)),
            );
            if !self.domain.contains(x.as_slice()) {
                continue;
            }
            let y = Vector::from_fn(self.model.dim_h(), |_, _| rng.random_range(-1.0..1.0));
            return self.point(x, self.model.h_element(&y)?);
        }
        Err(Error::DomainError(
            "sample box misses the chart domain".into(),
        ))
    }

    /// `Ad_{h^-1} A_x(xdot) + h^-1 hdot`.
    pub fn connection(
        &self,
        x: &Vector,
        h: &Mat,
        xdot: &Vector,
        hdot: &Mat,
    ) -> Result<AlgebraVector> {
        let g = self.model.algebra();
        let h_inv = invert(h)?;
        let a = self.gauge(x.as_slice(), xdot)?;
        let vertical = g.coords_of(&(&h_inv * hdot))?;
        Ok(g.adjoint_with_inverse(&h_inv, h, &a)? + vertical)
    }

    /// The tangent `(xdot, hdot)` at `(x, h)` on which `omega` equals `xi`.
    pub fn connection_inverse(&self, x: &Vector, h: &Mat, xi: &AlgebraVector) -> Result<Tangent> {
        let (xdot, hdot) = self.frame_velocity(x, h, xi)?;
        Ok(Tangent::Chart { xdot, hdot })
    }

    pub(crate) fn frame_velocity(
        &self,
        x: &Vector,
        h: &Mat,
        xi: &AlgebraVector,
    ) -> Result<(Vector, Mat)> {
        let g = self.model.algebra();
        let eta = g.adjoint(h, xi)?;
        let cols = self.columns(x.as_slice())?;
        let theta = cols.select_rows(self.model.m_indices());
        let xdot = theta
            .lu()
            .solve(&self.model.m_part(&eta))
            .ok_or_else(|| coframe_failure(x.as_slice()))?;
        let a = AlgebraVector::new(&cols * &xdot);
        let vertical = self.model.h_part(&eta) - self.model.h_part(&a);
        Ok((xdot, self.h_matrix(&vertical) * h))
    }

    /// Follows the field `omega^-1(xi)` for time `t` with RK4.
    pub fn flow(&self, x: &Vector, h: &Mat, xi: &AlgebraVector, t: f64) -> Result<(Vector, Mat)> {
        if t == 0.0 {
            return Ok((x.clone(), h.clone()));
        }
        let n = (t.abs() / FLOW_STEP).ceil().max(1.0) as usize;
        let dt = t / n as f64;
        let mut state = (x.clone(), h.clone());
        for _ in 0..n {
            let (x0, h0) = &state;
            let (k1x, k1h) = self.frame_velocity(x0, h0, xi)?;
            let (k2x, k2h) =
                self.frame_velocity(&(x0 + &k1x * (dt / 2.0)), &(h0 + &k1h * (dt / 2.0)), xi)?;
            let (k3x, k3h) =
                self.frame_velocity(&(x0 + &k2x * (dt / 2.0)), &(h0 + &k2h * (dt / 2.0)), xi)?;
            let (k4x, k4h) = self.frame_velocity(&(x0 + &k3x * dt), &(h0 + &k3h * dt), xi)?;
            let x1 = x0 + (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (dt / 6.0);
            let h1 = h0 + (k1h + k2h * 2.0 + k3h * 2.0 + k4h) * (dt / 6.0);
            state = (x1, h1);
        }
        Ok(state)
    }

    /// `F(u, v) = dA(u, v) + [A(u), A(v)]` at a chart point.
    pub fn field_strength(&self, x: &[f64], u: &Vector, v: &Vector) -> Result<AlgebraVector> {
        let cols = self.columns(x)?;
        let dcols = self.column_derivatives(x)?;
        let g = self.model.algebra();
        let d = x.len();
        let mut da = Vector::zeros(self.model.dim());
        for i in 0..d {
            for j in 0..d {
                let w = u[i] * v[j];
                if w != 0.0 {
                    da += (dcols[i].column(j) - dcols[j].column(i)) * w;
                }
            }
        }
        let au = AlgebraVector::new(&cols * u);
        let av = AlgebraVector::new(&cols * v);
        Ok(AlgebraVector::new(da) + g.bracket(&au, &av)?)
    }

    /// Curvature on the frame fields of `X`, `Y` at the bundle point `(x, h)`.
    pub fn curvature(
        &self,
        x: &Vector,
        h: &Mat,
        a: &AlgebraVector,
        b: &AlgebraVector,
    ) -> Result<AlgebraVector> {
        let g = self.model.algebra();
        let theta = self.coframe(x.as_slice())?;
        let lu = theta.lu();
        let solve = |v: &AlgebraVector| -> Result<Vector> {
            let m = self.model.m_part(&g.adjoint(h, v)?);
            lu.solve(&m).ok_or_else(|| coframe_failure(x.as_slice()))
        };
        let (u, v) = (solve(a)?, solve(b)?);
        let f = self.field_strength(x.as_slice(), &u, &v)?;
        let h_inv = invert(h)?;
        g.adjoint_with_inverse(&h_inv, h, &f)
    }

    /// Covariant acceleration of a chart curve in the coframe at `h = 1`:
    /// `d/dt (theta xdot) + [A_h(xdot), theta xdot]`. Zero along geodesics.
    pub fn acceleration_residual(
        &self,
        x: &[f64],
        xdot: &Vector,
        xddot: &Vector,
    ) -> Result<Vector> {
        let cols = self.columns(x)?;
        let dcols = self.column_derivatives(x)?;
        let m_idx = self.model.m_indices();
        let theta = cols.select_rows(m_idx);
        let mut d_theta_xdot = &theta * xddot;
        for (k, dk) in dcols.iter().enumerate() {
            d_theta_xdot += dk.select_rows(m_idx) * xdot * xdot[k];
        }
        let a = AlgebraVector::new(&cols * xdot);
        let rot = self.model.project_h(&a);
        let vel = self.model.from_m(&(&theta * xdot));
        let turn = self
            .model
            .m_part(&self.model.algebra().bracket(&rot, &vel)?);
        Ok(d_theta_xdot + turn)
    }

    /// The model-group frame over a chart point, when the chart comes from a
    /// Klein section; otherwise the structure-group element alone.
    pub fn frame(&self, x: &Vector, h: &Mat) -> Result<Mat> {
        match &self.source {
            GaugeSource::Section { geometry, kind } if geometry.is_klein() => {
                Ok(section(geometry, *kind, x.as_slice())? * h)
            }
            _ => Ok(h.clone()),
        }
    }

    /// Chart coordinates, or model-space coordinates for Klein sections so
    /// that traces compare directly with the group representation.
    pub fn base_coords(&self, x: &Vector, h: &Mat) -> Result<Vector> {
        match &self.source {
            GaugeSource::Section { geometry, .. } if geometry.is_klein() => {
                Ok(geometry.base_projection().apply(&self.frame(x, h)?))
            }
            _ => Ok(x.clone()),
        }
    }
}

fn invert(h: &Mat) -> Result<Mat> {
    h.clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericalFailure("structure-group element is singular".into()))
}

fn coframe_failure(x: &[f64]) -> Error {
    Error::NumericalFailure(format!("coframe is not invertible at {x:?}"))
}

/// Per-column algebra coordinates, generic over the scalar so the same code
/// yields values and exact derivatives.
fn metric_columns<T: Real>(src: &MetricSource, model: &ModelPair, x: &[T]) -> Option<Vec<Vec<T>>> {
    let d = x.len();
    let eta = src.eta();
    let mut g = SMat::<T>::zeros(d, d);
    let mut dg = vec![SMat::<T>::zeros(d, d); d];
    let mut theta = SMat::<T>::zeros(d, d);
    let mut dtheta = Vec::with_capacity(d);
    for k in 0..d {
        let xs: Vec<Dual<T>> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| Dual::new(v, T::cst(if i == k { 1.0 } else { 0.0 })))
            .collect();
        let gk = SMat::from_fn(d, d, |i, j| src.entries[i][j].eval(&xs));
        if k == 0 {
            g = gk.map(|v| v.re);
        }
        dg[k] = gk.map(|v| v.du);
        let th = coframe(&gk, &eta)?;
        if k == 0 {
            theta = th.map(|v| v.re);
        }
        dtheta.push(th.map(|v| v.du));
    }
    assemble_columns(model, &g, &dg, &theta, &dtheta)
}

/// Column `j` is the algebra element `[[W_j, theta e_j], [0, 0]]` with
/// `W_j = theta Gamma_j theta^-1 - (d_j theta) theta^-1`.
fn assemble_columns<T: Real>(
    model: &ModelPair,
    g: &SMat<T>,
    dg: &[SMat<T>],
    theta: &SMat<T>,
    dtheta: &[SMat<T>],
) -> Option<Vec<Vec<T>>> {
    let d = g.rows();
    let g_inv = g.inverse()?;
    let theta_inv = theta.inverse()?;
    let half = T::cst(0.5);
    let projector = model.algebra().projector();
    let n = d + 1;
    let mut out = Vec::with_capacity(d);
    for j in 0..d {
        // (Gamma_j)^i_b = Gamma^i_{j b}
        let gamma = SMat::from_fn(d, d, |i, b| {
            let mut acc = T::cst(0.0);
            for l in 0..d {
                let lower = dg[j].get(l, b) + dg[b].get(l, j) - dg[l].get(j, b);
                acc = acc + g_inv.get(i, l) * lower;
            }
            acc * half
        });
        let w = theta
            .mul(&gamma)
            .mul(&theta_inv)
            .sub(&dtheta[j].mul(&theta_inv));
        let ambient = SMat::from_fn(n, n, |r, c| {
            if r < d && c < d {
                w.get(r, c)
            } else if r < d && c == d {
                theta.get(r, j)
            } else {
                T::cst(0.0)
            }
        });
        let coords: Vec<T> = (0..projector.nrows())
            .map(|k| {
                let mut acc = T::cst(0.0);
                for idx in 0..n * n {
                    let p = projector[(k, idx)];
                    if p != 0.0 {
                        acc = acc + ambient.get(idx / n, idx % n) * T::cst(p);
                    }
                }
                acc
            })
            .collect();
        out.push(coords);
    }
    Some(out)
}

fn section(geometry: &MutationGeometry, kind: SectionKind, x: &[f64]) -> Result<Mat> {
    let model = geometry.model();
    let dim = model.dim();
    let gens: Vec<Mat> = model
        .m_indices()
        .iter()
        .map(|&i| geometry.bundle_matrix(&AlgebraVector::basis(dim, i)))
        .collect();
    match kind {
        SectionKind::Exponential => {
            let n = geometry.bundle_algebra().ambient_dim();
            let mut z = Mat::zeros(n, n);
            for (xi, b) in x.iter().zip(&gens) {
                z += b * *xi;
            }
            group_exp(&z)
        }
        SectionKind::Product => {
            let n = geometry.bundle_algebra().ambient_dim();
            let mut s = Mat::identity(n, n);
            for (xi, b) in x.iter().zip(&gens) {
                s *= group_exp(&(b * *xi))?;
            }
            Ok(s)
        }
    }
}

/// `A_x(e_j) = omega(d s(e_j))` for a group-valued section `s`.
fn section_columns(geometry: &MutationGeometry, kind: SectionKind, x: &[f64]) -> Result<Mat> {
    let model = geometry.model();
    let dim = model.dim();
    let bundle = geometry.bundle_algebra();
    let n = bundle.ambient_dim();
    let gens: Vec<Mat> = model
        .m_indices()
        .iter()
        .map(|&i| geometry.bundle_matrix(&AlgebraVector::basis(dim, i)))
        .collect();
    let d = x.len();
    let mut out = Mat::zeros(dim, d);
    match kind {
        SectionKind::Exponential => {
            // e^-Z d e^Z(B) = sum_k (-ad_Z)^k B / (k+1)!, read off the corner of
            // exp([[-ad_Z, I], [0, 0]]); stays in the algebra for large Z
            let gen_coords = gens
                .iter()
                .map(|b| bundle.coords_of(b))
                .collect::<Result<Vec<_>>>()?;
            let mut z = Vector::zeros(dim);
            for (xi, c) in x.iter().zip(&gen_coords) {
                z += c.coords() * *xi;
            }
            let ad = bundle.ad_matrix(&AlgebraVector::new(z));
            let mut big = Mat::zeros(2 * dim, 2 * dim);
            big.view_mut((0, 0), (dim, dim)).copy_from(&(-ad));
            big.view_mut((0, dim), (dim, dim)).fill_with_identity();
            let phi = group_exp(&big)?.view((0, dim), (dim, dim)).clone_owned();
            for (j, c) in gen_coords.iter().enumerate() {
                let xi = AlgebraVector::new(&phi * c.coords());
                out.set_column(j, geometry.sigma(&xi).coords());
            }
        }
        SectionKind::Product => {
            // s^-1 d_j s = Ad of the trailing factors' inverse applied to b_j
            for (j, b) in gens.iter().enumerate() {
                let mut tail = Mat::identity(n, n);
                for k in (j + 1)..d {
                    tail *= group_exp(&(&gens[k] * x[k]))?;
                }
                let tail_inv = invert(&tail)?;
                let xi = bundle.coords_of(&(&tail_inv * b * &tail))?;
                out.set_column(j, geometry.sigma(&xi).coords());
            }
        }
    }
    Ok(out)
}
