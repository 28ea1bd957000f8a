use rand::Rng;

use super::{BundlePoint, HElement, Tangent};
use crate::error::{Error, Result};
use crate::lie::{
    group_exp, validate_reductive, AlgebraVector, BaseProjection, MatrixAlgebra, ModelPair,
};
use crate::numeric::{condition_number, max_abs, Mat, Vector};

const ISO_TOL: f64 = 1e-11;
const MUTATION_TOL: f64 = 1e-9;
const GROUP_TOL: f64 = 1e-8;

/// A bundle group `P` with `omega = sigma o omega_P`, where `sigma` maps
/// `Lie(P)` coordinates linearly onto model coordinates.
#[derive(Clone, Debug)]
pub struct MutationGeometry {
    name: String,
    bundle: MatrixAlgebra,
    model: ModelPair,
    sigma: Mat,
    sigma_inv: Mat,
    base: BaseProjection,
    klein: bool,
}

/// Validates `sigma` and assembles the geometry. The base projection defaults
/// to the model's when `sigma` is the identity on a shared basis, and to the
/// full matrix otherwise.
pub fn build_mutation(
    bundle: MatrixAlgebra,
    model: ModelPair,
    sigma: Mat,
) -> Result<MutationGeometry> {
    let dim = model.dim();
    if bundle.dim() != dim {
        return Err(Error::InvalidDimension {
            expected: dim,
            found: bundle.dim(),
        });
    }
    if sigma.nrows() != dim || sigma.ncols() != dim {
        return Err(Error::InvalidDimension {
            expected: dim,
            found: sigma.nrows().max(sigma.ncols()),
        });
    }
    let report = validate_reductive(&model);
    if !report.passed() {
        return Err(Error::InvalidAlgebra(format!(
            "{}: model is not reductive ({:?})",
            model.algebra().name(),
            report
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| &c.name)
                .collect::<Vec<_>>()
        )));
    }
    if !condition_number(&sigma).is_finite() || condition_number(&sigma) > 1e12 {
        return Err(Error::NotAnIsomorphism);
    }
    let sigma_inv = sigma.clone().try_inverse().ok_or(Error::NotAnIsomorphism)?;
    if max_abs(&(&sigma_inv * &sigma - Mat::identity(dim, dim))) > ISO_TOL {
        return Err(Error::NotAnIsomorphism);
    }

    let klein = max_abs(&(&sigma - Mat::identity(dim, dim))) == 0.0
        && bundle.ambient_dim() == model.algebra().ambient_dim()
        && bundle
            .basis()
            .iter()
            .zip(model.algebra().basis())
            .all(|(a, b)| a == b);
    let base = if klein {
        model.base().clone()
    } else {
        BaseProjection::Full
    };
    let geom = MutationGeometry {
        name: format!("mutation({} -> {})", bundle.name(), model.algebra().name()),
        bundle,
        model,
        sigma,
        sigma_inv,
        base,
        klein,
    };
    geom.check_h_homomorphism()?;
    geom.check_intertwining()?;
    Ok(geom)
}

impl MutationGeometry {
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_base(mut self, base: BaseProjection) -> Self {
        self.base = base;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bundle_algebra(&self) -> &MatrixAlgebra {
        &self.bundle
    }

    pub fn model(&self) -> &ModelPair {
        &self.model
    }

    pub fn sigma_matrix(&self) -> &Mat {
        &self.sigma
    }

    pub fn sigma_inv_matrix(&self) -> &Mat {
        &self.sigma_inv
    }

    pub fn base_projection(&self) -> &BaseProjection {
        &self.base
    }

    /// `sigma = id` on a shared basis: the geometry is the Klein model itself.
    pub fn is_klein(&self) -> bool {
        self.klein
    }

    pub fn sigma(&self, xi: &AlgebraVector) -> AlgebraVector {
        AlgebraVector::new(&self.sigma * xi.coords())
    }

    pub fn sigma_inv(&self, x: &AlgebraVector) -> AlgebraVector {
        AlgebraVector::new(&self.sigma_inv * x.coords())
    }

    /// Bundle-algebra matrix of `sigma^-1(x)`.
    pub fn bundle_matrix(&self, x: &AlgebraVector) -> Mat {
        self.bundle.matrix_of(&self.sigma_inv(x))
    }

    fn check_h_homomorphism(&self) -> Result<()> {
        let g = self.model.algebra();
        let dim = g.dim();
        for &i in self.model.h_indices() {
            for &j in self.model.h_indices() {
                let yi = AlgebraVector::basis(dim, i);
                let yj = AlgebraVector::basis(dim, j);
                let pulled = self
                    .bundle
                    .bracket(&self.sigma_inv(&yi), &self.sigma_inv(&yj))?;
                let r = (self.sigma(&pulled) - g.bracket(&yi, &yj)?).max_abs();
                if r > MUTATION_TOL {
                    return Err(Error::InvalidMutation(format!(
                        "sigma is not a homomorphism on h (residual {r:e})"
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_intertwining(&self) -> Result<()> {
        let dim = self.model.dim();
        for h in self.h_samples()? {
            for i in 0..dim {
                let xi = AlgebraVector::basis(dim, i);
                let lhs = self.sigma(&self.bundle.adjoint(&h.bundle, &xi)?);
                let rhs = self.model.algebra().adjoint(&h.model, &self.sigma(&xi))?;
                let r = (lhs - rhs).max_abs();
                if r > MUTATION_TOL {
                    return Err(Error::InvalidMutation(format!(
                        "sigma does not intertwine the adjoint action of H (residual {r:e})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `exp(y)` for h-coordinates `y`, in both the bundle and model groups.
    pub fn h_element(&self, y: &Vector) -> Result<HElement> {
        let yh = self.model.from_h(y);
        Ok(HElement {
            bundle: group_exp(&self.bundle_matrix(&yh))?,
            model: group_exp(&self.model.algebra().matrix_of(&yh))?,
        })
    }

    /// Structure-group sample. Discrete generators are only known in the model
    /// group, so they are included when bundle and model coincide.
    pub fn h_samples(&self) -> Result<Vec<HElement>> {
        let mut out = Vec::new();
        for y in self.model.h_sample_coords() {
            out.push(self.h_element(&y)?);
        }
        if self.klein {
            out.extend(self.model.h_generators().iter().map(|g| HElement {
                bundle: g.clone(),
                model: g.clone(),
            }));
        }
        Ok(out)
    }

    /// Projects onto the bundle group and checks the result.
    pub fn point(&self, p: Mat) -> Result<BundlePoint> {
        let n = self.bundle.ambient_dim();
        if p.nrows() != n || p.ncols() != n {
            return Err(Error::InvalidDimension {
                expected: n,
                found: p.nrows(),
            });
        }
        let projected = self.bundle.group().project(&p);
        let residual = self.bundle.group().residual(&projected);
        if !(residual <= GROUP_TOL) {
            return Err(Error::NotInGroup { residual });
        }
        Ok(BundlePoint::Group(projected))
    }

    pub fn identity_point(&self) -> BundlePoint {
        let n = self.bundle.ambient_dim();
        BundlePoint::Group(Mat::identity(n, n))
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BundlePoint> {
        let dim = self.bundle.dim();
        let a = AlgebraVector::new(Vector::from_fn(dim, |_, _| rng.random_range(-0.5..0.5)));
        let b = AlgebraVector::new(Vector::from_fn(dim, |_, _| rng.random_range(-0.5..0.5)));
        self.point(self.bundle.exp(&a)? * self.bundle.exp(&b)?)
    }

    /// `omega_p(pdot) = sigma(p^-1 pdot)`.
    pub fn connection(&self, p: &Mat, pdot: &Mat) -> Result<AlgebraVector> {
        let p_inv = p
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NumericalFailure("bundle point is singular".into()))?;
        Ok(self.sigma(&self.bundle.coords_of(&(p_inv * pdot))?))
    }

    /// The tangent at `p` on which `omega` takes the value `x`.
    pub fn connection_inverse(&self, p: &Mat, x: &AlgebraVector) -> Tangent {
        Tangent::Group(p * self.bundle_matrix(x))
    }

    /// Flow of the constant field `omega^-1(x)` for time `t`.
    pub fn flow(&self, p: &Mat, x: &AlgebraVector, t: f64) -> Result<Mat> {
        Ok(p * group_exp(&(self.bundle_matrix(x) * t))?)
    }

    /// `[X, Y]_g - sigma([sigma^-1 X, sigma^-1 Y])`, independent of the point.
    pub fn curvature(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
        let g = self.model.algebra();
        let model_bracket = g.bracket(x, y)?;
        let bundle_bracket = self
            .bundle
            .bracket(&self.sigma_inv(x), &self.sigma_inv(y))?;
        Ok(model_bracket - self.sigma(&bundle_bracket))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::builtins::{euclidean_pair, isometry_algebra, lorentz_algebra, lorentz_pair};

    fn hyperbolic(n: usize) -> MutationGeometry {
        let dim = n + n * (n - 1) / 2;
        build_mutation(
            lorentz_algebra(n).unwrap(),
            euclidean_pair(n).unwrap(),
            Mat::identity(dim, dim),
        )
        .unwrap()
    }

    #[test]
    fn hyperbolic_sigma_is_valid() {
        let g = hyperbolic(2);
        assert!(!g.is_klein());
        assert_eq!(g.model().dim_m(), 2);
        assert_eq!(g.model().dim_h(), 1);
        hyperbolic(3);
    }

    #[test]
    fn identity_sigma_is_klein() {
        let pair = euclidean_pair(2).unwrap();
        let g = build_mutation(
            isometry_algebra(&[1.0, 1.0]).unwrap(),
            pair,
            Mat::identity(3, 3),
        )
        .unwrap();
        assert!(g.is_klein());
        let k = build_mutation(
            lorentz_algebra(2).unwrap(),
            lorentz_pair(2).unwrap(),
            Mat::identity(3, 3),
        )
        .unwrap();
        assert!(k.is_klein());
    }

    #[test]
    fn zero_row_is_not_an_isomorphism() {
        let mut sigma = Mat::identity(3, 3);
        sigma.row_mut(1).fill(0.0);
        let err = build_mutation(
            lorentz_algebra(2).unwrap(),
            euclidean_pair(2).unwrap(),
            sigma,
        )
        .unwrap_err();
        assert_eq!(err, Error::NotAnIsomorphism);
    }

    #[test]
    fn scaling_h_breaks_the_homomorphism() {
        let mut sigma = Mat::identity(3, 3);
        sigma[(2, 2)] = 2.0;
        let err = build_mutation(
            lorentz_algebra(2).unwrap(),
            euclidean_pair(2).unwrap(),
            sigma,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidMutation(_)), "{err:?}");
    }

    #[test]
    fn shearing_m_breaks_intertwining() {
        let mut sigma = Mat::identity(3, 3);
        sigma[(0, 1)] = 0.5;
        let err = build_mutation(
            lorentz_algebra(2).unwrap(),
            euclidean_pair(2).unwrap(),
            sigma,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidMutation(_)), "{err:?}");
    }

    #[test]
    fn dimension_mismatch() {
        let err = build_mutation(
            lorentz_algebra(3).unwrap(),
            euclidean_pair(2).unwrap(),
            Mat::identity(3, 3),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidDimension { .. }));
    }

    #[test]
    fn left_translated_preimage_reads_back() {
        let g = hyperbolic(2);
        let mut rng = rand::rng();
        let BundlePoint::Group(p) = g.random_point(&mut rng).unwrap() else {
            unreachable!()
        };
        let x = AlgebraVector::from_slice(&[0.3, -1.2, 0.7]);
        let Tangent::Group(t) = g.connection_inverse(&p, &x) else {
            unreachable!()
        };
        assert!((g.connection(&p, &t).unwrap() - x).max_abs() < 1e-12);
    }
}
