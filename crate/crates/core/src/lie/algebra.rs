use std::fmt;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use nalgebra::DMatrix;

use super::group::GroupKind;
use crate::error::{Error, Result};
use crate::numeric::{commutator, max_abs, Mat, Vector};

/// Closure and Jacobi residuals above this are rejected at construction.
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Span-projection residual tolerated when reading a matrix back into coordinates.
pub const SPAN_TOL: f64 = 1e-9;

/// Coordinates of an element of a matrix Lie algebra over its fixed basis.
///
/// Coordinates are authoritative; the matrix form is derived on demand through
/// [`MatrixAlgebra::matrix_of`].
#[derive(Clone, PartialEq)]
pub struct AlgebraVector {
    coords: Vector,
}

impl AlgebraVector {
    pub fn new(coords: Vector) -> Self {
        Self { coords }
    }

    pub fn from_slice(coords: &[f64]) -> Self {
        Self::new(Vector::from_column_slice(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(Vector::zeros(dim))
    }

    /// The `i`-th basis vector of a `dim`-dimensional algebra.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Vector::zeros(dim);
        v[i] = 1.0;
        Self::new(v)
    }

    pub fn coords(&self) -> &Vector {
        &self.coords
    }

    pub fn into_coords(self) -> Vector {
        self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn max_abs(&self) -> f64 {
        crate::numeric::max_abs_vec(&self.coords)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(&self.coords * s)
    }
}

impl fmt::Debug for AlgebraVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coords.iter()).finish()
    }
}

impl Index<usize> for AlgebraVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

impl Add for &AlgebraVector {
    type Output = AlgebraVector;
    fn add(self, rhs: &AlgebraVector) -> AlgebraVector {
        AlgebraVector::new(&self.coords + &rhs.coords)
    }
}

impl Add for AlgebraVector {
    type Output = AlgebraVector;
    fn add(self, rhs: AlgebraVector) -> AlgebraVector {
        AlgebraVector::new(self.coords + rhs.coords)
    }
}

impl AddAssign<&AlgebraVector> for AlgebraVector {
    fn add_assign(&mut self, rhs: &AlgebraVector) {
        self.coords += &rhs.coords;
    }
}

impl Sub for &AlgebraVector {
    type Output = AlgebraVector;
    fn sub(self, rhs: &AlgebraVector) -> AlgebraVector {
        AlgebraVector::new(&self.coords - &rhs.coords)
    }
}

impl Sub for AlgebraVector {
    type Output = AlgebraVector;
    fn sub(self, rhs: AlgebraVector) -> AlgebraVector {
        AlgebraVector::new(self.coords - rhs.coords)
    }
}

impl Mul<f64> for &AlgebraVector {
    type Output = AlgebraVector;
    fn mul(self, s: f64) -> AlgebraVector {
        self.scale(s)
    }
}

impl Mul<f64> for AlgebraVector {
    type Output = AlgebraVector;
    fn mul(self, s: f64) -> AlgebraVector {
        AlgebraVector::new(self.coords * s)
    }
}

impl Neg for AlgebraVector {
    type Output = AlgebraVector;
    fn neg(self) -> AlgebraVector {
        AlgebraVector::new(-self.coords)
    }
}

/// A real matrix Lie algebra given by an ordered basis of square matrices.
#[derive(Clone, Debug)]
pub struct MatrixAlgebra {
    name: String,
    ambient_dim: usize,
    basis: Vec<Mat>,
    /// `c[(i * m + j) * m + k]` with `[b_i, b_j] = sum_k c[i][j][k] b_k`.
    structure: Vec<f64>,
    /// Left inverse of the flattened basis, `m x n^2`.
    projector: Mat,
    group: GroupKind,
}

fn flatten(m: &Mat) -> Vector {
    // row-major
    let n = m.nrows();
    Vector::from_fn(n * m.ncols(), |idx, _| m[(idx / n, idx % n)])
}

impl MatrixAlgebra {
    /// Builds the algebra, checking linear independence, closure and the
    /// Jacobi identity on every basis triple.
    pub fn new(name: impl Into<String>, basis: Vec<Mat>, group: GroupKind) -> Result<Self> {
        let name = name.into();
        let m = basis.len();
        if m == 0 {
            return Err(Error::InvalidAlgebra(format!("{name}: empty basis")));
        }
        let n = basis[0].nrows();
        for b in &basis {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::InvalidDimension {
                    expected: n,
                    found: b.ncols().max(b.nrows()),
                });
            }
            if !crate::numeric::all_finite(b) {
                return Err(Error::NumericalFailure(format!(
                    "{name}: non-finite basis entry"
                )));
            }
        }

        let mut flat = Mat::zeros(n * n, m);
        for (j, b) in basis.iter().enumerate() {
            flat.set_column(j, &flatten(b));
        }
        let svd = flat.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin <= 1e-10 * smax {
            return Err(Error::InvalidAlgebra(format!(
                "{name}: basis matrices are linearly dependent"
            )));
        }
        let gram = flat.transpose() * &flat;
        let gram_inv = gram
            .try_inverse()
            .ok_or_else(|| Error::InvalidAlgebra(format!("{name}: singular Gram matrix")))?;
        let projector = gram_inv * flat.transpose();

        let mut alg = Self {
            name,
            ambient_dim: n,
            basis,
            structure: vec![0.0; m * m * m],
            projector,
            group,
        };

        for i in 0..m {
            for j in 0..m {
                let c = commutator(&alg.basis[i], &alg.basis[j]);
                let (coords, residual) = alg.coords_with_residual(&c);
                if residual > STRUCTURE_TOL * max_abs(&c).max(1.0) {
                    return Err(Error::InvalidAlgebra(format!(
                        "{}: [b{i}, b{j}] leaves the span (residual {residual:e})",
                        alg.name
                    )));
                }
                for k in 0..m {
                    alg.structure[(i * m + j) * m + k] = coords[k];
                }
            }
        }
        let jac = alg.jacobi_residual();
        if jac > STRUCTURE_TOL {
            return Err(Error::InvalidAlgebra(format!(
                "{}: Jacobi identity fails (residual {jac:e})",
                alg.name
            )));
        }
        Ok(alg)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Mat] {
        &self.basis
    }

    /// Left inverse of the row-major flattened basis, `dim x ambient_dim^2`.
    pub fn projector(&self) -> &Mat {
        &self.projector
    }

    pub fn group(&self) -> &GroupKind {
        &self.group
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        let m = self.dim();
        self.structure[(i * m + j) * m + k]
    }

    /// Max-norm of `[[b_i,b_j],b_k] + [[b_j,b_k],b_i] + [[b_k,b_i],b_j]` over all
    /// basis triples, evaluated through the structure constants.
    pub fn jacobi_residual(&self) -> f64 {
        let m = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for out in 0..m {
                        let mut s = 0.0;
                        for l in 0..m {
                            s += self.structure_constant(i, j, l)
                                * self.structure_constant(l, k, out)
                                + self.structure_constant(j, k, l)
                                    * self.structure_constant(l, i, out)
                                + self.structure_constant(k, i, l)
                                    * self.structure_constant(l, j, out);
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    fn check_dim(&self, v: &AlgebraVector) -> Result<()> {
        if v.dim() != self.dim() {
            return Err(Error::InvalidDimension {
                expected: self.dim(),
                found: v.dim(),
            });
        }
        Ok(())
    }

    pub fn matrix_of(&self, v: &AlgebraVector) -> Mat {
        let n = self.ambient_dim;
        let mut out = DMatrix::zeros(n, n);
        for (c, b) in v.coords().iter().zip(&self.basis) {
            if *c != 0.0 {
                out += b * *c;
            }
        }
        out
    }

    /// Least-squares coordinates of `m` and the max-norm residual of the fit.
    pub fn coords_with_residual(&self, m: &Mat) -> (Vector, f64) {
        let flat = flatten(m);
        let coords = &self.projector * &flat;
        let back = self.matrix_of(&AlgebraVector::new(coords.clone()));
        (coords, max_abs(&(back - m)))
    }

    /// Coordinates of a matrix that must lie in the algebra.
    pub fn coords_of(&self, m: &Mat) -> Result<AlgebraVector> {
        if m.nrows() != self.ambient_dim || m.ncols() != self.ambient_dim {
            return Err(Error::InvalidDimension {
                expected: self.ambient_dim,
                found: m.nrows(),
            });
        }
        let (coords, residual) = self.coords_with_residual(m);
        if !(residual <= SPAN_TOL * max_abs(m).max(1.0)) {
            return Err(Error::NotInAlgebra { residual });
        }
        Ok(AlgebraVector::new(coords))
    }

    /// Lie bracket through the structure constants.
    pub fn bracket(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &AlgebraVector, y: &AlgebraVector) -> AlgebraVector {
        let m = self.dim();
        let mut out = Vector::zeros(m);
        for i in 0..m {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..m {
                let w = xi * y[j];
                if w == 0.0 {
                    continue;
                }
                let base = (i * m + j) * m;
                for k in 0..m {
                    out[k] += w * self.structure[base + k];
                }
            }
        }
        AlgebraVector::new(out)
    }

    /// Matrix of `ad_x` acting on coordinates.
    pub fn ad_matrix(&self, x: &AlgebraVector) -> Mat {
        let m = self.dim();
        let mut out = Mat::zeros(m, m);
        for j in 0..m {
            let col = self.bracket_unchecked(x, &AlgebraVector::basis(m, j));
            out.set_column(j, col.coords());
        }
        out
    }

    /// `Ad_g x = g x g^-1`, read back into coordinates.
    pub fn adjoint(&self, g: &Mat, x: &AlgebraVector) -> Result<AlgebraVector> {
        self.check_dim(x)?;
        let g_inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NumericalFailure("group element is singular".into()))?;
        self.adjoint_with_inverse(g, &g_inv, x)
    }

    pub(crate) fn adjoint_with_inverse(
        &self,
        g: &Mat,
        g_inv: &Mat,
        x: &AlgebraVector,
    ) -> Result<AlgebraVector> {
        let xm = self.matrix_of(x);
        self.coords_of(&(g * xm * g_inv))
    }

    /// Matrix of `Ad_g` on coordinates.
    pub fn adjoint_matrix(&self, g: &Mat) -> Result<Mat> {
        let g_inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NumericalFailure("group element is singular".into()))?;
        let m = self.dim();
        let mut out = Mat::zeros(m, m);
        for j in 0..m {
            let col = self.adjoint_with_inverse(g, &g_inv, &AlgebraVector::basis(m, j))?;
            out.set_column(j, col.coords());
        }
        Ok(out)
    }

    pub fn exp(&self, x: &AlgebraVector) -> Result<Mat> {
        self.check_dim(x)?;
        super::expm::group_exp(&self.matrix_of(x))
    }
}

/// Free-function form of [`MatrixAlgebra::bracket`].
pub fn bracket(
    algebra: &MatrixAlgebra,
    x: &AlgebraVector,
    y: &AlgebraVector,
) -> Result<AlgebraVector> {
    algebra.bracket(x, y)
}

/// Free-function form of [`MatrixAlgebra::adjoint`].
pub fn adjoint(g: &Mat, x: &AlgebraVector, algebra: &MatrixAlgebra) -> Result<AlgebraVector> {
    algebra.adjoint(g, x)
}
