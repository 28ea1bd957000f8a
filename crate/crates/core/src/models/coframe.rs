//! Small dense matrices over any [`Real`] scalar, and the signature-aware
//! square root that turns a metric into an orthonormal coframe.
//!
//! Everything here is built from iterations that only need field operations
//! and `sqrt`, so running it over dual numbers yields exact derivatives of
//! the coframe.

use super::expr::Real;
use crate::numeric::Mat;

#[derive(Clone, Debug)]
pub struct SMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> SMat<T> {
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| T::cst(0.0))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| T::cst(if i == j { 1.0 } else { 0.0 }))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows);
        Self::from_fn(self.rows, o.cols, |i, j| {
            let mut acc = T::cst(0.0);
            for k in 0..self.cols {
                acc = acc + self.get(i, k) * o.get(k, j);
            }
            acc
        })
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) + o.get(i, j))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - o.get(i, j))
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) * s)
    }

    pub fn map<U: Real>(&self, f: impl Fn(T) -> U) -> SMat<U> {
        SMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| f(*x)).collect(),
        }
    }

    pub fn values(&self) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| self.get(i, j).value())
    }

    fn max_abs_value(&self) -> f64 {
        self.data.iter().fold(0.0, |a, x| a.max(x.value().abs()))
    }

    /// Gauss-Jordan with partial pivoting on the real parts.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.rows;
        assert_eq!(n, self.cols);
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs_value();
        for col in 0..n {
            let pivot = (col..n).max_by(|&r1, &r2| {
                a.get(r1, col)
                    .value()
                    .abs()
                    .total_cmp(&a.get(r2, col).value().abs())
            })?;
            if !(a.get(pivot, col).value().abs() > 1e-14 * scale) {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    let (x, y) = (a.get(col, j), a.get(pivot, j));
                    a.set(col, j, y);
                    a.set(pivot, j, x);
                    let (x, y) = (inv.get(col, j), inv.get(pivot, j));
                    inv.set(col, j, y);
                    inv.set(pivot, j, x);
                }
            }
            let p = a.get(col, col);
            for j in 0..n {
                a.set(col, j, a.get(col, j) / p);
                inv.set(col, j, inv.get(col, j) / p);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col);
                for j in 0..n {
                    a.set(r, j, a.get(r, j) - f * a.get(col, j));
                    inv.set(r, j, inv.get(r, j) - f * inv.get(col, j));
                }
            }
        }
        Some(inv)
    }
}

impl SMat<f64> {
    pub fn from_mat(m: &Mat) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

const MAX_ITER: usize = 200;
/// Extra sweeps after the real parts settle so derivative parts settle too.
const POLISH_ITER: usize = 3;

fn settled<T: Real>(prev: &SMat<T>, next: &SMat<T>) -> bool {
    let scale = next.max_abs_value().max(1e-300);
    next.sub(prev).max_abs_value() <= 4.0 * f64::EPSILON * scale
}

/// Principal square root of a matrix with positive spectrum (Denman-Beavers).
pub fn sqrt_positive<T: Real>(a: &SMat<T>) -> Option<SMat<T>> {
    let n = a.rows();
    let half = T::cst(0.5);
    let mut y = a.clone();
    let mut z = SMat::identity(n);
    let mut polish = 0;
    for _ in 0..MAX_ITER {
        let y_next = y.add(&z.inverse()?).scale(half);
        let z_next = z.add(&y.inverse()?).scale(half);
        let done = settled(&y, &y_next);
        y = y_next;
        z = z_next;
        if done {
            polish += 1;
            if polish > POLISH_ITER {
                return Some(y);
            }
        }
    }
    None
}

/// Orthogonal factor of the polar decomposition (Newton iteration).
pub fn polar_factor<T: Real>(m: &SMat<T>) -> Option<SMat<T>> {
    let half = T::cst(0.5);
    let mut x = m.clone();
    let mut polish = 0;
    for _ in 0..MAX_ITER {
        let next = x.add(&x.inverse()?.transpose()).scale(half);
        let done = settled(&x, &next);
        x = next;
        if done {
            polish += 1;
            if polish > POLISH_ITER {
                return Some(x);
            }
        }
    }
    None
}

/// A coframe `theta` with `theta^T diag(eta) theta = g`.
///
/// For definite signatures this is the symmetric square root of `+-g`. For
/// indefinite ones, `g = |g|^(1/2) S |g|^(1/2)` with the symmetric involution
/// `S = g |g|^-1`, and `theta = R |g|^(1/2)` where `R` is the orthogonal polar
/// factor of `D+ P+ + D- P-`; `P+-` project onto the eigenspaces of `S` and
/// `D+-` onto the coordinate axes with `eta = +-1`. `R` carries each
/// eigenspace of `S` onto the matching axes, so `R^T diag(eta) R = S`. The
/// construction is smooth in `g`, with no eigenvalue ordering involved.
pub fn coframe<T: Real>(g: &SMat<T>, eta: &[f64]) -> Option<SMat<T>> {
    let n = g.rows();
    if eta.iter().all(|e| *e > 0.0) {
        return sqrt_positive(g);
    }
    if eta.iter().all(|e| *e < 0.0) {
        return sqrt_positive(&g.scale(T::cst(-1.0)));
    }
    let abs = sqrt_positive(&g.mul(g))?;
    let sign = g.mul(&abs.inverse()?);
    let root = sqrt_positive(&abs)?;
    let id = SMat::identity(n);
    let half = T::cst(0.5);
    let p_plus = id.add(&sign).scale(half);
    let p_minus = id.sub(&sign).scale(half);
    let d_plus = SMat::from_fn(n, n, |i, j| {
        T::cst(if i == j && eta[i] > 0.0 { 1.0 } else { 0.0 })
    });
    let d_minus = SMat::from_fn(n, n, |i, j| {
        T::cst(if i == j && eta[i] < 0.0 { 1.0 } else { 0.0 })
    });
    let align = d_plus.mul(&p_plus).add(&d_minus.mul(&p_minus));
    let r = polar_factor(&align)?;
    Some(r.mul(&root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::expr::Dual;
    use proptest::prelude::*;

    fn eta_matrix(eta: &[f64]) -> Mat {
        Mat::from_diagonal(&crate::numeric::Vector::from_column_slice(eta))
    }

    fn check(g: &Mat, eta: &[f64]) -> f64 {
        let theta = coframe(&SMat::from_mat(g), eta).unwrap().values();
        crate::numeric::max_abs(&(theta.transpose() * eta_matrix(eta) * &theta - g))
    }

    #[test]
    fn identity_metric_gives_identity_coframe() {
        let theta = coframe(&SMat::<f64>::identity(3), &[1.0; 3])
            .unwrap()
            .values();
        assert!(crate::numeric::max_abs(&(theta - Mat::identity(3, 3))) < 1e-15);
    }

    #[test]
    fn null_coordinate_metric() {
        let g = Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let theta = coframe(&SMat::from_mat(&g), &[1.0, -1.0]).unwrap().values();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = Mat::from_row_slice(2, 2, &[s, s, -s, s]);
        assert!(crate::numeric::max_abs(&(theta - expected)) < 1e-14);
    }

    #[test]
    fn inverse_of_singular_is_none() {
        let m = SMat::from_mat(&Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]));
        assert!(m.inverse().is_none());
    }

    #[test]
    fn coframe_derivative_matches_finite_difference() {
        let g_of = |s: f64| Mat::from_row_slice(2, 2, &[1.0 + s * s, 0.3 * s, 0.3 * s, -2.0 + s]);
        let s0 = 0.4;
        let gd = SMat::from_fn(2, 2, |i, j| {
            let h = 1e-7;
            let d = (g_of(s0 + h)[(i, j)] - g_of(s0 - h)[(i, j)]) / (2.0 * h);
            Dual::new(g_of(s0)[(i, j)], d)
        });
        let theta = coframe(&gd, &[1.0, -1.0]).unwrap();
        let h = 1e-4;
        let tp = coframe(&SMat::from_mat(&g_of(s0 + h)), &[1.0, -1.0])
            .unwrap()
            .values();
        let tm = coframe(&SMat::from_mat(&g_of(s0 - h)), &[1.0, -1.0])
            .unwrap()
            .values();
        let fd = (tp - tm) / (2.0 * h);
        let an = theta.map(|x| x.du).values();
        assert!(crate::numeric::max_abs(&(fd - an)) < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn riemannian_coframes_factor_the_metric(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -1.0f64..1.0) {
            let l = Mat::from_row_slice(2, 2, &[1.0 + a * a, 0.0, c, 0.5 + b * b]);
            let g = &l * l.transpose();
            prop_assert!(check(&g, &[1.0, 1.0]) <= 1e-10 * (1.0 + crate::numeric::max_abs(&g)));
        }

        #[test]
        fn lorentzian_coframes_factor_the_metric(a in 0.2f64..3.0, b in 0.2f64..3.0, rot in -1.5f64..1.5) {
            let q = Mat::from_row_slice(2, 2, &[rot.cos(), -rot.sin(), rot.sin(), rot.cos()]);
            let g = &q * Mat::from_diagonal(&crate::numeric::Vector::from_column_slice(&[a, -b])) * q.transpose();
            // the rotation keeps the positive eigenspace away from the second axis
            prop_assert!(check(&g, &[1.0, -1.0]) <= 1e-10 * (1.0 + a + b));
        }
    }
}
