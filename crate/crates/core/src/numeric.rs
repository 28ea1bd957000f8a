//! Small dense-matrix helpers shared across modules.

use nalgebra::{DMatrix, DVector};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_vec(v: &Vector) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

pub fn all_finite(m: &Mat) -> bool {
    m.iter().all(|x| x.is_finite())
}

/// Fourth-order central difference of a vector-valued function of one real
/// variable at 0.
pub fn central_diff4<F>(f: F, h: f64) -> Vector
where
    F: Fn(f64) -> Vector,
{
    let fp1 = f(h);
    let fm1 = f(-h);
    let fp2 = f(2.0 * h);
    let fm2 = f(-2.0 * h);
    (fm2 - fp2 + (fp1 - fm1) * 8.0) / (12.0 * h)
}

/// Same stencil with a fallible function.
pub fn try_central_diff4<F, E>(f: F, h: f64) -> Result<Vector, E>
where
    F: Fn(f64) -> Result<Vector, E>,
{
    let fp1 = f(h)?;
    let fm1 = f(-h)?;
    let fp2 = f(2.0 * h)?;
    let fm2 = f(-2.0 * h)?;
    Ok((fm2 - fp2 + (fp1 - fm1) * 8.0) / (12.0 * h))
}

pub fn try_central_diff4_mat<F, E>(f: F, h: f64) -> Result<Mat, E>
where
    F: Fn(f64) -> Result<Mat, E>,
{
    let fp1 = f(h)?;
    let fm1 = f(-h)?;
    let fp2 = f(2.0 * h)?;
    let fm2 = f(-2.0 * h)?;
    Ok((fm2 - fp2 + (fp1 - fm1) * 8.0) / (12.0 * h))
}

/// Two-norm condition number via singular values; infinite for singular input.
pub fn condition_number(m: &Mat) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Seventeen significant digits, enough for an exact `f64` round trip.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
