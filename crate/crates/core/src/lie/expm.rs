//! Matrix exponential and principal logarithm.

use crate::error::{Error, Result};
use crate::numeric::{all_finite, max_abs, Mat};

fn norm1(m: &Mat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn check_square(m: &Mat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidDimension {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if !all_finite(m) {
        return Err(Error::NumericalFailure("non-finite matrix entry".into()));
    }
    Ok(())
}

/// Matrix exponential by scaling and squaring around a Taylor core.
///
/// The argument is scaled until its 1-norm is at most 1/4, where the series
/// reaches double precision in at most 16 terms.
pub fn group_exp(x: &Mat) -> Result<Mat> {
    check_square(x)?;
    let n = x.nrows();
    let nrm = norm1(x);
    let squarings = if nrm > 0.25 {
        (nrm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let a = x / 2f64.powi(squarings as i32);

    let mut sum = Mat::identity(n, n);
    let mut term = Mat::identity(n, n);
    for k in 1..=30 {
        term = &term * &a / k as f64;
        sum += &term;
        if max_abs(&term) <= 1e-18 * max_abs(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    if !all_finite(&sum) {
        return Err(Error::NumericalFailure(
            "matrix exponential overflowed".into(),
        ));
    }
    Ok(sum)
}

/// Exponential with the dimension asserted up front.
pub fn group_exp_dim(ambient_dim: usize, x: &Mat) -> Result<Mat> {
    if x.nrows() != ambient_dim {
        return Err(Error::InvalidDimension {
            expected: ambient_dim,
            found: x.nrows(),
        });
    }
    group_exp(x)
}

fn has_negative_real_eigenvalue(g: &Mat) -> bool {
    let eig = g.clone().complex_eigenvalues();
    let scale = max_abs(g).max(1e-300);
    eig.iter().any(|l| {
        let modulus = l.norm();
        modulus <= 1e-14 * scale || (l.re < 0.0 && l.im.abs() <= 1e-6 * modulus)
    })
}

fn sqrtm_denman_beavers(a: &Mat) -> Result<Mat> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = Mat::identity(n, n);
    for _ in 0..100 {
        let y_inv = y.clone().try_inverse().ok_or_else(|| {
            Error::NumericalFailure("square-root iteration hit a singular matrix".into())
        })?;
        let z_inv = z.clone().try_inverse().ok_or_else(|| {
            Error::NumericalFailure("square-root iteration hit a singular matrix".into())
        })?;
        let y_next = (&y + z_inv) * 0.5;
        let z_next = (&z + y_inv) * 0.5;
        let delta = max_abs(&(&y_next - &y));
        y = y_next;
        z = z_next;
        if delta <= 1e-15 * max_abs(&y) {
            return Ok(y);
        }
    }
    Err(Error::NumericalFailure(
        "square-root iteration did not converge".into(),
    ))
}

/// Principal matrix logarithm by inverse scaling and squaring.
///
/// Fails with [`Error::PrincipalLogUndefined`] when an eigenvalue sits on the
/// closed negative real axis (including zero). Eigenvalues within a relative
/// angle of 1e-6 of that axis count as on it, since defective blocks there are
/// only resolved to about the square root of machine precision.
pub fn group_log(g: &Mat) -> Result<Mat> {
    check_square(g)?;
    if has_negative_real_eigenvalue(g) {
        return Err(Error::PrincipalLogUndefined);
    }
    let n = g.nrows();
    let id = Mat::identity(n, n);
    let mut a = g.clone();
    let mut roots = 0;
    while norm1(&(&a - &id)) > 0.25 {
        if roots >= 64 {
            return Err(Error::NumericalFailure(
                "too many square roots in logarithm".into(),
            ));
        }
        a = sqrtm_denman_beavers(&a)?;
        roots += 1;
    }
    // log a = 2 atanh(z), z = (a - I)(a + I)^-1
    let denom = (&a + &id)
        .try_inverse()
        .ok_or_else(|| Error::NumericalFailure("singular Cayley denominator".into()))?;
    let z = (&a - &id) * denom;
    let z2 = &z * &z;
    let mut power = z.clone();
    let mut sum = z.clone();
    for k in 1..40 {
        power = &power * &z2;
        let term = &power / (2 * k + 1) as f64;
        sum += &term;
        if max_abs(&term) <= 1e-18 * max_abs(&sum).max(1e-300) {
            break;
        }
    }
    let out = sum * (2.0 * 2f64.powi(roots));
    if !all_finite(&out) {
        return Err(Error::NumericalFailure(
            "logarithm produced non-finite entries".into(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rot_gen() -> Mat {
        Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = group_exp(&Mat::zeros(3, 3)).unwrap();
        assert_eq!(e, Mat::identity(3, 3));
    }

    #[test]
    fn half_turn_is_minus_identity() {
        let e = group_exp(&(rot_gen() * PI)).unwrap();
        assert!(max_abs(&(e + Mat::identity(2, 2))) <= 1e-12);
    }

    #[test]
    fn nilpotent_series_terminates() {
        let nil = Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let e = group_exp(&nil).unwrap();
        assert!(max_abs(&(e - Mat::identity(2, 2) - nil)) < 1e-16);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let mut m = Mat::zeros(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(matches!(group_exp(&m), Err(Error::NumericalFailure(_))));
    }

    #[test]
    fn log_of_identity_is_zero() {
        let l = group_log(&Mat::identity(3, 3)).unwrap();
        assert!(max_abs(&l) < 1e-16);
    }

    #[test]
    fn log_of_quarter_turn() {
        let g = Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let l = group_log(&g).unwrap();
        assert!(max_abs(&(l - rot_gen() * (PI / 2.0))) < 1e-13);
    }

    #[test]
    fn log_of_minus_identity_is_undefined() {
        assert_eq!(
            group_log(&(-Mat::identity(2, 2))),
            Err(Error::PrincipalLogUndefined)
        );
        let jordan = Mat::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -1.0]);
        assert_eq!(group_log(&jordan), Err(Error::PrincipalLogUndefined));
    }

    #[test]
    fn exp_matches_closed_form_boost_at_large_rapidity() {
        // exp(t (E01 + E10)) = [[cosh t, sinh t], [sinh t, cosh t]]
        for t in [0.5, 5.0, 20.0, 50.0] {
            let x = Mat::from_row_slice(2, 2, &[0.0, t, t, 0.0]);
            let e = group_exp(&x).unwrap();
            let rel = ((e[(0, 0)] - t.cosh()) / t.cosh())
                .abs()
                .max(((e[(0, 1)] - t.sinh()) / t.sinh()).abs());
            assert!(rel <= 1e-12, "t={t} rel={rel:e}");
        }
    }

    fn small_matrix(n: usize, scale: f64) -> impl Strategy<Value = Mat> {
        prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| Mat::from_vec(n, n, v) * scale)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exp_agrees_with_pade_reference(m in small_matrix(4, 1.0), s in 0.01f64..12.0) {
            let x = m * s;
            let ours = group_exp(&x).unwrap();
            let reference = x.clone().exp();
            let rel = max_abs(&(&ours - &reference)) / max_abs(&reference);
            prop_assert!(rel <= 1e-12, "rel={:e}", rel);
        }

        #[test]
        fn commuting_exponentials_multiply(m in small_matrix(3, 1.0), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            // X and Y = p(X) commute
            let x = &m * a;
            let y = &m * &m * b + &m * 0.3;
            let lhs = group_exp(&x).unwrap() * group_exp(&y).unwrap();
            let rhs = group_exp(&(&x + &y)).unwrap();
            prop_assert!(max_abs(&(lhs - &rhs)) <= 1e-11 * max_abs(&rhs).max(1.0));
        }

        #[test]
        fn log_inverts_exp_near_identity(m in small_matrix(3, 0.3)) {
            let g = group_exp(&m).unwrap();
            let l = group_log(&g).unwrap();
            prop_assert!(max_abs(&(&l - &m)) <= 1e-9);
            let back = group_exp(&l).unwrap();
            prop_assert!(max_abs(&(back - &g)) <= 1e-9);
        }
    }
}
