//! Standard matrix algebras and the model pairs built on them.
//!
//! Rotation generators follow `J_ab = eta_bb E_ba - eta_aa E_ab` (a < b), so in
//! the Euclidean case `J_12 e_1 = e_2`.

use super::algebra::MatrixAlgebra;
use super::group::{BaseProjection, GroupBlock, GroupKind};
use super::pair::ModelPair;
use crate::error::Result;
use crate::numeric::Mat;

fn unit(n: usize, r: usize, c: usize) -> Mat {
    let mut m = Mat::zeros(n, n);
    m[(r, c)] = 1.0;
    m
}

/// Generators of `o(eta)` placed in an `n x n` matrix starting at `offset`.
fn rotation_generators(n: usize, offset: usize, eta: &[f64]) -> Vec<Mat> {
    let k = eta.len();
    let mut out = Vec::new();
    for a in 0..k {
        for b in (a + 1)..k {
            out.push(
                unit(n, offset + b, offset + a) * eta[b] - unit(n, offset + a, offset + b) * eta[a],
            );
        }
    }
    out
}

/// `so(3)` with `(L_i)_jk = -eps_ijk`, so `[L_1, L_2] = L_3`.
pub fn so3() -> Result<MatrixAlgebra> {
    let lx = Mat::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]);
    let ly = Mat::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0]);
    let lz = Mat::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    MatrixAlgebra::new(
        "so(3)",
        vec![lx, ly, lz],
        GroupKind::PseudoOrthogonal { eta: vec![1.0; 3] },
    )
}

/// `sl(2,R)` with basis `E, F, H`.
pub fn sl2() -> Result<MatrixAlgebra> {
    MatrixAlgebra::new("sl(2)", sl2_basis(2, 0), GroupKind::Special)
}

fn sl2_basis(n: usize, offset: usize) -> Vec<Mat> {
    vec![
        unit(n, offset, offset + 1),
        unit(n, offset + 1, offset),
        unit(n, offset, offset) - unit(n, offset + 1, offset + 1),
    ]
}

/// Isometry algebra of flat space with signature `eta`, as affine
/// `(d+1) x (d+1)` matrices. Translations come first, then rotations.
pub fn isometry_algebra(eta: &[f64]) -> Result<MatrixAlgebra> {
    let d = eta.len();
    let n = d + 1;
    let mut basis: Vec<Mat> = (0..d).map(|i| unit(n, i, d)).collect();
    basis.extend(rotation_generators(n, 0, eta));
    let p = eta.iter().filter(|e| **e > 0.0).count();
    let name = if p == d {
        format!("i({d})")
    } else {
        format!("i({p},{})", d - p)
    };
    MatrixAlgebra::new(name, basis, GroupKind::Isometry { eta: eta.to_vec() })
}

/// `o(1,n)`: boosts `E_0i + E_i0` first, then rotations of the spatial block.
pub fn lorentz_algebra(n: usize) -> Result<MatrixAlgebra> {
    let dim = n + 1;
    let mut basis: Vec<Mat> = (1..=n).map(|i| unit(dim, 0, i) + unit(dim, i, 0)).collect();
    basis.extend(rotation_generators(dim, 1, &vec![1.0; n]));
    let mut eta = vec![1.0; dim];
    eta[0] = -1.0;
    MatrixAlgebra::new(
        format!("o(1,{n})"),
        basis,
        GroupKind::PseudoOrthogonal { eta },
    )
}

/// `R^n x| gl(n)`: translations first, then the matrix units `E_ij`.
pub fn affine_algebra(n: usize) -> Result<MatrixAlgebra> {
    let dim = n + 1;
    let mut basis: Vec<Mat> = (0..n).map(|i| unit(dim, i, n)).collect();
    for i in 0..n {
        for j in 0..n {
            basis.push(unit(dim, i, j));
        }
    }
    MatrixAlgebra::new(format!("aff({n})"), basis, GroupKind::Affine)
}

/// `sl(2,R) (+) so(2)` as block-diagonal 4x4 matrices: `E, F, H, J`.
pub fn sl2_so2_algebra() -> Result<MatrixAlgebra> {
    let mut basis = sl2_basis(4, 0);
    basis.extend(rotation_generators(4, 2, &[1.0, 1.0]));
    MatrixAlgebra::new(
        "sl(2)+so(2)",
        basis,
        GroupKind::Blocks {
            blocks: vec![
                GroupBlock {
                    offset: 0,
                    size: 2,
                    group: GroupKind::Special,
                },
                GroupBlock {
                    offset: 2,
                    size: 2,
                    group: GroupKind::PseudoOrthogonal {
                        eta: vec![1.0, 1.0],
                    },
                },
            ],
        },
    )
}

fn reflection(n: usize, at: usize) -> Mat {
    let mut m = Mat::identity(n, n);
    m[(at, at)] = -1.0;
    m
}

/// `(i(p,q), o(p,q), R^(p+q))`.
pub fn isometry_pair(eta: &[f64]) -> Result<ModelPair> {
    let d = eta.len();
    let g = isometry_algebra(eta)?;
    let total = g.dim();
    ModelPair::new(
        g,
        (d..total).collect(),
        (0..d).collect(),
        vec![reflection(d + 1, 0)],
        BaseProjection::Translation,
    )
}

pub fn euclidean_pair(n: usize) -> Result<ModelPair> {
    isometry_pair(&vec![1.0; n])
}

/// `(o(1,n), o(n), boosts)`, based at the hyperboloid point `e_0`.
pub fn lorentz_pair(n: usize) -> Result<ModelPair> {
    let g = lorentz_algebra(n)?;
    let total = g.dim();
    let mut origin = vec![0.0; n + 1];
    origin[0] = 1.0;
    ModelPair::new(
        g,
        (n..total).collect(),
        (0..n).collect(),
        vec![reflection(n + 1, 1)],
        BaseProjection::Orbit { origin },
    )
}

pub fn affine_pair(n: usize) -> Result<ModelPair> {
    let g = affine_algebra(n)?;
    let total = g.dim();
    ModelPair::new(
        g,
        (n..total).collect(),
        (0..n).collect(),
        vec![reflection(n + 1, 0)],
        BaseProjection::Translation,
    )
}

/// `(sl(2) (+) so(2), so(2), sl(2))` over `SL(2,R)`.
pub fn sl2_so2_pair() -> Result<ModelPair> {
    ModelPair::new(
        sl2_so2_algebra()?,
        vec![3],
        vec![0, 1, 2],
        Vec::new(),
        BaseProjection::Block {
            row: 0,
            col: 0,
            rows: 2,
            cols: 2,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::algebra::AlgebraVector;
    use crate::lie::pair::validate_reductive;
    use crate::numeric::{commutator, max_abs};
    use proptest::prelude::*;

    #[test]
    fn so3_bracket_matches_commutator() {
        let a = so3().unwrap();
        let e1 = AlgebraVector::basis(3, 0);
        let e2 = AlgebraVector::basis(3, 1);
        let b = a.bracket(&e1, &e2).unwrap();
        // oracle: raw matrix commutator read against L_z
        let direct = commutator(&a.basis()[0], &a.basis()[1]);
        assert!(max_abs(&(&direct - &a.basis()[2])) < 1e-15);
        assert!((b.coords() - AlgebraVector::basis(3, 2).coords()).amax() < 1e-12);
    }

    #[test]
    fn self_bracket_vanishes() {
        let a = lorentz_algebra(3).unwrap();
        let x = AlgebraVector::from_slice(&[0.3, -1.0, 2.0, 0.5, 0.1, -0.7]);
        assert!(a.bracket(&x, &x).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn rotation_moves_translation_in_i2() {
        let a = isometry_algebra(&[1.0, 1.0]).unwrap();
        let j = AlgebraVector::basis(3, 2);
        let e1 = AlgebraVector::basis(3, 0);
        let b = a.bracket(&j, &e1).unwrap();
        let direct = commutator(&a.matrix_of(&j), &a.matrix_of(&e1));
        assert!(max_abs(&(direct - &a.basis()[1])) < 1e-15);
        assert!((b.coords() - AlgebraVector::basis(3, 1).coords()).amax() < 1e-12);
    }

    #[test]
    fn bracket_rejects_wrong_dimension() {
        let a = so3().unwrap();
        let err = a
            .bracket(&AlgebraVector::zeros(3), &AlgebraVector::zeros(4))
            .unwrap_err();
        assert_eq!(
            err,
            crate::Error::InvalidDimension {
                expected: 3,
                found: 4
            }
        );
    }

    #[test]
    fn adjoint_by_identity_is_trivial() {
        let a = affine_algebra(2).unwrap();
        let x = AlgebraVector::from_slice(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let y = a.adjoint(&Mat::identity(3, 3), &x).unwrap();
        assert!((y.coords() - x.coords()).amax() < 1e-15);
    }

    #[test]
    fn quarter_turn_sends_e1_to_e2() {
        let a = isometry_algebra(&[1.0, 1.0]).unwrap();
        let rot = a
            .exp(&AlgebraVector::from_slice(&[
                0.0,
                0.0,
                std::f64::consts::FRAC_PI_2,
            ]))
            .unwrap();
        let y = a.adjoint(&rot, &AlgebraVector::basis(3, 0)).unwrap();
        // oracle: conjugate the raw matrices
        let direct = &rot * &a.basis()[0] * rot.clone().try_inverse().unwrap();
        assert!(max_abs(&(direct - &a.basis()[1])) < 1e-15);
        assert!((y.coords() - AlgebraVector::basis(3, 1).coords()).amax() < 1e-12);
    }

    #[test]
    fn adjoint_outside_span_is_reported() {
        let a = so3().unwrap();
        let shear = Mat::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            a.adjoint(&shear, &AlgebraVector::basis(3, 2)),
            Err(crate::Error::NotInAlgebra { .. })
        ));
    }

    #[test]
    fn all_builtin_pairs_are_reductive() {
        for pair in [
            euclidean_pair(2).unwrap(),
            euclidean_pair(3).unwrap(),
            isometry_pair(&[1.0, -1.0]).unwrap(),
            lorentz_pair(2).unwrap(),
            lorentz_pair(3).unwrap(),
            affine_pair(2).unwrap(),
            sl2_so2_pair().unwrap(),
        ] {
            let report = validate_reductive(&pair);
            assert!(report.passed(), "{}: {:?}", pair.algebra().name(), report);
        }
    }

    #[test]
    fn moving_a_translation_into_h_breaks_the_split() {
        let pair = euclidean_pair(2).unwrap();
        let broken = ModelPair::new(
            pair.algebra().clone(),
            vec![0, 2],
            vec![1],
            vec![],
            BaseProjection::Translation,
        )
        .unwrap();
        let report = validate_reductive(&broken);
        assert!(!report.passed());
        assert!(!report.check("subalgebra").unwrap().passed);
    }

    #[test]
    fn hyperbolic_pair_has_symmetric_bracket() {
        // [m, m] lies in h for o(1,n)
        let pair = lorentz_pair(3).unwrap();
        let g = pair.algebra();
        for &i in pair.m_indices() {
            for &j in pair.m_indices() {
                let b = g
                    .bracket(
                        &AlgebraVector::basis(g.dim(), i),
                        &AlgebraVector::basis(g.dim(), j),
                    )
                    .unwrap();
                assert!(pair.m_part(&b).amax() < 1e-14);
            }
        }
    }

    fn coords(n: usize) -> impl Strategy<Value = AlgebraVector> {
        prop::collection::vec(-2.0f64..2.0, n).prop_map(|v| AlgebraVector::from_slice(&v))
    }

    #[test]
    fn jacobi_holds_on_all_builtins() {
        for alg in [
            so3().unwrap(),
            sl2().unwrap(),
            lorentz_algebra(3).unwrap(),
            isometry_algebra(&[1.0, 1.0, -1.0]).unwrap(),
            affine_algebra(3).unwrap(),
            sl2_so2_algebra().unwrap(),
        ] {
            assert!(alg.jacobi_residual() <= 1e-10, "{}", alg.name());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn structure_constants_match_commutators(x in coords(10), y in coords(10)) {
            let a = lorentz_algebra(4).unwrap();
            let via_constants = a.matrix_of(&a.bracket(&x, &y).unwrap());
            let direct = commutator(&a.matrix_of(&x), &a.matrix_of(&y));
            prop_assert!(max_abs(&(via_constants - direct)) <= 1e-9);
        }

        #[test]
        fn adjoint_is_a_homomorphism(x in coords(6), a1 in coords(6), a2 in coords(6)) {
            let alg = affine_algebra(2).unwrap();
            let g1 = alg.exp(&a1.scale(0.4)).unwrap();
            let g2 = alg.exp(&a2.scale(0.4)).unwrap();
            let lhs = alg.adjoint(&(&g1 * &g2), &x).unwrap();
            let rhs = alg.adjoint(&g1, &alg.adjoint(&g2, &x).unwrap()).unwrap();
            prop_assert!((lhs.coords() - rhs.coords()).amax() <= 1e-9);
        }
    }
}
