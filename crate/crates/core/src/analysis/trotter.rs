use crate::error::Result;
use crate::lie::{group_exp, AlgebraVector, MatrixAlgebra};

/// Frobenius errors `|(exp(tX/n) exp(tY/n))^n - exp(t(X + Y))|` for each `n`.
pub fn trotter_probe(
    algebra: &MatrixAlgebra,
    x: &AlgebraVector,
    y: &AlgebraVector,
    t: f64,
    n_list: &[usize],
) -> Result<Vec<f64>> {
    let xm = algebra.matrix_of(x) * t;
    let ym = algebra.matrix_of(y) * t;
    let exact = group_exp(&(&xm + &ym))?;
    n_list
        .iter()
        .map(|&n| {
            let n = n.max(1);
            let step = group_exp(&(&xm / n as f64))? * group_exp(&(&ym / n as f64))?;
            let mut prod = step.clone();
            for _ in 1..n {
                prod *= &step;
            }
            Ok((prod - &exact).norm())
        })
        .collect()
}

/// `errors[k] / errors[k + 1]`.
pub fn error_ratios(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| w[0] / w[1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::builtins::{euclidean_pair, sl2};

    #[test]
    fn commuting_translations_are_exact() {
        let pair = euclidean_pair(2).unwrap();
        let x = AlgebraVector::from_slice(&[1.0, 0.0, 0.0]);
        let y = AlgebraVector::from_slice(&[0.0, -2.0, 0.0]);
        for e in trotter_probe(pair.algebra(), &x, &y, 1.0, &[1, 4, 64]).unwrap() {
            assert!(e <= 1e-12);
        }
    }

    #[test]
    fn sl2_has_first_order_convergence() {
        let g = sl2().unwrap();
        let e = AlgebraVector::basis(3, 0);
        let f = AlgebraVector::basis(3, 1);
        let errs = trotter_probe(&g, &e, &f, 1.0, &[64, 128, 256, 512]).unwrap();
        for r in error_ratios(&errs) {
            assert!((1.8..=2.2).contains(&r), "{r}");
        }
        // leading BCH term for n = 1
        let one = trotter_probe(&g, &e, &f, 1.0, &[1]).unwrap()[0];
        let lead = (g.matrix_of(&g.bracket(&e, &f).unwrap()) * 0.5).norm();
        assert!(one > lead / 2.0 && one < lead * 2.0, "{one} vs {lead}");
    }
}
