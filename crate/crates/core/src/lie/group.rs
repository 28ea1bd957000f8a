//! Defining relations of the matrix groups behind each algebra, and the maps
//! from group elements down to base-manifold coordinates.

use serde::{Deserialize, Serialize};

use crate::numeric::{max_abs, Mat, Vector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GroupKind {
    /// No relations beyond invertibility.
    General,
    /// `g^T eta g = eta`.
    PseudoOrthogonal { eta: Vec<f64> },
    /// `[[R, t], [0, 1]]` with `R^T eta R = eta`.
    Isometry { eta: Vec<f64> },
    /// `[[A, t], [0, 1]]`.
    Affine,
    /// `det g = 1`.
    Special,
    /// Block-diagonal product; entries outside the blocks vanish.
    Blocks { blocks: Vec<GroupBlock> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupBlock {
    pub offset: usize,
    pub size: usize,
    pub group: GroupKind,
}

fn eta_residual(r: &Mat, eta: &[f64]) -> f64 {
    let e = Mat::from_diagonal(&Vector::from_column_slice(eta));
    max_abs(&(r.transpose() * &e * r - &e))
}

fn eta_newton(r: &Mat, eta: &[f64]) -> Mat {
    // one Newton step towards r^T eta r = eta
    let n = r.nrows();
    let e = Mat::from_diagonal(&Vector::from_column_slice(eta));
    let approx_inv_r = &e * r.transpose() * &e;
    r * (Mat::identity(n, n) * 3.0 - approx_inv_r * r) * 0.5
}

fn last_row_residual(g: &Mat) -> f64 {
    let n = g.nrows();
    (0..n)
        .map(|j| (g[(n - 1, j)] - if j == n - 1 { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}

fn fix_last_row(g: &mut Mat) {
    let n = g.nrows();
    for j in 0..n {
        g[(n - 1, j)] = if j == n - 1 { 1.0 } else { 0.0 };
    }
}

impl GroupKind {
    /// Max-norm violation of the defining relations.
    pub fn residual(&self, g: &Mat) -> f64 {
        let n = g.nrows();
        match self {
            GroupKind::General => 0.0,
            GroupKind::PseudoOrthogonal { eta } => eta_residual(g, eta),
            GroupKind::Isometry { eta } => {
                let r = g.view((0, 0), (n - 1, n - 1)).into_owned();
                eta_residual(&r, eta).max(last_row_residual(g))
            }
            GroupKind::Affine => last_row_residual(g),
            GroupKind::Special => (g.determinant() - 1.0).abs(),
            GroupKind::Blocks { blocks } => {
                let mut worst = 0.0_f64;
                let mut inside = vec![false; n * n];
                for b in blocks {
                    let sub = g.view((b.offset, b.offset), (b.size, b.size)).into_owned();
                    worst = worst.max(b.group.residual(&sub));
                    for i in 0..b.size {
                        for j in 0..b.size {
                            inside[(b.offset + i) * n + b.offset + j] = true;
                        }
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        if !inside[i * n + j] {
                            worst = worst.max(g[(i, j)].abs());
                        }
                    }
                }
                worst
            }
        }
    }

    /// One first-order projection step back towards the group.
    pub fn project(&self, g: &Mat) -> Mat {
        let n = g.nrows();
        match self {
            GroupKind::General => g.clone(),
            GroupKind::PseudoOrthogonal { eta } => eta_newton(g, eta),
            GroupKind::Isometry { eta } => {
                let mut out = g.clone();
                let r = g.view((0, 0), (n - 1, n - 1)).into_owned();
                out.view_mut((0, 0), (n - 1, n - 1))
                    .copy_from(&eta_newton(&r, eta));
                fix_last_row(&mut out);
                out
            }
            GroupKind::Affine => {
                let mut out = g.clone();
                fix_last_row(&mut out);
                out
            }
            GroupKind::Special => {
                let det = g.determinant();
                if det > 0.0 {
                    g / det.powf(1.0 / n as f64)
                } else {
                    g.clone()
                }
            }
            GroupKind::Blocks { blocks } => {
                let mut out = Mat::zeros(n, n);
                for b in blocks {
                    let sub = g.view((b.offset, b.offset), (b.size, b.size)).into_owned();
                    out.view_mut((b.offset, b.offset), (b.size, b.size))
                        .copy_from(&b.group.project(&sub));
                }
                out
            }
        }
    }
}

/// How a group element is sent to coordinates on the base `G/H`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BaseProjection {
    /// `g * origin`, for groups acting on a vector whose stabilizer is `H`.
    Orbit { origin: Vec<f64> },
    /// Translation column of an affine matrix `[[A, t], [0, 1]]`.
    Translation,
    /// A sub-block of the matrix, row-major.
    Block {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    /// Every entry, row-major.
    Full,
}

impl BaseProjection {
    pub fn apply(&self, g: &Mat) -> Vector {
        let n = g.nrows();
        match self {
            BaseProjection::Orbit { origin } => g * Vector::from_column_slice(origin),
            BaseProjection::Translation => Vector::from_fn(n - 1, |i, _| g[(i, n - 1)]),
            BaseProjection::Block {
                row,
                col,
                rows,
                cols,
            } => Vector::from_fn(rows * cols, |idx, _| {
                g[(row + idx / cols, col + idx % cols)]
            }),
            BaseProjection::Full => Vector::from_fn(n * n, |idx, _| g[(idx / n, idx % n)]),
        }
    }

    /// A group element over the given base coordinates, where the projection
    /// has an obvious section.
    pub fn lift(&self, coords: &[f64], ambient_dim: usize) -> Option<Mat> {
        let n = ambient_dim;
        match self {
            BaseProjection::Translation if coords.len() == n - 1 => {
                let mut g = Mat::identity(n, n);
                for (i, c) in coords.iter().enumerate() {
                    g[(i, n - 1)] = *c;
                }
                Some(g)
            }
            BaseProjection::Block {
                row,
                col,
                rows,
                cols,
            } if coords.len() == rows * cols => {
                let mut g = Mat::identity(n, n);
                for (idx, c) in coords.iter().enumerate() {
                    g[(row + idx / cols, col + idx % cols)] = *c;
                }
                Some(g)
            }
            BaseProjection::Full if coords.len() == n * n => {
                Some(Mat::from_row_slice(n, n, coords))
            }
            _ => None,
        }
    }
}
