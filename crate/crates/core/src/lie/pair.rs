use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::algebra::{AlgebraVector, MatrixAlgebra, SPAN_TOL, STRUCTURE_TOL};
use super::expm::group_exp;
use super::group::BaseProjection;
use crate::error::{Error, Result};
use crate::numeric::{Mat, Vector};

const H_SAMPLE_SEED: u64 = 0x5EED_CA57;
const H_RANDOM_SAMPLES: usize = 20;

/// A model algebra with a chosen complement: `g = m (+) h`.
#[derive(Clone, Debug)]
pub struct ModelPair {
    g: MatrixAlgebra,
    h_indices: Vec<usize>,
    m_indices: Vec<usize>,
    h_generators: Vec<Mat>,
    base: BaseProjection,
}

impl ModelPair {
    pub fn new(
        g: MatrixAlgebra,
        h_indices: Vec<usize>,
        m_indices: Vec<usize>,
        h_generators: Vec<Mat>,
        base: BaseProjection,
    ) -> Result<Self> {
        let dim = g.dim();
        for &i in h_indices.iter().chain(&m_indices) {
            if i >= dim {
                return Err(Error::InvalidDimension {
                    expected: dim,
                    found: i + 1,
                });
            }
        }
        for gen in &h_generators {
            if gen.nrows() != g.ambient_dim() || gen.ncols() != g.ambient_dim() {
                return Err(Error::InvalidDimension {
                    expected: g.ambient_dim(),
                    found: gen.nrows(),
                });
            }
        }
        Ok(Self {
            g,
            h_indices,
            m_indices,
            h_generators,
            base,
        })
    }

    pub fn algebra(&self) -> &MatrixAlgebra {
        &self.g
    }

    pub fn h_indices(&self) -> &[usize] {
        &self.h_indices
    }

    pub fn m_indices(&self) -> &[usize] {
        &self.m_indices
    }

    pub fn h_generators(&self) -> &[Mat] {
        &self.h_generators
    }

    pub fn base(&self) -> &BaseProjection {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn dim_m(&self) -> usize {
        self.m_indices.len()
    }

    pub fn dim_h(&self) -> usize {
        self.h_indices.len()
    }

    pub fn m_part(&self, v: &AlgebraVector) -> Vector {
        Vector::from_iterator(self.m_indices.len(), self.m_indices.iter().map(|&i| v[i]))
    }

    pub fn h_part(&self, v: &AlgebraVector) -> Vector {
        Vector::from_iterator(self.h_indices.len(), self.h_indices.iter().map(|&i| v[i]))
    }

    pub fn from_m(&self, m: &Vector) -> AlgebraVector {
        let mut out = Vector::zeros(self.dim());
        for (k, &i) in self.m_indices.iter().enumerate() {
            out[i] = m[k];
        }
        AlgebraVector::new(out)
    }

    pub fn from_h(&self, h: &Vector) -> AlgebraVector {
        let mut out = Vector::zeros(self.dim());
        for (k, &i) in self.h_indices.iter().enumerate() {
            out[i] = h[k];
        }
        AlgebraVector::new(out)
    }

    pub fn assemble(&self, m: &Vector, h: &Vector) -> AlgebraVector {
        self.from_m(m) + self.from_h(h)
    }

    /// The component of `v` along the m-subbasis, as a full algebra vector.
    pub fn project_m(&self, v: &AlgebraVector) -> AlgebraVector {
        self.from_m(&self.m_part(v))
    }

    pub fn project_h(&self, v: &AlgebraVector) -> AlgebraVector {
        self.from_h(&self.h_part(v))
    }

    /// `exp` of an h-coordinate vector, as a matrix of the model group.
    pub fn h_element(&self, h: &Vector) -> Result<Mat> {
        group_exp(&self.g.matrix_of(&self.from_h(h)))
    }

    /// h-coordinates of the deterministic structure-group sample: each basis
    /// direction at parameters +-0.1 and +-1, then twenty seeded random
    /// combinations.
    pub fn h_sample_coords(&self) -> Vec<Vector> {
        let dh = self.dim_h();
        let mut out = Vec::new();
        for k in 0..dh {
            for s in [0.1, -0.1, 1.0, -1.0] {
                let mut y = Vector::zeros(dh);
                y[k] = s;
                out.push(y);
            }
        }
        if dh > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(H_SAMPLE_SEED);
            for _ in 0..H_RANDOM_SAMPLES {
                out.push(Vector::from_fn(dh, |_, _| StandardNormal.sample(&mut rng)));
            }
        }
        out
    }

    /// The sample above as matrices, followed by the user-supplied generators.
    pub fn h_samples(&self) -> Result<Vec<Mat>> {
        let mut out = Vec::new();
        for y in self.h_sample_coords() {
            out.push(self.h_element(&y)?);
        }
        out.extend(self.h_generators.iter().cloned());
        Ok(out)
    }
}

impl AlgebraVector {
    pub fn m_part(&self, pair: &ModelPair) -> Vector {
        pair.m_part(self)
    }

    pub fn h_part(&self, pair: &ModelPair) -> Vector {
        pair.h_part(self)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn outside(v: &AlgebraVector, allowed: &[usize]) -> f64 {
    (0..v.dim())
        .filter(|i| !allowed.contains(i))
        .map(|i| v[i].abs())
        .fold(0.0, f64::max)
}

/// Checks the reductive decomposition: index sets partition the basis, `h` is
/// a subalgebra, and `m` is invariant under the sampled structure group.
pub fn validate_reductive(pair: &ModelPair) -> ValidationReport {
    let dim = pair.dim();
    let mut seen = vec![0usize; dim];
    for &i in pair.h_indices.iter().chain(&pair.m_indices) {
        seen[i] += 1;
    }
    let partition_defect = seen.iter().filter(|&&c| c != 1).count() as f64;
    let mut checks = vec![Check {
        name: "direct-sum".into(),
        passed: partition_defect == 0.0,
        residual: partition_defect,
        tolerance: 0.0,
    }];

    let g = pair.algebra();
    let mut sub = 0.0_f64;
    for &i in &pair.h_indices {
        for &j in &pair.h_indices {
            let b =
                g.bracket_unchecked(&AlgebraVector::basis(dim, i), &AlgebraVector::basis(dim, j));
            sub = sub.max(outside(&b, &pair.h_indices));
        }
    }
    checks.push(Check {
        name: "subalgebra".into(),
        passed: sub <= STRUCTURE_TOL,
        residual: sub,
        tolerance: STRUCTURE_TOL,
    });

    let mut inv = 0.0_f64;
    match pair.h_samples() {
        Ok(samples) => {
            'outer: for h in &samples {
                for &i in &pair.m_indices {
                    match g.adjoint(h, &AlgebraVector::basis(dim, i)) {
                        Ok(v) => inv = inv.max(outside(&v, &pair.m_indices)),
                        Err(_) => {
                            inv = f64::INFINITY;
                            break 'outer;
                        }
                    }
                }
            }
        }
        Err(_) => inv = f64::INFINITY,
    }
    checks.push(Check {
        name: "ad-invariance".into(),
        passed: inv <= SPAN_TOL,
        residual: inv,
        tolerance: SPAN_TOL,
    });
    ValidationReport { checks }
}
