//! The `p = 2` stiffness matrix on interior nodes and its sparse Cholesky factor.
//!
//! With `E(v) = Σ_T |T| |∇v|²` the matrix satisfies `E(v) = vᵀ K v`. In two
//! dimensions `|T|/h² = 1/2` for every triangle, so `K` does not depend on `h`.

use std::fmt;
use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::geometry::{GridDomain, NO_DOF};

pub struct Stiffness {
    n: usize,
    matrix: SparseColMat<usize, f64>,
    llt: Llt<usize, f64>,
}

impl fmt::Debug for Stiffness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Stiffness").field("n", &self.n).finish()
    }
}

impl Stiffness {
    pub fn assemble(d: &GridDomain) -> Result<Self> {
        let n = d.n_interior();
        let mut triplets = Vec::with_capacity(8 * d.triangles.len());
        for t in &d.triangles {
            let r = d.dof[t[0] as usize];
            for &other in &t[1..] {
                let o = d.dof[other as usize];
                // each edge difference enters the energy with weight 1/2
                if r != NO_DOF {
                    triplets.push(Triplet::new(r as usize, r as usize, 0.5));
                }
                if o != NO_DOF {
                    triplets.push(Triplet::new(o as usize, o as usize, 0.5));
                }
                if r != NO_DOF && o != NO_DOF {
                    triplets.push(Triplet::new(r as usize, o as usize, -0.5));
                    triplets.push(Triplet::new(o as usize, r as usize, -0.5));
                }
            }
        }
        let matrix = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::SolverDefect(format!("stiffness assembly failed: {e:?}")))?;
        let llt = matrix
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::SolverDefect(format!("stiffness factorization failed: {e:?}")))?;
        Ok(Self { n, matrix, llt })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `K x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let mut b = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        self.llt.solve_in_place(b.as_mut());
        (0..self.n).map(|i| b[(i, 0)]).collect()
    }

    /// `K x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        let cols = self.matrix.col_ptr();
        let rows = self.matrix.row_idx();
        let vals = self.matrix.val();
        for j in 0..self.n {
            for k in cols[j]..cols[j + 1] {
                y[rows[k]] += vals[k] * x[j];
            }
        }
        y
    }
}

/// The cached stiffness factor of `d`, assembled on first use.
pub fn stiffness(d: &GridDomain) -> Result<Arc<Stiffness>> {
    if let Some(k) = d.stiffness.get() {
        return Ok(k.clone());
    }
    let k = Arc::new(Stiffness::assemble(d)?);
    Ok(d.stiffness.get_or_init(|| k).clone())
}
