use faer::linalg::solvers::{DenseSolveCore, Llt, Solve};
use faer::{ColMut, Mat, MatRef, Side};

use super::SparseMatrix;
use crate::error::{Error, Result};

pub type DenseMatrix = Mat<f64>;

/// `max |A - A^T| / max |A|` for a dense square matrix.
pub fn asymmetry(a: MatRef<'_, f64>) -> f64 {
    let n = a.nrows();
    let mut scale = 0.0f64;
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            scale = scale.max(a[(i, j)].abs());
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

/// Cholesky factorization `A = L L^T`.
pub struct SpdFactor {
    llt: Llt<f64>,
}

impl SpdFactor {
    pub fn new(a: MatRef<'_, f64>, context: &str) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension(format!(
                "{context}: cannot factor a {}x{} matrix",
                a.nrows(),
                a.ncols()
            )));
        }
        let llt = a.llt(Side::Lower).map_err(|_| Error::NotPositiveDefinite {
            context: context.to_owned(),
        })?;
        Ok(SpdFactor { llt })
    }

    pub fn from_sparse(a: &SparseMatrix, context: &str) -> Result<Self> {
        Self::new(a.to_dense().as_ref(), context)
    }

    pub fn dim(&self) -> usize {
        self.llt.L().nrows()
    }

    pub fn lower(&self) -> MatRef<'_, f64> {
        self.llt.L()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        self.llt.solve_in_place(ColMut::from_slice_mut(x));
    }

    pub fn solve_mat(&self, b: MatRef<'_, f64>) -> Mat<f64> {
        self.llt.solve(b)
    }

    pub fn inverse(&self) -> Mat<f64> {
        self.llt.inverse()
    }
}

/// Ascending eigenvalues of a symmetric matrix (lower triangle is read).
pub fn symmetric_eigenvalues(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::EigenFailure)
}

/// Ascending eigenvalues of `A x = lambda N x` for symmetric `A` and SPD `N`,
/// computed as the spectrum of `L^-1 A L^-T` with `N = L L^T`.
pub fn generalized_eigs(a: MatRef<'_, f64>, n: MatRef<'_, f64>) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() || (a.nrows(), a.ncols()) != (n.nrows(), n.ncols()) {
        return Err(Error::Dimension(format!(
            "pencil sizes {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            n.nrows(),
            n.ncols()
        )));
    }
    let asym = asymmetry(a);
    if asym > 1e-10 {
        return Err(Error::NotSymmetric(asym));
    }
    let factor = SpdFactor::new(n, "generalized eigenproblem mass matrix")?;
    let mut c = a.to_owned();
    congruence_by_inverse_lower(factor.lower(), &mut c);
    symmetric_eigenvalues(c.as_ref())
}

/// In place `C <- L^-1 C L^-T` for lower-triangular `L`, using the symmetry
/// of `C`.
pub fn congruence_by_inverse_lower(l: MatRef<'_, f64>, c: &mut Mat<f64>) {
    l.solve_lower_triangular_in_place(c.as_mut());
    let mut ct = c.transpose().to_owned();
    l.solve_lower_triangular_in_place(ct.as_mut());
    *c = ct;
}
