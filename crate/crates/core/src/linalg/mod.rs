//! Sparse assembly target and dense factor/eigen routines.
//!
//! Dense factorizations and symmetric eigensolves are delegated to `faer`.

mod dense;
mod sparse;

pub use dense::{
    asymmetry, congruence_by_inverse_lower, generalized_eigs, symmetric_eigenvalues, DenseMatrix,
    SpdFactor,
};
pub use sparse::{SparseMatrix, Triplets};
