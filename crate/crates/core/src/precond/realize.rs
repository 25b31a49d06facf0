use faer::{Mat, MatMut};

use super::{Block, BlockPreconditioner, InverseTerm, Operator, PressureMode};
use crate::error::{Error, Result};
use crate::linalg::{asymmetry, SpdFactor};

/// Pseudoinverse of a symmetric positive semidefinite matrix whose kernel is
/// spanned by the constant vector: `(S + c 1 1^T)^-1 - 1 1^T / (c n^2)`.
pub fn constant_deflated_inverse(s: &Mat<f64>, context: &str) -> Result<Mat<f64>> {
    let n = s.nrows();
    let trace: f64 = (0..n).map(|i| s[(i, i)]).sum();
    let c = trace / (n * n) as f64;
    let shifted = Mat::<f64>::from_fn(n, n, |i, j| s[(i, j)] + c);
    let mut inv = SpdFactor::new(shifted.as_ref(), context)?.inverse();
    let corr = 1.0 / (c * (n * n) as f64);
    for j in 0..n {
        for i in 0..n {
            inv[(i, j)] -= corr;
        }
    }
    Ok(inv)
}

fn term_inverse(term: &InverseTerm) -> Result<Mat<f64>> {
    let dense = term.matrix.to_dense();
    if term.deflate_constants {
        constant_deflated_inverse(&dense, "deflated preconditioner term")
    } else {
        Ok(SpdFactor::new(dense.as_ref(), "preconditioner term")?.inverse())
    }
}

/// One block made concrete for dense computation.
pub enum RealizedBlock {
    /// Apply is `N^-1`; whitening is `L^-1` with `N = L L^T`.
    Inverse(SpdFactor),
    /// Apply is the dense SPD `P`; whitening is `L^T` with `P = L L^T`.
    Explicit { apply: Mat<f64>, factor: SpdFactor },
}

impl RealizedBlock {
    pub fn dim(&self) -> usize {
        match self {
            RealizedBlock::Inverse(f) => f.dim(),
            RealizedBlock::Explicit { apply, .. } => apply.nrows(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            RealizedBlock::Inverse(f) => f.solve(x),
            RealizedBlock::Explicit { apply, .. } => (0..apply.nrows())
                .map(|i| (0..apply.ncols()).map(|j| apply[(i, j)] * x[j]).sum())
                .collect(),
        }
    }

    /// Dense matrix of the block's action.
    pub fn apply_matrix(&self) -> Mat<f64> {
        match self {
            RealizedBlock::Inverse(f) => f.inverse(),
            RealizedBlock::Explicit { apply, .. } => apply.clone(),
        }
    }

    /// Dense norm matrix: the inverse of the action.
    pub fn norm_matrix(&self) -> Result<Mat<f64>> {
        match self {
            RealizedBlock::Inverse(f) => {
                let l = f.lower();
                Ok(l * l.transpose())
            }
            RealizedBlock::Explicit { factor, .. } => Ok(factor.inverse()),
        }
    }

    /// `X <- W X` for the block's whitening factor `W` (`W^T W` is the
    /// action).
    pub fn whiten_rows(&self, mut x: MatMut<'_, f64>) {
        match self {
            RealizedBlock::Inverse(f) => f.lower().solve_lower_triangular_in_place(x),
            RealizedBlock::Explicit { factor, .. } => {
                let y = factor.lower().transpose() * x.as_ref();
                x.copy_from(&y);
            }
        }
    }
}

/// A block preconditioner with every block factored.
pub struct RealizedPreconditioner {
    pub id: String,
    pub pressure_mode: Option<PressureMode>,
    pub blocks: Vec<RealizedBlock>,
}

impl RealizedPreconditioner {
    pub fn new(pre: &BlockPreconditioner) -> Result<Self> {
        let blocks = pre
            .blocks
            .iter()
            .enumerate()
            .map(|(b, block)| realize_block(block, &format!("{} block {b}", pre.id)))
            .collect::<Result<Vec<_>>>()?;
        Ok(RealizedPreconditioner {
            id: pre.id.clone(),
            pressure_mode: pre.pressure_mode,
            blocks,
        })
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(RealizedBlock::dim).collect()
    }

    pub fn dim(&self) -> usize {
        self.block_sizes().iter().sum()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        let mut out = Vec::with_capacity(x.len());
        let mut off = 0;
        for b in &self.blocks {
            out.extend(b.apply(&x[off..off + b.dim()]));
            off += b.dim();
        }
        out
    }

    /// `C = W A W^T` for symmetric `A`; its eigenvalues are those of the
    /// preconditioned operator.
    pub fn whitened(&self, a: &Mat<f64>) -> Result<Mat<f64>> {
        if a.nrows() != self.dim() || a.ncols() != self.dim() {
            return Err(Error::Dimension(format!(
                "system of size {} against preconditioner of size {}",
                a.nrows(),
                self.dim()
            )));
        }
        let mut y = a.clone();
        self.whiten_rows(&mut y);
        let mut c = y.transpose().to_owned();
        drop(y);
        self.whiten_rows(&mut c);
        Ok(c)
    }

    fn whiten_rows(&self, x: &mut Mat<f64>) {
        let ncols = x.ncols();
        let mut off = 0;
        for b in &self.blocks {
            let n = b.dim();
            b.whiten_rows(x.as_mut().submatrix_mut(off, 0, n, ncols));
            off += n;
        }
    }
}

pub fn realize_block(block: &Block, context: &str) -> Result<RealizedBlock> {
    match block {
        Block::InverseOf(op) => Ok(RealizedBlock::Inverse(SpdFactor::new(
            op.to_dense().as_ref(),
            context,
        )?)),
        Block::SumOfInverses(terms) => {
            let mut sum = term_inverse(&terms[0])?;
            for t in &terms[1..] {
                sum += term_inverse(t)?;
            }
            let n = sum.nrows();
            let sym = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (sum[(i, j)] + sum[(j, i)]));
            debug_assert!(asymmetry(sum.as_ref()) < 1e-8);
            let factor = SpdFactor::new(sym.as_ref(), context)?;
            Ok(RealizedBlock::Explicit { apply: sym, factor })
        }
    }
}

impl Operator {
    pub fn to_dense(&self) -> Mat<f64> {
        match self {
            Operator::Sparse(s) => s.to_dense(),
            Operator::Dense(d) => d.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Operator::Sparse(s) => s.nrows(),
            Operator::Dense(d) => d.nrows(),
        }
    }
}
