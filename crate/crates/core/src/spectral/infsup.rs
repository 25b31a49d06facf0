use faer::Mat;

use crate::error::{Error, Result};
use crate::forms::AssembledSaddleSystem;
use crate::linalg::{symmetric_eigenvalues, SparseMatrix, SpdFactor};
use crate::precond::{darcy_b1, Block, RealizedBlock};

use super::condition::NULL_THRESHOLD;

/// Discrete inf-sup constant of the Darcy divergence between the flux norm
/// `velocity_norm` and the pressure norm whose inverse is `pressure` applied:
/// `beta^2` is the smallest nonzero eigenvalue of `Q^-1 B N^-1 B^T`.
/// Constant pressures are excluded when they are in the kernel of `B^T`.
pub fn infsup_constant(
    system: &AssembledSaddleSystem,
    velocity_norm: &SparseMatrix,
    pressure: &RealizedBlock,
) -> Result<f64> {
    let AssembledSaddleSystem::Darcy(d) = system else {
        return Err(Error::Unsupported(
            "inf-sup constant of a Biot system".into(),
        ));
    };
    let (np, nu) = (d.div.nrows(), d.div.ncols());
    if velocity_norm.nrows() != nu || pressure.dim() != np {
        return Err(Error::Dimension(format!(
            "norms of size {}/{} for divergence {np}x{nu}",
            velocity_norm.nrows(),
            pressure.dim()
        )));
    }
    let nfac = SpdFactor::from_sparse(velocity_norm, "velocity norm")?;
    let bt = d.div.transpose().to_dense();
    let x = nfac.solve_mat(bt.as_ref());
    let mut g = d.div.to_dense() * &x;
    drop(x);
    pressure.whiten_rows(g.as_mut());
    let mut c = g.transpose().to_owned();
    pressure.whiten_rows(c.as_mut());
    let c = Mat::<f64>::from_fn(np, np, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let ev = symmetric_eigenvalues(c.as_ref())?;
    let radius = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let zeros = ev
        .iter()
        .filter(|v| v.abs() <= NULL_THRESHOLD * radius)
        .count();
    let expected = system.kernel_dim();
    if zeros != expected {
        return Err(Error::KernelDimension {
            expected,
            found: zeros,
        });
    }
    let min = ev
        .iter()
        .copied()
        .filter(|v| v.abs() > NULL_THRESHOLD * radius)
        .fold(f64::INFINITY, f64::min);
    Ok(min.max(0.0).sqrt())
}

/// Inf-sup constant in the `K`-weighted norms of the `B1` preconditioner.
pub fn weighted_infsup_constant(system: &AssembledSaddleSystem) -> Result<f64> {
    let p = darcy_b1(system)?;
    let Block::InverseOf(crate::precond::Operator::Sparse(flux)) = &p.blocks[0] else {
        return Err(Error::Unsupported("non-sparse flux norm".into()));
    };
    let pressure = crate::precond::realize_block(&p.blocks[1], "pressure norm")?;
    infsup_constant(system, flux, &pressure)
}
