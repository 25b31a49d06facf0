use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::AssembledSaddleSystem;
use crate::linalg::{asymmetry, symmetric_eigenvalues};
use crate::precond::{BlockPreconditioner, PressureMode, RealizedPreconditioner};

/// Eigenvalues below this fraction of the spectral radius count as kernel.
pub const NULL_THRESHOLD: f64 = 1e-10;

/// Largest tolerated relative asymmetry of the whitened operator. It bounds
/// the imaginary parts of the preconditioned spectrum.
pub const REALNESS_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub preconditioner: String,
    pub pressure_mode: Option<PressureMode>,
    pub size: usize,
    /// Conductivity magnitude of the system (`K`, `K0` or the Biot `K`).
    pub k: f64,
    pub h: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub n_filtered_null: usize,
    pub lambda_min_abs: f64,
    pub lambda_max_abs: f64,
    pub cond: f64,
    /// Relative asymmetry of `W A W^T` before symmetrization.
    pub realness_residue: f64,
}

/// Spectrum of `B A` through the congruent symmetric matrix `W A W^T`,
/// where `W^T W` is the preconditioner action. Near-zero modes are dropped
/// and must match the system's kernel dimension.
pub fn condition_number(
    system: &AssembledSaddleSystem,
    precond: &BlockPreconditioner,
) -> Result<SpectrumReport> {
    let realized = precond.realize()?;
    condition_number_realized(system, &realized)
}

pub fn condition_number_realized(
    system: &AssembledSaddleSystem,
    precond: &RealizedPreconditioner,
) -> Result<SpectrumReport> {
    if precond.block_sizes() != system.block_sizes() {
        return Err(Error::Dimension(format!(
            "preconditioner blocks {:?} vs system blocks {:?}",
            precond.block_sizes(),
            system.block_sizes()
        )));
    }
    let a = system.matrix().to_dense();
    let mut c = precond.whitened(&a)?;
    drop(a);
    let residue = asymmetry(c.as_ref());
    if residue > REALNESS_TOLERANCE {
        return Err(Error::ComplexSpectrum(residue));
    }
    let n = c.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let m = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = m;
            c[(j, i)] = m;
        }
    }
    let eigenvalues = symmetric_eigenvalues(c.as_ref())?;
    drop(c);
    report(system, precond, eigenvalues, residue)
}

fn report(
    system: &AssembledSaddleSystem,
    precond: &RealizedPreconditioner,
    eigenvalues: Vec<f64>,
    residue: f64,
) -> Result<SpectrumReport> {
    let radius = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = NULL_THRESHOLD * radius;
    let kept: Vec<f64> = eigenvalues
        .iter()
        .map(|v| v.abs())
        .filter(|&v| v > cutoff)
        .collect();
    let filtered = eigenvalues.len() - kept.len();
    let expected = system.kernel_dim();
    if filtered != expected {
        return Err(Error::KernelDimension {
            expected,
            found: filtered,
        });
    }
    let lambda_min_abs = kept.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SpectrumReport {
        preconditioner: precond.id.clone(),
        pressure_mode: precond.pressure_mode,
        size: eigenvalues.len(),
        k: system.conductivity_magnitude(),
        h: system.mesh().h(),
        n_filtered_null: filtered,
        lambda_min_abs,
        lambda_max_abs: radius,
        cond: radius / lambda_min_abs,
        eigenvalues,
        realness_residue: residue,
    })
}
