use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh needs at least one subdivision per side")]
    EmptyMesh,
    #[error("index {index} out of range for {what} of length {len}")]
    OutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    #[error("essential boundary conditions are not defined for piecewise-constant spaces")]
    ConstrainedP0,
    #[error("edge {0} lies on the boundary and has no harmonic mean")]
    BoundaryFacet(usize),
    #[error("operation requires a {expected} conductivity, got {found}")]
    WrongConductivity {
        expected: &'static str,
        found: &'static str,
    },
    #[error("invalid conductivity parameter: {0}")]
    InvalidConductivity(String),
    #[error("jump conductivity needs an even subdivision count so the interface lies on mesh lines, got N = {0}")]
    OddJumpMesh(usize),
    #[error("matrix is not positive definite (failed at {context})")]
    NotPositiveDefinite { context: String },
    #[error("matrix is not symmetric: relative asymmetry {0:e}")]
    NotSymmetric(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("eigensolver failed to converge")]
    EigenFailure,
    #[error("expected {expected} near-zero eigenvalues, found {found}")]
    KernelDimension { expected: usize, found: usize },
    #[error("preconditioned spectrum is not real: residue {0:e}")]
    ComplexSpectrum(f64),
    #[error("unsupported combination: {0}")]
    Unsupported(String),
    #[error("invalid experiment configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
