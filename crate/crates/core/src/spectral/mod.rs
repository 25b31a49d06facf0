//! Spectra of preconditioned saddle-point operators, discrete inf-sup
//! constants and preconditioned MINRES.

mod condition;
mod infsup;
mod minres;

pub use condition::{
    condition_number, condition_number_realized, SpectrumReport, NULL_THRESHOLD, REALNESS_TOLERANCE,
};
pub use infsup::{infsup_constant, weighted_infsup_constant};
pub use minres::{minres, minres_with, MinresOptions, MinresOutcome};
