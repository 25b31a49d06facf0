//! Mixed finite element laboratory for parameter-robust block
//! preconditioners of Darcy and simplified Biot saddle-point systems.
//!
//! The pipeline is: [`mesh`] builds the structured unit-square triangulation,
//! [`spaces`] provides RT0 / P0 / vector P2 dof maps, [`forms`] assembles the
//! bilinear forms, [`precond`] builds block-diagonal preconditioners and
//! [`spectral`] measures condition numbers, inf-sup constants and MINRES
//! iteration counts. [`experiment`] drives parameter sweeps.

#![allow(clippy::needless_range_loop)]

pub mod conductivity;
pub mod error;
pub mod experiment;
pub mod forms;
pub mod linalg;
pub mod mesh;
pub mod par;
pub mod precond;
pub mod spaces;
pub mod spectral;

pub use conductivity::Conductivity;
pub use error::{Error, Result};
pub use forms::{build_biot_system, build_darcy_system, AssembledSaddleSystem};
pub use mesh::{BoundaryTag, Mesh};
pub use precond::{BlockPreconditioner, PressureMode};
pub use spectral::{condition_number, SpectrumReport};
