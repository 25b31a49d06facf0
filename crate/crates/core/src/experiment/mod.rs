//! Parameter sweeps over `(theta, K, h)` grids and their tabulation.

mod config;
mod output;

pub use config::{
    ExperimentConfig, ExperimentId, FieldKind, OutputFormat, PrecondId, PressureSelection, Problem,
    BIOT_MAX_H_EXP, DARCY_MAX_H_EXP,
};
pub use output::{format_cond, to_csv, to_markdown};

use serde::Serialize;

use crate::conductivity::Conductivity;
use crate::error::Result;
use crate::forms::{
    build_biot_system, build_darcy_system, manufactured_rhs, AssembledSaddleSystem,
};
use crate::mesh::Mesh;
use crate::par;
use crate::precond::{
    biot_preconditioner, darcy_b1, darcy_b2, BiotVariant, BlockPreconditioner, PressureMode,
};
use crate::spectral::{condition_number_realized, minres, MinresOptions};

/// One condition-number measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub preconditioner: PrecondId,
    /// Set for the Darcy `B2` preconditioner only.
    pub pressure_mode: Option<PressureMode>,
    pub theta: Option<f64>,
    pub k: f64,
    pub h_exp: u32,
    pub size: usize,
    pub n_null: usize,
    pub lambda_min_abs: f64,
    pub lambda_max_abs: f64,
    pub cond: f64,
    pub minres_iterations: Option<usize>,
    pub minres_converged: Option<bool>,
}

impl Record {
    pub fn h(&self) -> f64 {
        2f64.powi(-(self.h_exp as i32))
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    /// Ordered by theta, K, h, then preconditioner and pressure mode.
    pub records: Vec<Record>,
}

impl ExperimentOutput {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => to_csv(&self.records),
            OutputFormat::Md => to_markdown(&self.config, &self.records),
        }
    }

    pub fn find(
        &self,
        p: PrecondId,
        mode: Option<PressureMode>,
        theta: Option<f64>,
        k: f64,
        h_exp: u32,
    ) -> Option<&Record> {
        self.records.iter().find(|r| {
            r.preconditioner == p
                && r.pressure_mode == mode
                && r.theta == theta
                && r.k == k
                && r.h_exp == h_exp
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads for the grid; `None` uses the default pool.
    pub jobs: Option<usize>,
    /// Replaces the desk-scale mesh cap.
    pub max_h_exp: Option<u32>,
}

#[derive(Debug, Clone, Copy)]
struct GridPoint {
    theta: Option<f64>,
    k: f64,
    h_exp: u32,
}

/// Run every grid point. Points are independent and dispatched in
/// parallel; the records come back in grid order. The first failure aborts
/// the run.
pub fn run(config: &ExperimentConfig, opts: RunOptions) -> Result<ExperimentOutput> {
    config.validate(opts.max_h_exp)?;
    let thetas: Vec<Option<f64>> = match (config.problem, config.field) {
        (Problem::Darcy, FieldKind::Tensor) => config.thetas.iter().map(|&t| Some(t)).collect(),
        _ => vec![None],
    };
    let mut grid = Vec::new();
    for &theta in &thetas {
        for &k in &config.k_values {
            for &h_exp in &config.h_exponents {
                grid.push(GridPoint { theta, k, h_exp });
            }
        }
    }
    let results = par::with_jobs(opts.jobs, || par::map(&grid, |p| run_point(config, *p)));
    let mut records = Vec::new();
    for r in results {
        records.extend(r?);
    }
    Ok(ExperimentOutput {
        config: config.clone(),
        records,
    })
}

fn field_of(config: &ExperimentConfig, p: GridPoint) -> Result<Conductivity> {
    match config.field {
        FieldKind::Constant => Conductivity::constant(p.k),
        FieldKind::Jump => Conductivity::jump(p.k),
        FieldKind::Tensor => Conductivity::tensor(p.k, p.theta.unwrap_or(0.0)),
    }
}

type Labelled = (PrecondId, Option<PressureMode>, BlockPreconditioner);

/// Build the system of one grid point together with the requested
/// preconditioners (one per pressure mode for Darcy `B2`).
fn point_preconditioners(
    config: &ExperimentConfig,
    p: GridPoint,
) -> Result<(AssembledSaddleSystem, Vec<Labelled>)> {
    let mesh = Mesh::unit_square(1 << p.h_exp)?;
    let mut out = Vec::new();
    let system = match config.problem {
        Problem::Darcy => {
            let s = build_darcy_system(&mesh, field_of(config, p)?, &config.flux_bc)?;
            for &id in &config.preconditioners {
                match id {
                    PrecondId::B1 => out.push((id, None, darcy_b1(&s)?)),
                    PrecondId::B2 => {
                        for mode in config.pressure_mode.modes() {
                            out.push((id, Some(mode), darcy_b2(&s, mode)?));
                        }
                    }
                    PrecondId::B1K | PrecondId::B2K => unreachable!("rejected by validation"),
                }
            }
            s
        }
        Problem::Biot => {
            let s = build_biot_system(&mesh, p.k)?;
            for &id in &config.preconditioners {
                let variant = match id {
                    PrecondId::B1 => BiotVariant::B1,
                    PrecondId::B2 => BiotVariant::B2,
                    PrecondId::B1K => BiotVariant::B1K,
                    PrecondId::B2K => BiotVariant::B2K,
                };
                out.push((id, None, biot_preconditioner(&s, variant)?));
            }
            s
        }
    };
    Ok((system, out))
}

fn run_point(config: &ExperimentConfig, p: GridPoint) -> Result<Vec<Record>> {
    let (system, preconditioners) = point_preconditioners(config, p)?;
    let rhs = config.minres.then(|| manufactured_rhs(&system));
    let matrix = config.minres.then(|| system.matrix());
    let mut records = Vec::with_capacity(preconditioners.len());
    for (id, mode, pre) in preconditioners {
        let realized = pre.realize()?;
        let report = condition_number_realized(&system, &realized)?;
        let (minres_iterations, minres_converged) = match (&matrix, &rhs) {
            (Some(a), Some(b)) => {
                let out = minres(
                    a,
                    &realized,
                    b,
                    MinresOptions {
                        rtol: config.minres_rtol,
                        max_iter: config.minres_max_iter,
                    },
                )?;
                (Some(out.iterations), Some(out.converged))
            }
            _ => (None, None),
        };
        records.push(Record {
            preconditioner: id,
            pressure_mode: mode,
            theta: p.theta,
            k: p.k,
            h_exp: p.h_exp,
            size: report.size,
            n_null: report.n_filtered_null,
            lambda_min_abs: report.lambda_min_abs,
            lambda_max_abs: report.lambda_max_abs,
            cond: report.cond,
            minres_iterations,
            minres_converged,
        });
    }
    Ok(records)
}
