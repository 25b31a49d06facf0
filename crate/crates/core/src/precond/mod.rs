//! Block-diagonal preconditioners for the Darcy and Biot systems.
//!
//! Darcy, with `M_W` the `W`-weighted RT0 mass, `D_W` the `W`-weighted
//! div-div form, `Mp` the P0 mass and `S` a pressure Laplacian:
//!
//! | id   | flux block                       | pressure block         |
//! |------|----------------------------------|------------------------|
//! | `B1` | `(M_{K^-1} + D_{K^-1})^-1`       | `(K Mp)^-1` (`k Mp` for tensors) |
//! | `B2` | `(M_{K^-1} + D)^-1`              | `Mp^-1 + S^-1`         |
//!
//! Biot adds a displacement block `Ae^-1` and uses `(M + D) / K` (`B1`) or
//! `M / K + D` (`B2`) on the flux, with pressure `Mp^-1` or, for the `K`
//! variants, `(K Mp)^-1`.

mod realize;

pub use realize::{
    constant_deflated_inverse, realize_block, RealizedBlock, RealizedPreconditioner,
};

use serde::{Deserialize, Serialize};

use crate::conductivity::Conductivity;
use crate::error::{Error, Result};
use crate::forms::{
    assemble_dg_laplacian, assemble_divdiv, assemble_p0_mass, assemble_velocity_mass,
    AssembledSaddleSystem, BiotSystem, DarcySystem,
};
use crate::linalg::{DenseMatrix, SparseMatrix, SpdFactor};
use crate::mesh::BoundaryTag;

#[derive(Debug, Clone)]
pub enum Operator {
    Sparse(SparseMatrix),
    Dense(DenseMatrix),
}

#[derive(Debug, Clone)]
pub struct InverseTerm {
    pub matrix: Operator,
    /// Invert on the complement of the constant vector (the matrix has the
    /// constants as its kernel).
    pub deflate_constants: bool,
}

#[derive(Debug, Clone)]
pub enum Block {
    InverseOf(Operator),
    SumOfInverses(Vec<InverseTerm>),
}

impl Block {
    pub fn dim(&self) -> usize {
        match self {
            Block::InverseOf(op) => op.dim(),
            Block::SumOfInverses(terms) => terms[0].matrix.dim(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlockPreconditioner {
    pub id: String,
    /// Set for the Darcy `B2` variants.
    pub pressure_mode: Option<PressureMode>,
    pub blocks: Vec<Block>,
}

impl BlockPreconditioner {
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Block::dim).collect()
    }

    pub fn realize(&self) -> Result<RealizedPreconditioner> {
        RealizedPreconditioner::new(self)
    }
}

/// How the `B2` pressure Laplacian is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PressureMode {
    /// Interior-penalty Laplacian with harmonic-mean facet weights. Tensor
    /// fields use the scalar `k` of the tensor.
    Dg,
    /// `B M_{K^-1}^-1 B^T`.
    ExactSchur,
}

impl PressureMode {
    pub fn name(self) -> &'static str {
        match self {
            PressureMode::Dg => "dg",
            PressureMode::ExactSchur => "exact-schur",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BiotVariant {
    B1,
    B2,
    B1K,
    B2K,
}

impl BiotVariant {
    pub const ALL: [BiotVariant; 4] = [
        BiotVariant::B1,
        BiotVariant::B1K,
        BiotVariant::B2,
        BiotVariant::B2K,
    ];

    pub fn id(self) -> &'static str {
        match self {
            BiotVariant::B1 => "B1",
            BiotVariant::B2 => "B2",
            BiotVariant::B1K => "B1K",
            BiotVariant::B2K => "B2K",
        }
    }
}

fn darcy(system: &AssembledSaddleSystem) -> Result<&DarcySystem> {
    match system {
        AssembledSaddleSystem::Darcy(d) => Ok(d),
        AssembledSaddleSystem::Biot(_) => Err(Error::Unsupported(
            "Darcy preconditioner on a Biot system".into(),
        )),
    }
}

fn biot(system: &AssembledSaddleSystem) -> Result<&BiotSystem> {
    match system {
        AssembledSaddleSystem::Biot(b) => Ok(b),
        AssembledSaddleSystem::Darcy(_) => Err(Error::Unsupported(
            "Biot preconditioner on a Darcy system".into(),
        )),
    }
}

/// P0 mass weighted by the cell conductivity, or by the tensor scalar `k`.
fn weighted_pressure_mass(d: &DarcySystem) -> Result<SparseMatrix> {
    let mp = assemble_p0_mass(&d.mesh, &d.pressure);
    if let Conductivity::Tensor { .. } = d.field {
        return Ok(mp.scaled(d.field.tensor_pressure_scalar()?));
    }
    let weights = (0..d.mesh.num_cells())
        .map(|c| d.field.cell_scalar(&d.mesh, c))
        .collect::<Result<Vec<_>>>()?;
    let w = SparseMatrix::diagonal(&weights);
    Ok(SparseMatrix::diagonal(
        &mp.diag()
            .iter()
            .zip(w.diag())
            .map(|(m, k)| m * k)
            .collect::<Vec<_>>(),
    ))
}

/// Boundary sides where the flux is natural, i.e. the pressure is Dirichlet.
pub fn pressure_dirichlet_tags(d: &DarcySystem) -> Vec<BoundaryTag> {
    BoundaryTag::ALL
        .into_iter()
        .filter(|t| !d.flux_tags.contains(t))
        .collect()
}

pub fn darcy_b1(system: &AssembledSaddleSystem) -> Result<BlockPreconditioner> {
    let d = darcy(system)?;
    let div = assemble_divdiv(&d.mesh, &d.flux, Some(&d.field));
    let flux = d.mass.lin_comb(1.0, &div, 1.0)?;
    Ok(BlockPreconditioner {
        id: "B1".into(),
        pressure_mode: None,
        blocks: vec![
            Block::InverseOf(Operator::Sparse(flux)),
            Block::InverseOf(Operator::Sparse(weighted_pressure_mass(d)?)),
        ],
    })
}

/// The pressure Laplacian `S` of `B2`, and whether it has the constants as
/// kernel.
pub fn darcy_b2_pressure_operator(d: &DarcySystem, mode: PressureMode) -> Result<(Operator, bool)> {
    let dirichlet = pressure_dirichlet_tags(d);
    let singular = dirichlet.is_empty();
    let op = match mode {
        PressureMode::Dg => {
            let field = match d.field {
                Conductivity::Tensor { .. } => {
                    Conductivity::constant(d.field.tensor_pressure_scalar()?)?
                }
                scalar => scalar,
            };
            Operator::Sparse(assemble_dg_laplacian(
                &d.mesh,
                &d.pressure,
                &field,
                &dirichlet,
            )?)
        }
        PressureMode::ExactSchur => Operator::Dense(exact_schur(&d.mass, &d.div)?),
    };
    Ok((op, singular))
}

/// `B A^-1 B^T` as a dense matrix.
pub fn exact_schur(a: &SparseMatrix, b: &SparseMatrix) -> Result<DenseMatrix> {
    let factor = SpdFactor::from_sparse(a, "Schur complement flux block")?;
    let x = factor.solve_mat(b.transpose().to_dense().as_ref());
    let np = b.nrows();
    let mut s = DenseMatrix::zeros(np, np);
    for i in 0..np {
        for (k, v) in b.row(i) {
            for j in 0..np {
                s[(i, j)] += v * x[(k, j)];
            }
        }
    }
    let sym = DenseMatrix::from_fn(np, np, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    Ok(sym)
}

pub fn darcy_b2(system: &AssembledSaddleSystem, mode: PressureMode) -> Result<BlockPreconditioner> {
    let d = darcy(system)?;
    let div = assemble_divdiv(&d.mesh, &d.flux, None);
    let flux = d.mass.lin_comb(1.0, &div, 1.0)?;
    let mp = assemble_p0_mass(&d.mesh, &d.pressure);
    let (s, singular) = darcy_b2_pressure_operator(d, mode)?;
    Ok(BlockPreconditioner {
        id: format!("B2[{}]", mode.name()),
        pressure_mode: Some(mode),
        blocks: vec![
            Block::InverseOf(Operator::Sparse(flux)),
            Block::SumOfInverses(vec![
                InverseTerm {
                    matrix: Operator::Sparse(mp),
                    deflate_constants: false,
                },
                InverseTerm {
                    matrix: s,
                    deflate_constants: singular,
                },
            ]),
        ],
    })
}

pub fn biot_preconditioner(
    system: &AssembledSaddleSystem,
    variant: BiotVariant,
) -> Result<BlockPreconditioner> {
    let b = biot(system)?;
    let k = b.k;
    let mass = assemble_velocity_mass(&b.mesh, &b.flux, &Conductivity::constant(1.0)?);
    let div = assemble_divdiv(&b.mesh, &b.flux, None);
    let flux = match variant {
        BiotVariant::B1 | BiotVariant::B1K => mass.lin_comb(1.0 / k, &div, 1.0 / k)?,
        BiotVariant::B2 | BiotVariant::B2K => mass.lin_comb(1.0 / k, &div, 1.0)?,
    };
    let mp = assemble_p0_mass(&b.mesh, &b.pressure);
    let pressure = match variant {
        BiotVariant::B1 | BiotVariant::B2 => mp,
        BiotVariant::B1K | BiotVariant::B2K => mp.scaled(k),
    };
    Ok(BlockPreconditioner {
        id: variant.id().into(),
        pressure_mode: None,
        blocks: vec![
            Block::InverseOf(Operator::Sparse(b.elasticity.clone())),
            Block::InverseOf(Operator::Sparse(flux)),
            Block::InverseOf(Operator::Sparse(pressure)),
        ],
    })
}

pub fn biot_b1(system: &AssembledSaddleSystem) -> Result<BlockPreconditioner> {
    biot_preconditioner(system, BiotVariant::B1)
}

pub fn biot_b2(system: &AssembledSaddleSystem) -> Result<BlockPreconditioner> {
    biot_preconditioner(system, BiotVariant::B2)
}

pub fn biot_b1k(system: &AssembledSaddleSystem) -> Result<BlockPreconditioner> {
    biot_preconditioner(system, BiotVariant::B1K)
}

pub fn biot_b2k(system: &AssembledSaddleSystem) -> Result<BlockPreconditioner> {
    biot_preconditioner(system, BiotVariant::B2K)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{assemble_div, build_biot_system, build_darcy_system};
    use crate::linalg::symmetric_eigenvalues;
    use crate::mesh::Mesh;
    use std::f64::consts::FRAC_PI_4;

    fn closed(n: usize, k: f64) -> AssembledSaddleSystem {
        build_darcy_system(
            &Mesh::unit_square(n).unwrap(),
            Conductivity::constant(k).unwrap(),
            &BoundaryTag::ALL,
        )
        .unwrap()
    }

    fn dense_rel_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                worst = worst.max((a[(i, j)] - b[(i, j)]).abs());
                scale = scale.max(b[(i, j)].abs());
            }
        }
        worst / scale
    }

    fn assert_blocks_spd(p: &BlockPreconditioner) {
        let r = p.realize().unwrap();
        for b in &r.blocks {
            let ev = symmetric_eigenvalues(b.apply_matrix().as_ref()).unwrap();
            assert!(ev[0] > 0.0, "{}: {}", p.id, ev[0]);
        }
    }

    #[test]
    fn b1_unit_conductivity_is_mass_plus_divdiv() {
        let s = closed(3, 1.0);
        let AssembledSaddleSystem::Darcy(d) = &s else {
            unreachable!()
        };
        let p = darcy_b1(&s).unwrap();
        let Block::InverseOf(Operator::Sparse(flux)) = &p.blocks[0] else {
            panic!()
        };
        let expect = d
            .mass
            .lin_comb(1.0, &assemble_divdiv(&d.mesh, &d.flux, None), 1.0)
            .unwrap();
        assert!(flux.lin_comb(1.0, &expect, -1.0).unwrap().max_abs() <= 1e-14 * expect.max_abs());
        assert_eq!(p.block_sizes(), s.block_sizes());
    }

    #[test]
    fn every_block_is_spd() {
        let mesh = Mesh::unit_square(4).unwrap();
        let lr = [BoundaryTag::Left, BoundaryTag::Right];
        let systems = [
            closed(4, 1e-4),
            build_darcy_system(&mesh, Conductivity::jump(1e-6).unwrap(), &lr).unwrap(),
            build_darcy_system(&mesh, Conductivity::tensor(1e-4, FRAC_PI_4).unwrap(), &lr).unwrap(),
        ];
        for s in &systems {
            assert_blocks_spd(&darcy_b1(s).unwrap());
            assert_blocks_spd(&darcy_b2(s, PressureMode::ExactSchur).unwrap());
            assert_blocks_spd(&darcy_b2(s, PressureMode::Dg).unwrap());
        }
        let biot = build_biot_system(&mesh, 1e-3).unwrap();
        for v in BiotVariant::ALL {
            let p = biot_preconditioner(&biot, v).unwrap();
            assert_eq!(p.block_sizes(), biot.block_sizes());
            assert_blocks_spd(&p);
        }
    }

    #[test]
    fn sum_of_inverses_matches_dense_sum() {
        let s = closed(4, 1e-2);
        let p = darcy_b2(&s, PressureMode::Dg).unwrap();
        let r = p.realize().unwrap();
        let AssembledSaddleSystem::Darcy(d) = &s else {
            unreachable!()
        };
        let mp = assemble_p0_mass(&d.mesh, &d.pressure).to_dense();
        let (op, singular) = darcy_b2_pressure_operator(d, PressureMode::Dg).unwrap();
        assert!(singular);
        // pseudoinverse oracle from the eigendecomposition
        let sd = op.to_dense();
        let evd = sd.self_adjoint_eigen(faer::Side::Lower).unwrap();
        let (u, lam) = (evd.U(), evd.S().column_vector());
        let n = sd.nrows();
        let lmax = (0..n).map(|i| lam[i].abs()).fold(0.0, f64::max);
        let pinv = DenseMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .filter(|&k| lam[k].abs() > 1e-10 * lmax)
                .map(|k| u[(i, k)] * u[(j, k)] / lam[k])
                .sum()
        });
        let mpinv = DenseMatrix::from_fn(n, n, |i, j| if i == j { 1.0 / mp[(i, i)] } else { 0.0 });
        let oracle = &mpinv + &pinv;
        let x: Vec<f64> = (0..n).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let got = r.blocks[1].apply(&x);
        let want: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| oracle[(i, j)] * x[j]).sum())
            .collect();
        let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-10 * scale, "{g} vs {w}");
        }
    }

    #[test]
    fn exact_schur_pulls_out_scalar_conductivity() {
        let k = 1e-3;
        let s = closed(4, k);
        let AssembledSaddleSystem::Darcy(d) = &s else {
            unreachable!()
        };
        let (op, _) = darcy_b2_pressure_operator(d, PressureMode::ExactSchur).unwrap();
        let unit = assemble_velocity_mass(&d.mesh, &d.flux, &Conductivity::constant(1.0).unwrap());
        let b = assemble_div(&d.mesh, &d.flux, &d.pressure);
        let reference = exact_schur(&unit, &b).unwrap() * faer::Scale(k);
        assert!(dense_rel_diff(&op.to_dense(), &reference) <= 1e-12);
    }

    #[test]
    fn mismatched_system_kind_is_rejected() {
        let biot = build_biot_system(&Mesh::unit_square(2).unwrap(), 0.5).unwrap();
        assert!(darcy_b1(&biot).is_err());
        assert!(biot_b1(&closed(2, 1.0)).is_err());
    }
}
