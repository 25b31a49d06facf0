//! Bilinear forms and the assembled saddle-point systems.
//!
//! Every assembler works in the reduced numbering of its dof maps:
//! constrained (essential) dofs are dropped from rows and columns, which is
//! symmetric elimination for homogeneous data.

mod dg;
mod elasticity;
mod hdiv;
mod load;

pub use dg::assemble_dg_laplacian;
pub use elasticity::{assemble_coupling, assemble_elasticity};
pub use hdiv::{assemble_div, assemble_divdiv, assemble_p0_mass, assemble_velocity_mass};
pub use load::{constant_load, manufactured_rhs};

use crate::conductivity::Conductivity;
use crate::error::{Error, Result};
use crate::linalg::{SparseMatrix, Triplets};
use crate::mesh::{BoundaryTag, Mesh};
use crate::par;
use crate::spaces::{DofMap, SpaceKind};

/// Essential boundary of the displacement and flux in the Biot problem.
pub const BIOT_DIRICHLET: [BoundaryTag; 3] =
    [BoundaryTag::Left, BoundaryTag::Right, BoundaryTag::Bottom];

/// Assemble cell contributions in parallel chunks. `local` writes the
/// entries of one cell; chunk buffers are merged in cell order.
pub(crate) fn assemble_cells<F>(rows: usize, cols: usize, n_cells: usize, local: F) -> SparseMatrix
where
    F: Fn(usize, &mut Triplets) + Sync + Send,
{
    let parts = par::chunks(n_cells, par::ASSEMBLY_CHUNK, |range| {
        let mut t = Triplets::new(rows, cols);
        for c in range {
            local(c, &mut t);
        }
        t
    });
    let mut all = Triplets::new(rows, cols);
    for t in parts {
        all.append(t);
    }
    all.build()
}

/// Scatter a dense local matrix through two dof maps, applying orientation
/// signs and skipping constrained dofs.
pub(crate) fn scatter(
    t: &mut Triplets,
    row_map: &DofMap,
    row_dofs: &[(usize, f64)],
    col_map: &DofMap,
    col_dofs: &[(usize, f64)],
    local: impl Fn(usize, usize) -> f64,
) {
    for (i, &(gi, si)) in row_dofs.iter().enumerate() {
        let Some(ri) = row_map.reduced_index(gi) else {
            continue;
        };
        for (j, &(gj, sj)) in col_dofs.iter().enumerate() {
            let Some(rj) = col_map.reduced_index(gj) else {
                continue;
            };
            let v = local(i, j);
            if v != 0.0 {
                t.push(ri, rj, si * sj * v);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct DarcySystem {
    pub mesh: Mesh,
    pub field: Conductivity,
    pub flux_tags: Vec<BoundaryTag>,
    pub flux: DofMap,
    pub pressure: DofMap,
    /// `(K^-1 u, v)`.
    pub mass: SparseMatrix,
    /// `(div u, q)`, pressure rows by flux columns.
    pub div: SparseMatrix,
}

#[derive(Debug, Clone)]
pub struct BiotSystem {
    pub mesh: Mesh,
    pub k: f64,
    pub displacement: DofMap,
    pub flux: DofMap,
    pub pressure: DofMap,
    /// `(2 eps(u), eps(w))`.
    pub elasticity: SparseMatrix,
    /// `(K^-1 v, z)`.
    pub flux_mass: SparseMatrix,
    /// `-(div u, q)`.
    pub disp_coupling: SparseMatrix,
    /// `-(div v, q)`.
    pub flux_coupling: SparseMatrix,
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum AssembledSaddleSystem {
    Darcy(DarcySystem),
    Biot(BiotSystem),
}

impl AssembledSaddleSystem {
    pub fn mesh(&self) -> &Mesh {
        match self {
            AssembledSaddleSystem::Darcy(d) => &d.mesh,
            AssembledSaddleSystem::Biot(b) => &b.mesh,
        }
    }

    /// Sizes of the diagonal blocks after elimination.
    pub fn block_sizes(&self) -> Vec<usize> {
        match self {
            AssembledSaddleSystem::Darcy(d) => vec![d.flux.num_free(), d.pressure.num_free()],
            AssembledSaddleSystem::Biot(b) => vec![
                b.displacement.num_free(),
                b.flux.num_free(),
                b.pressure.num_free(),
            ],
        }
    }

    /// `K` for Biot, the field magnitude for Darcy.
    pub fn conductivity_magnitude(&self) -> f64 {
        match self {
            AssembledSaddleSystem::Darcy(d) => d.field.magnitude(),
            AssembledSaddleSystem::Biot(b) => b.k,
        }
    }

    pub fn size(&self) -> usize {
        self.block_sizes().iter().sum()
    }

    /// Dimension of the kernel of the full matrix: the constant pressures
    /// when the flux is prescribed on the whole boundary.
    pub fn kernel_dim(&self) -> usize {
        match self {
            AssembledSaddleSystem::Darcy(d) => {
                let mut closed = true;
                for (e, _) in d.mesh.boundary_edges() {
                    closed &= d.flux.is_constrained(e);
                }
                usize::from(closed)
            }
            AssembledSaddleSystem::Biot(_) => 0,
        }
    }

    /// Full symmetric indefinite matrix.
    pub fn matrix(&self) -> SparseMatrix {
        match self {
            AssembledSaddleSystem::Darcy(d) => {
                let bt = d.div.transpose();
                SparseMatrix::from_blocks(&[
                    vec![Some(&d.mass), Some(&bt)],
                    vec![Some(&d.div), None],
                ])
                .expect("conforming Darcy blocks")
            }
            AssembledSaddleSystem::Biot(b) => {
                let bet = b.disp_coupling.transpose();
                let bvt = b.flux_coupling.transpose();
                SparseMatrix::from_blocks(&[
                    vec![Some(&b.elasticity), None, Some(&bet)],
                    vec![None, Some(&b.flux_mass), Some(&bvt)],
                    vec![Some(&b.disp_coupling), Some(&b.flux_coupling), None],
                ])
                .expect("conforming Biot blocks")
            }
        }
    }
}

pub fn build_darcy_system(
    mesh: &Mesh,
    field: Conductivity,
    flux_tags: &[BoundaryTag],
) -> Result<AssembledSaddleSystem> {
    let field = field.validated()?;
    if matches!(field, Conductivity::Jump { .. }) && mesh.n_subdivisions() % 2 == 1 {
        return Err(Error::OddJumpMesh(mesh.n_subdivisions()));
    }
    let flux = DofMap::build(mesh, SpaceKind::Rt0, flux_tags)?;
    let pressure = DofMap::build(mesh, SpaceKind::P0, &[])?;
    let mass = assemble_velocity_mass(mesh, &flux, &field);
    let div = assemble_div(mesh, &flux, &pressure);
    Ok(AssembledSaddleSystem::Darcy(DarcySystem {
        mesh: mesh.clone(),
        field,
        flux_tags: flux_tags.to_vec(),
        flux,
        pressure,
        mass,
        div,
    }))
}

/// Simplified three-field Biot system with displacement and normal flux
/// prescribed on the left, right and bottom sides.
pub fn build_biot_system(mesh: &Mesh, k: f64) -> Result<AssembledSaddleSystem> {
    let field = Conductivity::constant(k)?;
    let displacement = DofMap::build(mesh, SpaceKind::P2Vec, &BIOT_DIRICHLET)?;
    let flux = DofMap::build(mesh, SpaceKind::Rt0, &BIOT_DIRICHLET)?;
    let pressure = DofMap::build(mesh, SpaceKind::P0, &[])?;
    Ok(AssembledSaddleSystem::Biot(BiotSystem {
        mesh: mesh.clone(),
        k,
        elasticity: assemble_elasticity(mesh, &displacement),
        flux_mass: assemble_velocity_mass(mesh, &flux, &field),
        disp_coupling: assemble_coupling(mesh, &displacement, &pressure).scaled(-1.0),
        flux_coupling: assemble_coupling(mesh, &flux, &pressure).scaled(-1.0),
        displacement,
        flux,
        pressure,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{symmetric_eigenvalues, SpdFactor};

    #[test]
    fn darcy_closed_boundary_sizes_and_kernel() {
        let m = Mesh::unit_square(4).unwrap();
        let s = build_darcy_system(&m, Conductivity::constant(1.0).unwrap(), &BoundaryTag::ALL)
            .unwrap();
        assert_eq!(s.block_sizes(), vec![40, 32]);
        assert_eq!(s.kernel_dim(), 1);
        let a = s.matrix();
        assert!(a.asymmetry() <= 1e-12);
        let ev = symmetric_eigenvalues(a.to_dense().as_ref()).unwrap();
        let scale = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let zeros = ev.iter().filter(|v| v.abs() < 1e-10 * scale).count();
        assert_eq!(zeros, 1);
    }

    #[test]
    fn darcy_open_sides_have_no_kernel() {
        let m = Mesh::unit_square(4).unwrap();
        let s = build_darcy_system(
            &m,
            Conductivity::jump(1e-2).unwrap(),
            &[BoundaryTag::Left, BoundaryTag::Right],
        )
        .unwrap();
        assert_eq!(s.kernel_dim(), 0);
        assert!(matches!(
            build_darcy_system(
                &Mesh::unit_square(3).unwrap(),
                Conductivity::jump(0.5).unwrap(),
                &[]
            ),
            Err(Error::OddJumpMesh(3))
        ));
    }

    #[test]
    fn biot_sizes_and_symmetry() {
        let m = Mesh::unit_square(2).unwrap();
        let s = build_biot_system(&m, 1e-3).unwrap();
        assert_eq!(s.block_sizes(), vec![50 - 26, 16 - 6, 8]);
        assert_eq!(s.size(), 42);
        assert_eq!(s.kernel_dim(), 0);
        assert!(s.matrix().asymmetry() <= 1e-12);
        let AssembledSaddleSystem::Biot(b) = &s else {
            unreachable!()
        };
        SpdFactor::from_sparse(&b.elasticity, "elasticity").unwrap();
        SpdFactor::from_sparse(&b.flux_mass, "flux mass").unwrap();
    }
}
