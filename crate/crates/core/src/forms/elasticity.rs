use super::{assemble_cells, scatter};
use crate::linalg::SparseMatrix;
use crate::mesh::Mesh;
use crate::spaces::{reference_basis, rt0_divergence, CellGeometry, DofMap, SpaceKind};

/// Symmetric gradient of the vector P2 function `2 * node + comp` at a
/// quadrature point.
fn strain(grad: &[[f64; 2]], local: usize) -> [[f64; 2]; 2] {
    let (node, comp) = (local / 2, local % 2);
    let g = grad[node];
    let mut du = [[0.0; 2]; 2];
    du[comp] = g;
    [
        [du[0][0], 0.5 * (du[0][1] + du[1][0])],
        [0.5 * (du[0][1] + du[1][0]), du[1][1]],
    ]
}

/// `(2 eps(u), eps(w))` over the vector P2 space.
pub fn assemble_elasticity(mesh: &Mesh, p2: &DofMap) -> SparseMatrix {
    let n = p2.num_free();
    assemble_cells(n, n, mesh.num_cells(), |c, t| {
        let geom = CellGeometry::of(mesh, c);
        let basis = reference_basis(SpaceKind::P2Vec, &geom, [1.0; 3]);
        let mut local = [[0.0; 12]; 12];
        for q in 0..3 {
            let eps: Vec<_> = (0..12).map(|i| strain(&basis.gradients[q], i)).collect();
            for i in 0..12 {
                for j in i..12 {
                    let mut dd = 0.0;
                    for a in 0..2 {
                        for b in 0..2 {
                            dd += eps[i][a][b] * eps[j][a][b];
                        }
                    }
                    local[i][j] += 2.0 * basis.weights[q] * dd;
                }
            }
        }
        for i in 0..12 {
            for j in 0..i {
                local[i][j] = local[j][i];
            }
        }
        let dofs = p2.cell_dofs(c);
        scatter(t, p2, dofs, p2, dofs, |i, j| local[i][j]);
    })
}

/// `(div w_i, q_T)` for `w` in the RT0 or vector P2 space; pressure rows.
pub fn assemble_coupling(mesh: &Mesh, space: &DofMap, p0: &DofMap) -> SparseMatrix {
    assemble_cells(p0.num_free(), space.num_free(), mesh.num_cells(), |c, t| {
        let geom = CellGeometry::of(mesh, c);
        let local: Vec<f64> = match space.kind() {
            SpaceKind::Rt0 => (0..3)
                .map(|k| geom.area * rt0_divergence(&geom, k))
                .collect(),
            SpaceKind::P2Vec => {
                let basis = reference_basis(SpaceKind::P2Vec, &geom, [1.0; 3]);
                (0..12)
                    .map(|i| {
                        (0..3)
                            .map(|q| basis.weights[q] * basis.gradients[q][i / 2][i % 2])
                            .sum()
                    })
                    .collect()
            }
            SpaceKind::P0 => panic!("coupling needs a vector space"),
        };
        scatter(t, p0, p0.cell_dofs(c), space, space.cell_dofs(c), |_, j| {
            local[j]
        });
    })
}
