use super::{assemble_cells, scatter};
use crate::conductivity::Conductivity;
use crate::linalg::{SparseMatrix, Triplets};
use crate::mesh::Mesh;
use crate::spaces::{reference_basis, CellGeometry, DofMap, SpaceKind};

/// `(K^-1 phi_i, phi_j)` over the RT0 space.
pub fn assemble_velocity_mass(mesh: &Mesh, rt: &DofMap, field: &Conductivity) -> SparseMatrix {
    let n = rt.num_free();
    assemble_cells(n, n, mesh.num_cells(), |c, t| {
        let geom = CellGeometry::of(mesh, c);
        let basis = reference_basis(SpaceKind::Rt0, &geom, [1.0; 3]);
        let kinv = field.cell_value(mesh, c).inverse();
        let mut local = [[0.0; 3]; 3];
        for q in 0..3 {
            let w = basis.weights[q];
            for i in 0..3 {
                let ki = kinv.apply(basis.values[q][i]);
                for j in 0..3 {
                    let vj = basis.values[q][j];
                    local[i][j] += w * (ki[0] * vj[0] + ki[1] * vj[1]);
                }
            }
        }
        let dofs = rt.cell_dofs(c);
        scatter(t, rt, dofs, rt, dofs, |i, j| local[i][j]);
    })
}

/// `(div phi_e, q_T)`: entry `sign * |e|` for each edge of each cell.
pub fn assemble_div(mesh: &Mesh, rt: &DofMap, p0: &DofMap) -> SparseMatrix {
    assemble_cells(p0.num_free(), rt.num_free(), mesh.num_cells(), |c, t| {
        let geom = CellGeometry::of(mesh, c);
        scatter(t, p0, p0.cell_dofs(c), rt, rt.cell_dofs(c), |_, j| {
            geom.edge_length(j)
        });
    })
}

/// `(div(W phi_i), div phi_j)` where `W = K^-1` when a field is given and
/// the identity otherwise. On each cell `div(W phi) = tr(W) div(phi) / 2`
/// for the affine RT0 functions.
pub fn assemble_divdiv(mesh: &Mesh, rt: &DofMap, weight: Option<&Conductivity>) -> SparseMatrix {
    let n = rt.num_free();
    assemble_cells(n, n, mesh.num_cells(), |c, t| {
        let geom = CellGeometry::of(mesh, c);
        let factor = weight.map_or(1.0, |f| 0.5 * f.cell_value(mesh, c).inverse().trace());
        let div: Vec<f64> = (0..3)
            .map(|k| crate::spaces::rt0_divergence(&geom, k))
            .collect();
        let dofs = rt.cell_dofs(c);
        scatter(t, rt, dofs, rt, dofs, |i, j| {
            factor * geom.area * div[i] * div[j]
        });
    })
}

/// Diagonal P0 mass, entries `|T|`.
pub fn assemble_p0_mass(mesh: &Mesh, p0: &DofMap) -> SparseMatrix {
    let mut t = Triplets::with_capacity(p0.num_free(), p0.num_free(), mesh.num_cells());
    for c in 0..mesh.num_cells() {
        if let Some(r) = p0.reduced_index(c) {
            t.push(r, r, mesh.area(c));
        }
    }
    t.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SpdFactor;
    use crate::mesh::BoundaryTag;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    fn maps(n: usize, tags: &[BoundaryTag]) -> (Mesh, DofMap, DofMap) {
        let m = Mesh::unit_square(n).unwrap();
        let rt = DofMap::build(&m, SpaceKind::Rt0, tags).unwrap();
        let p0 = DofMap::build(&m, SpaceKind::P0, &[]).unwrap();
        (m, rt, p0)
    }

    fn rel_diff(a: &SparseMatrix, b: &SparseMatrix) -> f64 {
        a.lin_comb(1.0, b, -1.0).unwrap().max_abs() / a.max_abs().max(b.max_abs())
    }

    #[test]
    fn diagonal_flux_mass_on_single_square() {
        // The diagonal's RT0 function on T1 = (0,0),(1,0),(0,1) is
        // (x, y) * sqrt(2) / (2 * 1/2) up to sign; on T2 = (1,0),(1,1),(0,1)
        // it is (x - 1, y - 1) * sqrt(2). Symbolically
        //   int_T1 2 (x^2 + y^2) = 2 (1/12 + 1/12) = 1/3
        // and the same on T2, so the diagonal entry is 2/3.
        let (m, rt, _) = maps(1, &[]);
        let mass = assemble_velocity_mass(&m, &rt, &Conductivity::constant(1.0).unwrap());
        let diag_edge = (0..m.num_edges())
            .find(|&e| !m.edge_cells(e).is_boundary())
            .unwrap();
        assert_relative_eq!(
            mass.get(diag_edge, diag_edge),
            2.0 / 3.0,
            max_relative = 1e-14
        );
        assert!(mass.asymmetry() <= 1e-14);
    }

    #[test]
    fn scalar_and_identity_weights() {
        let (m, rt, _) = maps(3, &BoundaryTag::ALL);
        let unit = assemble_velocity_mass(&m, &rt, &Conductivity::constant(1.0).unwrap());
        let k = 1e-3;
        let weighted = assemble_velocity_mass(&m, &rt, &Conductivity::constant(k).unwrap());
        assert!(rel_diff(&weighted, &unit.scaled(1.0 / k)) <= 1e-13);
        let tensor = assemble_velocity_mass(&m, &rt, &Conductivity::tensor(1.0, 0.0).unwrap());
        assert!(rel_diff(&tensor, &unit) <= 1e-14);
        SpdFactor::from_sparse(&unit, "mass").unwrap();
        let rotated =
            assemble_velocity_mass(&m, &rt, &Conductivity::tensor(1e-4, FRAC_PI_4).unwrap());
        assert!(rotated.asymmetry() <= 1e-12);
        SpdFactor::from_sparse(&rotated, "tensor mass").unwrap();
    }

    #[test]
    fn div_structure() {
        let (m, rt, p0) = maps(2, &[]);
        let b = assemble_div(&m, &rt, &p0);
        for c in 0..m.num_cells() {
            let row: Vec<_> = b.row(c).collect();
            assert_eq!(row.len(), 3);
            for (e, v) in row {
                assert_relative_eq!(v.abs(), m.edge_length(e), max_relative = 1e-14);
            }
        }
        let (m4, rt4, p04) = maps(4, &[]);
        let b4 = assemble_div(&m4, &rt4, &p04);
        let axis = |m: &Mesh, b: &SparseMatrix| {
            (0..m.num_cells())
                .flat_map(|c| b.row(c).collect::<Vec<_>>())
                .filter(|&(e, _)| {
                    let [a, bb] = m.edges()[e];
                    let (pa, pb) = (m.vertices()[a], m.vertices()[bb]);
                    pa[0] == pb[0] || pa[1] == pb[1]
                })
                .map(|(_, v)| v.abs())
                .fold(0.0, f64::max)
        };
        assert_relative_eq!(axis(&m4, &b4), 0.5 * axis(&m, &b), max_relative = 1e-14);
    }

    #[test]
    fn curl_of_vertex_hat_is_divergence_free() {
        // The RT0 interpolant of curl(phi_v) for an interior vertex hat has
        // edge fluxes +-1, i.e. coefficients +-1/|e|, on the six edges
        // around v and is divergence-free.
        let (m, rt, p0) = maps(2, &[]);
        let b = assemble_div(&m, &rt, &p0);
        let v = 4; // centre vertex (1/2, 1/2)
        let mut u = vec![0.0; m.num_edges()];
        for e in 0..m.num_edges() {
            let [a, bb] = m.edges()[e];
            if a == v || bb == v {
                // curl(phi) . n = grad(phi) . t with t = n rotated by +90 degrees,
                // so the flux is phi(end) - phi(start) walking along t
                let other = if a == v { bb } else { a };
                let n = m.edge_normal(e);
                let t = [-n[1], n[0]];
                let pv = m.vertices()[v];
                let po = m.vertices()[other];
                let along = (po[0] - pv[0]) * t[0] + (po[1] - pv[1]) * t[1];
                u[e] = (if along > 0.0 { -1.0 } else { 1.0 }) / m.edge_length(e);
            }
        }
        let div = b.mul_vec(&u);
        for d in div {
            assert!(d.abs() < 1e-14, "{d}");
        }
    }

    #[test]
    fn divdiv_is_bt_mp_inverse_b() {
        let (m, rt, p0) = maps(4, &BoundaryTag::ALL);
        let d = assemble_divdiv(&m, &rt, None);
        let b = assemble_div(&m, &rt, &p0);
        let mp = assemble_p0_mass(&m, &p0);
        let inv = SparseMatrix::diagonal(&mp.diag().iter().map(|v| 1.0 / v).collect::<Vec<_>>());
        let bt = b.transpose().to_dense();
        let oracle = &bt * inv.to_dense() * b.to_dense();
        let dd = d.to_dense();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..dd.nrows() {
            for j in 0..dd.ncols() {
                worst = worst.max((dd[(i, j)] - oracle[(i, j)]).abs());
                scale = scale.max(oracle[(i, j)].abs());
            }
        }
        assert!(worst <= 1e-12 * scale);
    }

    #[test]
    fn weighted_divdiv_scaling() {
        let (m, rt, _) = maps(3, &BoundaryTag::ALL);
        let d = assemble_divdiv(&m, &rt, None);
        let id = assemble_divdiv(&m, &rt, Some(&Conductivity::tensor(1.0, 0.3).unwrap()));
        assert!(rel_diff(&id, &d) <= 1e-14);
        // K = c I: div(K^-1 u) = div(u) / c, one power of c
        let c = 0.25;
        let scaled = assemble_divdiv(&m, &rt, Some(&Conductivity::constant(c).unwrap()));
        assert!(rel_diff(&scaled, &d.scaled(1.0 / c)) <= 1e-14);
    }

    #[test]
    fn p0_mass_diagonal() {
        let (m, _, p0) = maps(4, &[]);
        let mp = assemble_p0_mass(&m, &p0);
        assert_eq!(mp.nnz(), 32);
        assert_relative_eq!(mp.diag().iter().sum::<f64>(), 1.0, max_relative = 1e-14);
        for v in mp.diag() {
            assert_relative_eq!(v, 2f64.powi(-5), max_relative = 1e-14);
        }
        SpdFactor::from_sparse(&mp, "p0").unwrap();
    }
}
