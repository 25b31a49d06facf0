use crate::conductivity::Conductivity;
use crate::error::{Error, Result};
use crate::linalg::{SparseMatrix, Triplets};
use crate::mesh::{BoundaryTag, EdgeCells, Mesh};
use crate::spaces::DofMap;

/// Interior-penalty Laplacian on piecewise constants,
///
/// ```text
/// sum_{E interior} |E| / avg(h) / avg(K^-1) [p][q]  +  sum_{E Dirichlet} |E| K / h p q
/// ```
///
/// with `h` the cell diameter. The volume gradient term vanishes for P0.
pub fn assemble_dg_laplacian(
    mesh: &Mesh,
    p0: &DofMap,
    field: &Conductivity,
    dirichlet: &[BoundaryTag],
) -> Result<SparseMatrix> {
    if !field.is_scalar() {
        return Err(Error::WrongConductivity {
            expected: "scalar",
            found: field.kind(),
        });
    }
    let n = p0.num_free();
    let mut t = Triplets::with_capacity(n, n, 4 * mesh.num_edges());
    for e in 0..mesh.num_edges() {
        let len = mesh.edge_length(e);
        match mesh.edge_cells(e) {
            EdgeCells::Interior(a, b) => {
                let h = 0.5 * (mesh.diameter(a) + mesh.diameter(b));
                let w = len / h * field.facet_harmonic_mean(mesh, e)?;
                let (ra, rb) = (p0.reduced_index(a), p0.reduced_index(b));
                if let Some(ra) = ra {
                    t.push(ra, ra, w);
                }
                if let Some(rb) = rb {
                    t.push(rb, rb, w);
                }
                if let (Some(ra), Some(rb)) = (ra, rb) {
                    t.push(ra, rb, -w);
                    t.push(rb, ra, -w);
                }
            }
            EdgeCells::Boundary(c) => {
                let tag = mesh.boundary_tag(e).expect("boundary edge is tagged");
                if !dirichlet.contains(&tag) {
                    continue;
                }
                if let Some(r) = p0.reduced_index(c) {
                    t.push(r, r, len * field.cell_scalar(mesh, c)? / mesh.diameter(c));
                }
            }
        }
    }
    Ok(t.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conductivity::harmonic_mean;
    use crate::linalg::{symmetric_eigenvalues, SpdFactor};
    use crate::spaces::SpaceKind;
    use approx::assert_relative_eq;

    fn p0(m: &Mesh) -> DofMap {
        DofMap::build(m, SpaceKind::P0, &[]).unwrap()
    }

    #[test]
    fn constants_in_kernel_without_dirichlet() {
        let m = Mesh::unit_square(4).unwrap();
        let l =
            assemble_dg_laplacian(&m, &p0(&m), &Conductivity::constant(1.0).unwrap(), &[]).unwrap();
        for s in l.mul_vec(&vec![1.0; m.num_cells()]) {
            assert!(s.abs() < 1e-13);
        }
        assert!(l.asymmetry() == 0.0);
    }

    #[test]
    fn smallest_nonzero_eigenvalue_is_positive() {
        let m = Mesh::unit_square(2).unwrap();
        let l =
            assemble_dg_laplacian(&m, &p0(&m), &Conductivity::constant(1.0).unwrap(), &[]).unwrap();
        let ev = symmetric_eigenvalues(l.to_dense().as_ref()).unwrap();
        assert!(ev[0].abs() < 1e-12);
        assert!(ev[1] > 1e-3, "{:?}", ev);
    }

    #[test]
    fn dirichlet_facets_make_it_definite() {
        let m = Mesh::unit_square(4).unwrap();
        let l = assemble_dg_laplacian(
            &m,
            &p0(&m),
            &Conductivity::jump(1e-3).unwrap(),
            &[BoundaryTag::Top, BoundaryTag::Bottom],
        )
        .unwrap();
        SpdFactor::from_sparse(&l, "dg").unwrap();
    }

    #[test]
    fn interface_facet_uses_harmonic_mean() {
        let m = Mesh::unit_square(2).unwrap();
        let k0 = 1e-2;
        let l = assemble_dg_laplacian(&m, &p0(&m), &Conductivity::jump(k0).unwrap(), &[]).unwrap();
        let mut seen = 0;
        for e in 0..m.num_edges() {
            let EdgeCells::Interior(a, b) = m.edge_cells(e) else {
                continue;
            };
            let (xa, xb) = (m.centroid(a)[0], m.centroid(b)[0]);
            if (xa < 0.5) != (xb < 0.5) {
                seen += 1;
                let expect = m.edge_length(e) / m.diameter(a) * harmonic_mean(1.0, k0);
                assert_relative_eq!(-l.get(a, b), expect, max_relative = 1e-14);
                assert_relative_eq!(harmonic_mean(1.0, k0), 2.0 / (1.0 + 1.0 / k0));
            }
        }
        assert_eq!(seen, 2);
    }

    #[test]
    fn rejects_tensor() {
        let m = Mesh::unit_square(2).unwrap();
        assert!(
            assemble_dg_laplacian(&m, &p0(&m), &Conductivity::tensor(0.5, 0.0).unwrap(), &[])
                .is_err()
        );
    }
}
