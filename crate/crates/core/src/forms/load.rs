use super::AssembledSaddleSystem;
use crate::mesh::Mesh;
use crate::spaces::{reference_basis, CellGeometry, DofMap, SpaceKind};

/// `(f, w)` for a constant vector `f` over an RT0 or vector P2 space, or
/// `(f[0], q)` over P0. Reduced numbering.
pub fn constant_load(mesh: &Mesh, space: &DofMap, f: [f64; 2]) -> Vec<f64> {
    let mut out = vec![0.0; space.num_free()];
    for c in 0..mesh.num_cells() {
        let geom = CellGeometry::of(mesh, c);
        let basis = reference_basis(space.kind(), &geom, [1.0; 3]);
        for (i, &(g, sign)) in space.cell_dofs(c).iter().enumerate() {
            let Some(r) = space.reduced_index(g) else {
                continue;
            };
            let v: f64 = match space.kind() {
                SpaceKind::P0 => geom.area * f[0],
                _ => (0..3)
                    .map(|q| {
                        let phi = basis.values[q][i];
                        basis.weights[q] * (phi[0] * f[0] + phi[1] * f[1])
                    })
                    .sum(),
            };
            out[r] += sign * v;
        }
    }
    out
}

/// Right-hand side from constant unit data in every field. The pressure
/// source is dropped when constants span the kernel so the system stays
/// consistent.
pub fn manufactured_rhs(system: &AssembledSaddleSystem) -> Vec<f64> {
    let ones = [1.0, 1.0];
    let source = if system.kernel_dim() > 0 {
        [0.0; 2]
    } else {
        ones
    };
    match system {
        AssembledSaddleSystem::Darcy(d) => {
            let mut rhs = constant_load(&d.mesh, &d.flux, ones);
            rhs.extend(constant_load(&d.mesh, &d.pressure, source));
            rhs
        }
        AssembledSaddleSystem::Biot(b) => {
            let mut rhs = constant_load(&b.mesh, &b.displacement, ones);
            rhs.extend(constant_load(&b.mesh, &b.flux, ones));
            rhs.extend(constant_load(&b.mesh, &b.pressure, source));
            rhs
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn p0_and_p2_loads_integrate_the_constant() {
        let m = Mesh::unit_square(3).unwrap();
        let p0 = DofMap::build(&m, SpaceKind::P0, &[]).unwrap();
        assert_relative_eq!(
            constant_load(&m, &p0, [1.0, 0.0]).iter().sum::<f64>(),
            1.0,
            max_relative = 1e-14
        );
        // P2 functions sum to one, so the x-component loads sum to |Omega|.
        let p2 = DofMap::build(&m, SpaceKind::P2Vec, &[]).unwrap();
        let l = constant_load(&m, &p2, [1.0, 0.0]);
        let sx: f64 = l.iter().step_by(2).sum();
        let sy: f64 = l.iter().skip(1).step_by(2).sum();
        assert_relative_eq!(sx, 1.0, max_relative = 1e-13);
        assert!(sy.abs() < 1e-14);
    }

    #[test]
    fn rt0_load_is_flux_of_constant_field() {
        // For constant f the RT0 interpolant is exact, so (f, phi_e) is the
        // mass matrix applied to the normal components f . n_e.
        let m = Mesh::unit_square(2).unwrap();
        let rt = DofMap::build(&m, SpaceKind::Rt0, &[]).unwrap();
        let f = [0.3, -0.7];
        let mass = super::super::assemble_velocity_mass(
            &m,
            &rt,
            &crate::Conductivity::constant(1.0).unwrap(),
        );
        let flux: Vec<f64> = (0..m.num_edges())
            .map(|e| {
                let n = m.edge_normal(e);
                f[0] * n[0] + f[1] * n[1]
            })
            .collect();
        let expect = mass.mul_vec(&flux);
        for (a, b) in constant_load(&m, &rt, f).iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
