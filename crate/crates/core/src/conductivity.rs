//! Hydraulic conductivity models: uniform scalar, a scalar jump across
//! `x = 1/2`, and a uniform rotated anisotropic tensor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{EdgeCells, Mesh};

/// Symmetric 2x2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub fn scalar(k: f64) -> Self {
        Sym2 {
            xx: k,
            xy: 0.0,
            yy: k,
        }
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn inverse(&self) -> Sym2 {
        let d = self.det();
        Sym2 {
            xx: self.yy / d,
            xy: -self.xy / d,
            yy: self.xx / d,
        }
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let m = 0.5 * self.trace();
        let r = (0.25 * (self.xx - self.yy).powi(2) + self.xy * self.xy).sqrt();
        [m - r, m + r]
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.xx * v[0] + self.xy * v[1],
            self.xy * v[0] + self.yy * v[1],
        ]
    }

    pub fn is_scalar(&self) -> bool {
        self.xy == 0.0 && self.xx == self.yy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum Conductivity {
    /// `K` everywhere.
    Constant { k: f64 },
    /// 1 for `x < 1/2`, `k0` otherwise.
    Jump { k0: f64 },
    /// `R(theta) diag(1, k0) R(theta)^T` everywhere.
    Tensor { k0: f64, theta: f64 },
}

impl Conductivity {
    pub fn constant(k: f64) -> Result<Self> {
        Self::Constant { k }.validated()
    }

    pub fn jump(k0: f64) -> Result<Self> {
        Self::Jump { k0 }.validated()
    }

    pub fn tensor(k0: f64, theta: f64) -> Result<Self> {
        Self::Tensor { k0, theta }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let (name, v) = match self {
            Conductivity::Constant { k } => ("K", k),
            Conductivity::Jump { k0 } | Conductivity::Tensor { k0, .. } => ("K0", k0),
        };
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::InvalidConductivity(format!(
                "{name} = {v} is outside (0, 1]"
            )));
        }
        if let Conductivity::Tensor { theta, .. } = self {
            if !theta.is_finite() {
                return Err(Error::InvalidConductivity(format!("theta = {theta}")));
            }
        }
        Ok(self)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Conductivity::Constant { .. } => "constant",
            Conductivity::Jump { .. } => "jump",
            Conductivity::Tensor { .. } => "tensor",
        }
    }

    pub fn is_scalar(&self) -> bool {
        !matches!(self, Conductivity::Tensor { .. })
    }

    /// Magnitude parameter: `K` or `K0`.
    pub fn magnitude(&self) -> f64 {
        match *self {
            Conductivity::Constant { k } => k,
            Conductivity::Jump { k0 } | Conductivity::Tensor { k0, .. } => k0,
        }
    }

    /// Scalar conductivity of a cell. Errors for the tensor model.
    pub fn cell_scalar(&self, mesh: &Mesh, cell: usize) -> Result<f64> {
        match *self {
            Conductivity::Constant { k } => Ok(k),
            Conductivity::Jump { k0 } => Ok(if mesh.centroid(cell)[0] < 0.5 {
                1.0
            } else {
                k0
            }),
            Conductivity::Tensor { .. } => Err(Error::WrongConductivity {
                expected: "scalar",
                found: "tensor",
            }),
        }
    }

    pub fn cell_value(&self, mesh: &Mesh, cell: usize) -> Sym2 {
        match *self {
            Conductivity::Tensor { k0, theta } => {
                let (s, c) = theta.sin_cos();
                Sym2 {
                    xx: c * c + k0 * s * s,
                    xy: c * s * (1.0 - k0),
                    yy: s * s + k0 * c * c,
                }
            }
            _ => Sym2::scalar(self.cell_scalar(mesh, cell).expect("scalar variant")),
        }
    }

    /// `1 / avg(K^-1)` over the two cells sharing an interior edge.
    pub fn facet_harmonic_mean(&self, mesh: &Mesh, edge: usize) -> Result<f64> {
        if edge >= mesh.num_edges() {
            return Err(Error::OutOfRange {
                what: "edges",
                index: edge,
                len: mesh.num_edges(),
            });
        }
        match mesh.edge_cells(edge) {
            EdgeCells::Boundary(_) => Err(Error::BoundaryFacet(edge)),
            EdgeCells::Interior(a, b) => Ok(harmonic_mean(
                self.cell_scalar(mesh, a)?,
                self.cell_scalar(mesh, b)?,
            )),
        }
    }

    /// `k = 1 / sum_i lambda_i(K)^-1`, the scalar pressure weight for the
    /// tensor model.
    pub fn tensor_pressure_scalar(&self) -> Result<f64> {
        match *self {
            Conductivity::Tensor { k0, .. } => Ok(k0 / (1.0 + k0)),
            other => Err(Error::WrongConductivity {
                expected: "tensor",
                found: other.kind(),
            }),
        }
    }
}

pub fn harmonic_mean(a: f64, b: f64) -> f64 {
    2.0 / (1.0 / a + 1.0 / b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn constant_value() {
        let m = Mesh::unit_square(2).unwrap();
        let k = Conductivity::constant(1e-4).unwrap();
        for c in 0..m.num_cells() {
            assert_eq!(k.cell_value(&m, c), Sym2::scalar(1e-4));
        }
    }

    #[test]
    fn jump_by_centroid() {
        let m = Mesh::unit_square(2).unwrap();
        let k = Conductivity::jump(1e-2).unwrap();
        for c in 0..m.num_cells() {
            let x = m.centroid(c)[0];
            let expect = if x < 0.5 { 1.0 } else { 1e-2 };
            assert_eq!(k.cell_value(&m, c), Sym2::scalar(expect));
        }
    }

    #[test]
    fn rotated_tensor_at_quarter_turn() {
        let m = Mesh::unit_square(1).unwrap();
        let k0 = 1e-4;
        let t = Conductivity::tensor(k0, FRAC_PI_4)
            .unwrap()
            .cell_value(&m, 0);
        assert_relative_eq!(t.xx, (1.0 + k0) / 2.0, max_relative = 1e-14);
        assert_relative_eq!(t.yy, (1.0 + k0) / 2.0, max_relative = 1e-14);
        assert_relative_eq!(t.xy, (1.0 - k0) / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn harmonic_mean_examples() {
        assert_relative_eq!(harmonic_mean(0.3, 0.3), 0.3);
        assert_relative_eq!(harmonic_mean(1.0, 1e-2), 2.0 / 101.0);
        assert_relative_eq!(2.0 / 101.0, 1.9802e-2, max_relative = 1e-4);

        let m = Mesh::unit_square(2).unwrap();
        let k = Conductivity::jump(1.0).unwrap();
        for e in 0..m.num_edges() {
            match m.edge_cells(e) {
                EdgeCells::Interior(..) => assert_eq!(k.facet_harmonic_mean(&m, e).unwrap(), 1.0),
                EdgeCells::Boundary(_) => {
                    assert!(matches!(
                        k.facet_harmonic_mean(&m, e),
                        Err(Error::BoundaryFacet(_))
                    ))
                }
            }
        }
    }

    #[test]
    fn tensor_scalar() {
        assert_relative_eq!(
            Conductivity::tensor(1.0, 0.0)
                .unwrap()
                .tensor_pressure_scalar()
                .unwrap(),
            0.5
        );
        let k = Conductivity::tensor(1e-2, 0.0)
            .unwrap()
            .tensor_pressure_scalar()
            .unwrap();
        assert_relative_eq!(k, 1e-2 / 1.01, max_relative = 1e-15);
        assert_relative_eq!(k, 9.901e-3, max_relative = 1e-4);
        assert_eq!(
            Conductivity::tensor(1e-2, FRAC_PI_4)
                .unwrap()
                .tensor_pressure_scalar()
                .unwrap(),
            k
        );
        assert!(Conductivity::constant(0.5)
            .unwrap()
            .tensor_pressure_scalar()
            .is_err());
    }

    #[test]
    fn rejects_out_of_regime() {
        assert!(Conductivity::constant(0.0).is_err());
        assert!(Conductivity::constant(1.5).is_err());
        assert!(Conductivity::jump(-1.0).is_err());
        assert!(Conductivity::tensor(0.5, f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn tensor_is_spd_with_expected_spectrum(k0 in 1e-8f64..=1.0, theta in -4.0f64..4.0) {
            let m = Mesh::unit_square(1).unwrap();
            let t = Conductivity::tensor(k0, theta).unwrap().cell_value(&m, 0);
            let [lo, hi] = t.eigenvalues();
            prop_assert!((lo - k0).abs() <= 1e-12 && (hi - 1.0).abs() <= 1e-12);
            prop_assert!(t.xx > 0.0 && t.det() > 0.0);
        }

        #[test]
        fn harmonic_mean_bounds(a in 1e-8f64..=1.0, b in 1e-8f64..=1.0) {
            let hm = harmonic_mean(a, b);
            prop_assert!(hm >= a.min(b) * (1.0 - 1e-14));
            prop_assert!(hm <= a.max(b) * (1.0 + 1e-14));
            prop_assert!(hm <= 0.5 * (a + b) * (1.0 + 1e-14));
        }

        #[test]
        fn tensor_scalar_ignores_rotation(k0 in 1e-8f64..=1.0, theta in -4.0f64..4.0) {
            let a = Conductivity::tensor(k0, theta).unwrap().tensor_pressure_scalar().unwrap();
            let b = Conductivity::tensor(k0, 0.0).unwrap().tensor_pressure_scalar().unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
