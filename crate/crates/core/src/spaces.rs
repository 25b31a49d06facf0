//! Degree-of-freedom maps and element bases for lowest-order Raviart-Thomas
//! fluxes, piecewise-constant pressures and continuous vector P2
//! displacements.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Rt0,
    P0,
    /// Two-component continuous quadratic Lagrange. Nodes are the mesh
    /// vertices followed by the edge midpoints; dof `2 * node + component`.
    P2Vec,
}

#[derive(Debug, Clone)]
pub struct DofMap {
    kind: SpaceKind,
    total: usize,
    /// Per cell local dofs as `(global dof, sign)`.
    cell_dofs: Vec<Vec<(usize, f64)>>,
    constrained: Vec<bool>,
    /// Position of each dof in the reduced (unconstrained) numbering.
    reduced: Vec<Option<usize>>,
    n_free: usize,
}

impl DofMap {
    pub fn build(mesh: &Mesh, kind: SpaceKind, essential: &[BoundaryTag]) -> Result<Self> {
        let tags: BTreeSet<BoundaryTag> = essential.iter().copied().collect();
        let nv = mesh.num_vertices();
        let (total, cell_dofs): (usize, Vec<Vec<(usize, f64)>>) = match kind {
            SpaceKind::Rt0 => (
                mesh.num_edges(),
                (0..mesh.num_cells())
                    .map(|c| {
                        let edges = mesh.cell_edges(c);
                        let signs = mesh.cell_edge_signs(c);
                        (0..3).map(|k| (edges[k], signs[k])).collect()
                    })
                    .collect(),
            ),
            SpaceKind::P0 => {
                if !tags.is_empty() {
                    return Err(Error::ConstrainedP0);
                }
                (
                    mesh.num_cells(),
                    (0..mesh.num_cells()).map(|c| vec![(c, 1.0)]).collect(),
                )
            }
            SpaceKind::P2Vec => (
                2 * (nv + mesh.num_edges()),
                (0..mesh.num_cells())
                    .map(|c| {
                        let nodes = mesh.cells()[c]
                            .iter()
                            .copied()
                            .chain(mesh.cell_edges(c).into_iter().map(|e| nv + e));
                        nodes
                            .flat_map(|node| [(2 * node, 1.0), (2 * node + 1, 1.0)])
                            .collect()
                    })
                    .collect(),
            ),
        };

        let mut constrained = vec![false; total];
        for (e, tag) in mesh.boundary_edges() {
            if !tags.contains(&tag) {
                continue;
            }
            match kind {
                SpaceKind::Rt0 => constrained[e] = true,
                SpaceKind::P0 => unreachable!(),
                SpaceKind::P2Vec => {
                    let [a, b] = mesh.edges()[e];
                    for node in [a, b, nv + e] {
                        constrained[2 * node] = true;
                        constrained[2 * node + 1] = true;
                    }
                }
            }
        }

        let mut n_free = 0;
        let reduced = constrained
            .iter()
            .map(|&fixed| {
                (!fixed).then(|| {
                    n_free += 1;
                    n_free - 1
                })
            })
            .collect();

        Ok(DofMap {
            kind,
            total,
            cell_dofs,
            constrained,
            reduced,
            n_free,
        })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn total_dofs(&self) -> usize {
        self.total
    }

    pub fn num_free(&self) -> usize {
        self.n_free
    }

    pub fn cell_dofs(&self, cell: usize) -> &[(usize, f64)] {
        &self.cell_dofs[cell]
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained[dof]
    }

    pub fn constrained_dofs(&self) -> Vec<usize> {
        (0..self.total).filter(|&d| self.constrained[d]).collect()
    }

    pub fn reduced_index(&self, dof: usize) -> Option<usize> {
        self.reduced[dof]
    }

    /// Scatter a reduced vector back to all dofs, zero on constrained ones.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        self.reduced
            .iter()
            .map(|r| r.map_or(0.0, |i| reduced[i]))
            .collect()
    }
}

/// Degree-2 exact three-point rule in barycentric coordinates, weights
/// relative to the cell area.
pub const QUAD_BARY: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];
pub const QUAD_WEIGHT: f64 = 1.0 / 3.0;

/// Affine triangle data.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub points: [Point; 3],
    pub area: f64,
    /// Gradients of the barycentric coordinates.
    pub grad_bary: [[f64; 2]; 3],
}

impl CellGeometry {
    pub fn new(points: [Point; 3]) -> Self {
        let [p0, p1, p2] = points;
        let area2 = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let mut grad_bary = [[0.0; 2]; 3];
        for (i, g) in grad_bary.iter_mut().enumerate() {
            let (a, b) = (points[(i + 1) % 3], points[(i + 2) % 3]);
            *g = [-(b[1] - a[1]) / area2, (b[0] - a[0]) / area2];
        }
        CellGeometry {
            points,
            area: 0.5 * area2.abs(),
            grad_bary,
        }
    }

    pub fn of(mesh: &Mesh, cell: usize) -> Self {
        Self::new(mesh.cell_points(cell))
    }

    pub fn map(&self, bary: [f64; 3]) -> Point {
        let mut x = [0.0; 2];
        for (l, p) in bary.iter().zip(&self.points) {
            x[0] += l * p[0];
            x[1] += l * p[1];
        }
        x
    }

    pub fn quadrature_points(&self) -> [Point; 3] {
        QUAD_BARY.map(|b| self.map(b))
    }

    /// Length of the local edge opposite vertex `k`.
    pub fn edge_length(&self, k: usize) -> f64 {
        let (a, b) = (self.points[(k + 1) % 3], self.points[(k + 2) % 3]);
        (b[0] - a[0]).hypot(b[1] - a[1])
    }
}

/// RT0 function of local edge `k` with unit outward normal component on
/// that edge (so its flux is `|e_k|`):
/// `|e_k| / (2|T|) (x - p_k)`.
pub fn rt0_value(geom: &CellGeometry, k: usize, x: Point) -> [f64; 2] {
    let c = geom.edge_length(k) / (2.0 * geom.area);
    let p = geom.points[k];
    [c * (x[0] - p[0]), c * (x[1] - p[1])]
}

/// Divergence of the outward-normalized RT0 function of local edge `k`.
pub fn rt0_divergence(geom: &CellGeometry, k: usize) -> f64 {
    geom.edge_length(k) / geom.area
}

/// Local P2 node order: three vertices, then the midpoints of the edges
/// opposite vertex 0, 1, 2.
pub fn p2_values(bary: [f64; 3]) -> [f64; 6] {
    let l = bary;
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
        4.0 * l[0] * l[1],
    ]
}

pub fn p2_gradients(geom: &CellGeometry, bary: [f64; 3]) -> [[f64; 2]; 6] {
    let l = bary;
    let g = geom.grad_bary;
    let comb =
        |a: f64, ga: [f64; 2], b: f64, gb: [f64; 2]| [a * ga[0] + b * gb[0], a * ga[1] + b * gb[1]];
    [
        comb(4.0 * l[0] - 1.0, g[0], 0.0, g[0]),
        comb(4.0 * l[1] - 1.0, g[1], 0.0, g[1]),
        comb(4.0 * l[2] - 1.0, g[2], 0.0, g[2]),
        comb(4.0 * l[2], g[1], 4.0 * l[1], g[2]),
        comb(4.0 * l[0], g[2], 4.0 * l[2], g[0]),
        comb(4.0 * l[1], g[0], 4.0 * l[0], g[1]),
    ]
}

/// A cell basis tabulated at the three quadrature points.
#[derive(Debug, Clone)]
pub struct EvaluatedBasis {
    pub kind: SpaceKind,
    pub points: [Point; 3],
    /// Physical weights (sum to the cell area).
    pub weights: [f64; 3],
    /// `values[q][i]` for local function `i`; scalar spaces use component 0.
    /// Vector P2 functions are ordered `2 * node + component`.
    pub values: Vec<Vec<[f64; 2]>>,
    /// RT0 divergences (one per local function, constant on the cell).
    pub divergence: Vec<f64>,
    /// Scalar P2 gradients `gradients[q][node]`.
    pub gradients: Vec<Vec<[f64; 2]>>,
}

/// Tabulate the basis of `kind` on a cell. RT0 functions carry the given
/// orientation signs.
pub fn reference_basis(kind: SpaceKind, geom: &CellGeometry, signs: [f64; 3]) -> EvaluatedBasis {
    let points = geom.quadrature_points();
    let weights = [QUAD_WEIGHT * geom.area; 3];
    let mut values = Vec::with_capacity(3);
    let mut gradients = Vec::new();
    let mut divergence = Vec::new();
    match kind {
        SpaceKind::Rt0 => {
            for x in points {
                values.push(
                    (0..3)
                        .map(|k| {
                            let v = rt0_value(geom, k, x);
                            [signs[k] * v[0], signs[k] * v[1]]
                        })
                        .collect(),
                );
            }
            divergence = (0..3).map(|k| signs[k] * rt0_divergence(geom, k)).collect();
        }
        SpaceKind::P0 => values = vec![vec![[1.0, 0.0]]; 3],
        SpaceKind::P2Vec => {
            for b in QUAD_BARY {
                let phi = p2_values(b);
                values.push(phi.iter().flat_map(|&v| [[v, 0.0], [0.0, v]]).collect());
                gradients.push(p2_gradients(geom, b).to_vec());
            }
        }
    }
    EvaluatedBasis {
        kind,
        points,
        weights,
        values,
        divergence,
        gradients,
    }
}
