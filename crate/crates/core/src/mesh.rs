//! Structured triangulation of the unit square.
//!
//! The square is cut into `N x N` sub-squares of side `h = 1/N`, and each
//! sub-square is split along its lower-right to upper-left diagonal. Vertex
//! `(i, j)` sits at `(i h, j h)` and has index `j (N + 1) + i`.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryTag {
    Left,
    Right,
    Top,
    Bottom,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 4] = [
        BoundaryTag::Left,
        BoundaryTag::Right,
        BoundaryTag::Top,
        BoundaryTag::Bottom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::Left => "left",
            BoundaryTag::Right => "right",
            BoundaryTag::Top => "top",
            BoundaryTag::Bottom => "bottom",
        }
    }
}

/// Incident cells of an edge. Boundary edges have exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeCells {
    Boundary(usize),
    Interior(usize, usize),
}

impl EdgeCells {
    pub fn first(self) -> usize {
        match self {
            EdgeCells::Boundary(c) | EdgeCells::Interior(c, _) => c,
        }
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, EdgeCells::Boundary(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacetGeometry {
    pub length: f64,
    /// Unit normal pointing out of the first incident cell.
    pub normal: [f64; 2],
    pub midpoint: Point,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    n_subdivisions: usize,
    vertices: Vec<Point>,
    /// Counterclockwise vertex triples.
    cells: Vec<[usize; 3]>,
    /// `(low, high)` vertex pairs.
    edges: Vec<[usize; 2]>,
    /// Local edge `k` is opposite local vertex `k`.
    cell_edges: Vec<[usize; 3]>,
    /// +1 when the global edge normal points out of the cell.
    cell_edge_signs: Vec<[f64; 3]>,
    edge_cells: Vec<EdgeCells>,
    boundary_tags: Vec<Option<BoundaryTag>>,
}

impl Mesh {
    pub fn unit_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMesh);
        }
        let h = 1.0 / n as f64;
        let vid = |i: usize, j: usize| j * (n + 1) + i;

        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 * h, j as f64 * h]);
            }
        }

        let mut cells = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v01, v11) =
                    (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
                cells.push([v00, v10, v01]);
                cells.push([v10, v11, v01]);
            }
        }

        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::with_capacity(3 * n * n + 2 * n);
        let mut edges = Vec::with_capacity(3 * n * n + 2 * n);
        let mut incident: Vec<Vec<usize>> = Vec::with_capacity(3 * n * n + 2 * n);
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, tri) in cells.iter().enumerate() {
            let mut local = [0usize; 3];
            for (k, slot) in local.iter_mut().enumerate() {
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let key = [a.min(b), a.max(b)];
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    incident.push(Vec::with_capacity(2));
                    edges.len() - 1
                });
                incident[e].push(c);
                *slot = e;
            }
            cell_edges.push(local);
        }

        let edge_cells = incident
            .iter()
            .map(|cs| match cs.as_slice() {
                [c] => EdgeCells::Boundary(*c),
                [a, b] => EdgeCells::Interior(*a, *b),
                _ => unreachable!("edge with {} incident cells", cs.len()),
            })
            .collect::<Vec<_>>();

        let mut mesh = Mesh {
            n_subdivisions: n,
            vertices,
            cells,
            edges,
            cell_edges,
            cell_edge_signs: Vec::new(),
            edge_cells,
            boundary_tags: Vec::new(),
        };

        mesh.cell_edge_signs = (0..mesh.cells.len())
            .map(|c| {
                let centroid = mesh.centroid(c);
                let mut signs = [0.0; 3];
                for (k, s) in signs.iter_mut().enumerate() {
                    let e = mesh.cell_edges[c][k];
                    let n = mesh.edge_normal(e);
                    let mid = mesh.edge_midpoint(e);
                    let out = (mid[0] - centroid[0]) * n[0] + (mid[1] - centroid[1]) * n[1];
                    *s = if out > 0.0 { 1.0 } else { -1.0 };
                }
                signs
            })
            .collect();

        mesh.boundary_tags = (0..mesh.edges.len())
            .map(|e| {
                if !mesh.edge_cells[e].is_boundary() {
                    return None;
                }
                let [a, b] = mesh.edges[e];
                let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
                let tol = 0.25 * h;
                Some(if pa[0] < tol && pb[0] < tol {
                    BoundaryTag::Left
                } else if pa[0] > 1.0 - tol && pb[0] > 1.0 - tol {
                    BoundaryTag::Right
                } else if pa[1] < tol && pb[1] < tol {
                    BoundaryTag::Bottom
                } else {
                    BoundaryTag::Top
                })
            })
            .collect();

        Ok(mesh)
    }

    pub fn n_subdivisions(&self) -> usize {
        self.n_subdivisions
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_subdivisions as f64
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn cell_edges(&self, cell: usize) -> [usize; 3] {
        self.cell_edges[cell]
    }

    pub fn cell_edge_signs(&self, cell: usize) -> [f64; 3] {
        self.cell_edge_signs[cell]
    }

    pub fn edge_cells(&self, edge: usize) -> EdgeCells {
        self.edge_cells[edge]
    }

    pub fn boundary_tag(&self, edge: usize) -> Option<BoundaryTag> {
        self.boundary_tags[edge]
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = (usize, BoundaryTag)> + '_ {
        self.boundary_tags
            .iter()
            .enumerate()
            .filter_map(|(e, t)| t.map(|t| (e, t)))
    }

    pub fn cell_points(&self, cell: usize) -> [Point; 3] {
        let [a, b, c] = self.cells[cell];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn signed_area(&self, cell: usize) -> f64 {
        let [p0, p1, p2] = self.cell_points(cell);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    pub fn area(&self, cell: usize) -> f64 {
        self.signed_area(cell).abs()
    }

    pub fn centroid(&self, cell: usize) -> Point {
        let [p0, p1, p2] = self.cell_points(cell);
        [(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0]
    }

    /// Longest edge of the cell.
    pub fn diameter(&self, cell: usize) -> f64 {
        self.cell_edges[cell]
            .iter()
            .map(|&e| self.edge_length(e))
            .fold(0.0, f64::max)
    }

    pub fn edge_length(&self, edge: usize) -> f64 {
        let [a, b] = self.edges[edge];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        (pb[0] - pa[0]).hypot(pb[1] - pa[1])
    }

    pub fn edge_midpoint(&self, edge: usize) -> Point {
        let [a, b] = self.edges[edge];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    /// Global edge normal: the low-to-high tangent rotated clockwise.
    pub fn edge_normal(&self, edge: usize) -> [f64; 2] {
        let [a, b] = self.edges[edge];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let len = self.edge_length(edge);
        [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len]
    }

    pub fn facet_geometry(&self, edge: usize) -> Result<FacetGeometry> {
        if edge >= self.edges.len() {
            return Err(Error::OutOfRange {
                what: "edges",
                index: edge,
                len: self.edges.len(),
            });
        }
        let first = self.edge_cells[edge].first();
        let local = self.cell_edges[first]
            .iter()
            .position(|&e| e == edge)
            .expect("edge listed in its incident cell");
        let s = self.cell_edge_signs[first][local];
        let n = self.edge_normal(edge);
        Ok(FacetGeometry {
            length: self.edge_length(edge),
            normal: [s * n[0], s * n[1]],
            midpoint: self.edge_midpoint(edge),
        })
    }

    /// Plain-text dump: vertex and cell lists.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "vertices {}", self.vertices.len());
        for p in &self.vertices {
            let _ = writeln!(out, "{:.17e} {:.17e}", p[0], p[1]);
        }
        let _ = writeln!(out, "cells {}", self.cells.len());
        for c in &self.cells {
            let _ = writeln!(out, "{} {} {}", c[0], c[1], c[2]);
        }
        out
    }
}
