//! Structured triangulations of the reference cell `Y = ]0,1[^2` with
//! periodic node identification.

use crate::error::{Error, Result};
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadRule {
    /// One point per triangle, at the barycenter.
    Barycenter,
}

#[derive(Clone, Debug)]
pub struct CellMesh {
    pub n: usize,
    /// `(n+1)^2` grid nodes, id `i*(n+1)+j`, the first coordinate fastest.
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Canonical representative per node under periodic identification.
    pub master_of: Vec<usize>,
    /// Right-edge node identified with its left-edge master, rows 0..n-1.
    pub lr_pairs: Vec<(usize, usize)>,
    /// Top-edge node identified with its bottom-edge master, columns 0..n-1.
    pub bt_pairs: Vec<(usize, usize)>,
    pub quadrature: QuadRule,
}

impl CellMesh {
    pub fn node_id(&self, i: usize, j: usize) -> usize {
        i * (self.n + 1) + j
    }

    /// Number of independent periodic DOFs (`n^2`).
    pub fn master_count(&self) -> usize {
        self.n * self.n
    }

    pub fn triangle_area(&self, t: &[usize; 3]) -> f64 {
        let (p, q, r) = (self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
    }

    /// Copies master values onto identified slave nodes.
    pub fn periodize(&self, field: &mut [f64]) {
        for v in 0..field.len() {
            field[v] = field[self.master_of[v]];
        }
    }
}

/// Uniform `n x n` triangulation of the unit cell with periodic pairing.
pub fn build_cell_mesh(n: usize) -> Result<CellMesh> {
    if n < 4 {
        return Err(Error::Validation(alloc::format!(
            "cell mesh needs n >= 4, got {n}"
        )));
    }
    let stride = n + 1;
    let mut nodes = Vec::with_capacity(stride * stride);
    for i in 0..stride {
        for j in 0..stride {
            nodes.push([j as f64 / n as f64, i as f64 / n as f64]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            let a = i * stride + j;
            let b = i * stride + j + 1;
            let c = (i + 1) * stride + j + 1;
            let d = (i + 1) * stride + j;
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let mut master_of = Vec::with_capacity(stride * stride);
    for i in 0..stride {
        for j in 0..stride {
            master_of.push((i % n) * stride + (j % n));
        }
    }
    let lr_pairs = (0..n).map(|i| (i * stride + n, i * stride)).collect();
    let bt_pairs = (0..n).map(|j| (n * stride + j, j)).collect();
    Ok(CellMesh {
        n,
        nodes,
        triangles,
        master_of,
        lr_pairs,
        bt_pairs,
        quadrature: QuadRule::Barycenter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_for_n4() {
        let cell = build_cell_mesh(4).unwrap();
        assert_eq!(cell.nodes.len(), 25);
        assert_eq!(cell.triangles.len(), 32);
        assert_eq!(cell.lr_pairs.len(), 4);
        assert_eq!(cell.bt_pairs.len(), 4);
        assert_eq!(cell.master_count(), 16);
        assert!(build_cell_mesh(3).is_err());
    }

    #[test]
    fn total_area_is_one() {
        let cell = build_cell_mesh(6).unwrap();
        let total: f64 = cell.triangles.iter().map(|t| cell.triangle_area(t)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pairs_offset_by_unit_vectors() {
        let cell = build_cell_mesh(5).unwrap();
        for &(slave, master) in &cell.lr_pairs {
            let (s, m) = (cell.nodes[slave], cell.nodes[master]);
            assert_eq!(s[0] - m[0], 1.0);
            assert_eq!(s[1], m[1]);
        }
        for &(slave, master) in &cell.bt_pairs {
            let (s, m) = (cell.nodes[slave], cell.nodes[master]);
            assert_eq!(s[1] - m[1], 1.0);
            assert_eq!(s[0], m[0]);
        }
        // pairing is a bijection between opposite edges with no fixed points
        for &(slave, master) in cell.lr_pairs.iter().chain(&cell.bt_pairs) {
            assert_ne!(slave, master);
            assert_eq!(cell.master_of[slave], master);
            assert_eq!(cell.master_of[master], master);
        }
        // far corner resolves to the origin through composition
        let far = cell.node_id(5, 5);
        assert_eq!(cell.master_of[far], cell.node_id(0, 0));
    }

    #[test]
    fn periodize_transports_values() {
        let cell = build_cell_mesh(4).unwrap();
        let mut field: Vec<f64> = (0..cell.nodes.len()).map(|v| v as f64).collect();
        cell.periodize(&mut field);
        for v in 0..field.len() {
            assert_eq!(field[v], field[cell.master_of[v]]);
        }
        let (slave, master) = cell.lr_pairs[2];
        assert_eq!(field[slave], field[master]);
    }
}
