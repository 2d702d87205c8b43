//! Norms of P1 fields and cross-mesh point evaluation.

use crate::error::{Error, Result};
use crate::mesh::{Component, TwoComponentMesh};
use alloc::vec;
use alloc::vec::Vec;

/// Exact P1 norms of a nodal field.
#[derive(Clone, Copy, Debug)]
pub struct FieldNorms {
    /// `||u||_{L^2(Q)}`.
    pub l2: f64,
    /// H1 seminorm over the plus component.
    pub h1_plus: f64,
    /// H1 seminorm over the minus component.
    pub h1_minus: f64,
    /// `||[u]||_{L^2}` over the interface polyline.
    pub jump_l2: f64,
}

impl FieldNorms {
    /// `||grad u||_{L^2(Q minus interface)}` over both components.
    pub fn h1_total(&self) -> f64 {
        libm::sqrt(self.h1_plus * self.h1_plus + self.h1_minus * self.h1_minus)
    }
}

/// Domain L2 norm (exact mass matrix), per-component H1 seminorms (exact for
/// P1) and the interface jump norm with the polyline edge rule.
pub fn l2_norms(mesh: &TwoComponentMesh, field: &[f64]) -> FieldNorms {
    debug_assert_eq!(field.len(), mesh.node_count());
    let mut l2_sq = 0.0;
    let mut h1p_sq = 0.0;
    let mut h1m_sq = 0.0;
    for t in &mesh.triangles {
        let [a, b, c] = t.nodes;
        let (pa, pb, pc) = (mesh.nodes[a], mesh.nodes[b], mesh.nodes[c]);
        let (ua, ub, uc) = (field[a], field[b], field[c]);
        let det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
        let area = 0.5 * det;
        // exact P1 mass: area/12 * [[2,1,1],[1,2,1],[1,1,2]]
        l2_sq += area / 6.0
            * (ua * ua + ub * ub + uc * uc + ua * ub + ub * uc + uc * ua);
        let gx = ((pb[1] - pc[1]) * ua + (pc[1] - pa[1]) * ub + (pa[1] - pb[1]) * uc) / det;
        let gy = ((pc[0] - pb[0]) * ua + (pa[0] - pc[0]) * ub + (pb[0] - pa[0]) * uc) / det;
        let g2 = area * (gx * gx + gy * gy);
        match t.tag {
            Component::Plus => h1p_sq += g2,
            Component::Minus => h1m_sq += g2,
        }
    }
    let mut jump_sq = 0.0;
    for p in &mesh.pairs {
        let s = field[p.plus] - field[p.minus];
        jump_sq += p.weight * s * s;
    }
    FieldNorms {
        l2: libm::sqrt(l2_sq.max(0.0)),
        h1_plus: libm::sqrt(h1p_sq.max(0.0)),
        h1_minus: libm::sqrt(h1m_sq.max(0.0)),
        jump_l2: libm::sqrt(jump_sq.max(0.0)),
    }
}

/// Uniform-bin point locator over a mesh, used for cross-mesh evaluation.
///
/// Points on `x_N = 0` of a flat two-component mesh evaluate the plus side
/// (a measure-zero tie-break).
pub struct MeshLocator<'a> {
    mesh: &'a TwoComponentMesh,
    min: [f64; 2],
    max: [f64; 2],
    nb: [usize; 2],
    bins: Vec<Vec<usize>>,
}

impl<'a> MeshLocator<'a> {
    pub fn new(mesh: &'a TwoComponentMesh) -> Self {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in &mesh.nodes {
            for d in 0..2 {
                min[d] = min[d].min(p[d]);
                max[d] = max[d].max(p[d]);
            }
        }
        let target = libm::sqrt((mesh.triangles.len() / 2).max(1) as f64) as usize;
        let nb = [target.max(1), target.max(1)];
        let mut bins = vec![Vec::new(); nb[0] * nb[1]];
        for (tid, t) in mesh.triangles.iter().enumerate() {
            let mut tmin = [f64::INFINITY; 2];
            let mut tmax = [f64::NEG_INFINITY; 2];
            for &v in &t.nodes {
                for d in 0..2 {
                    tmin[d] = tmin[d].min(mesh.nodes[v][d]);
                    tmax[d] = tmax[d].max(mesh.nodes[v][d]);
                }
            }
            let (i0, j0) = bin_of(&min, &max, &nb, [tmin[0], tmin[1]]);
            let (i1, j1) = bin_of(&min, &max, &nb, [tmax[0], tmax[1]]);
            for bi in i0..=i1 {
                for bj in j0..=j1 {
                    bins[bi * nb[1] + bj].push(tid);
                }
            }
        }
        MeshLocator { mesh, min, max, nb, bins }
    }

    /// Barycentric P1 evaluation of `field` at `x`, with a 1e-10 snap
    /// tolerance at triangle boundaries.
    pub fn eval(&self, field: &[f64], x: [f64; 2]) -> Result<f64> {
        let (bi, bj) = bin_of(&self.min, &self.max, &self.nb, x);
        let candidates = &self.bins[bi * self.nb[1] + bj];
        let preferred = if x[1] >= 0.0 { Component::Plus } else { Component::Minus };
        let mut fallback: Option<(f64, f64)> = None; // (min bary, value)
        for pass in 0..2 {
            for &tid in candidates {
                let t = &self.mesh.triangles[tid];
                let matches_side = t.tag == preferred;
                if (pass == 0) != matches_side {
                    continue;
                }
                let [a, b, c] = t.nodes;
                let (pa, pb, pc) =
                    (self.mesh.nodes[a], self.mesh.nodes[b], self.mesh.nodes[c]);
                let det =
                    (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
                let l1 = ((pb[0] - x[0]) * (pc[1] - x[1]) - (pc[0] - x[0]) * (pb[1] - x[1])) / det;
                let l2 = ((pc[0] - x[0]) * (pa[1] - x[1]) - (pa[0] - x[0]) * (pc[1] - x[1])) / det;
                let l3 = 1.0 - l1 - l2;
                let min_bary = l1.min(l2).min(l3);
                if min_bary >= -1e-10 {
                    return Ok(l1 * field[a] + l2 * field[b] + l3 * field[c]);
                }
                match fallback {
                    Some((best, _)) if best >= min_bary => {}
                    _ => {
                        fallback =
                            Some((min_bary, l1 * field[a] + l2 * field[b] + l3 * field[c]))
                    }
                }
            }
        }
        // snap: accept the best candidate when the defect is within the
        // lookup tolerance of the mesh scale
        let scale = (self.max[0] - self.min[0]).max(self.max[1] - self.min[1]);
        if let Some((best, value)) = fallback {
            if best >= -1e-8 / scale.max(1.0) {
                return Ok(value);
            }
        }
        Err(Error::PointLookup { x: x[0], y: x[1] })
    }
}

fn bin_of(min: &[f64; 2], max: &[f64; 2], nb: &[usize; 2], x: [f64; 2]) -> (usize, usize) {
    let fx = ((x[1] - min[1]) / (max[1] - min[1]).max(1e-300) * nb[0] as f64) as isize;
    let fy = ((x[0] - min[0]) / (max[0] - min[0]).max(1e-300) * nb[1] as f64) as isize;
    (
        fx.clamp(0, nb[0] as isize - 1) as usize,
        fy.clamp(0, nb[1] as isize - 1) as usize,
    )
}

/// Evaluates a P1 field at arbitrary points inside the mesh.
pub fn evaluate_cross_mesh(
    mesh: &TwoComponentMesh,
    field: &[f64],
    points: &[[f64; 2]],
) -> Result<Vec<f64>> {
    let locator = MeshLocator::new(mesh);
    points.iter().map(|&p| locator.eval(field, p)).collect()
}

/// `||u_target - u_source||_{L^2(Q)}` by the 3-point edge-midpoint rule on
/// the target mesh, with the source field cross-evaluated.
pub fn l2_error_on_mesh(
    target: &TwoComponentMesh,
    target_field: &[f64],
    source: &TwoComponentMesh,
    source_field: &[f64],
) -> Result<f64> {
    let locator = MeshLocator::new(source);
    let mut acc = 0.0;
    for t in &target.triangles {
        let [a, b, c] = t.nodes;
        let (pa, pb, pc) = (target.nodes[a], target.nodes[b], target.nodes[c]);
        let area = 0.5
            * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]));
        let mids = [
            ([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])], 0.5 * (target_field[a] + target_field[b])),
            ([0.5 * (pb[0] + pc[0]), 0.5 * (pb[1] + pc[1])], 0.5 * (target_field[b] + target_field[c])),
            ([0.5 * (pc[0] + pa[0]), 0.5 * (pc[1] + pa[1])], 0.5 * (target_field[c] + target_field[a])),
        ];
        for (m, uv) in mids {
            let sv = locator.eval(source_field, m)?;
            let d = uv - sv;
            acc += area / 3.0 * d * d;
        }
    }
    Ok(libm::sqrt(acc.max(0.0)))
}
