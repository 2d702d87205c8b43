//! P1 assembly of the discrete operators: oscillating-coefficient stiffness
//! on both components, the scaled interface jump coupling, consistent loads
//! and the Dirichlet reduction.
//!
//! Quadrature: one barycenter point for the stiffness coefficient, the
//! 3-point edge-midpoint rule for loads, trapezoid along interface edges for
//! the coupling. The interface measure is the polyline length of the mesh's
//! own interface, so discrete complementarity is exact on the mesh.

use crate::coeff::{InterfaceConductance, PeriodicCoefficient};
use crate::error::{Error, Result};
use crate::linalg::{Csr, Triplets};
use crate::mesh::{Component, DomainSpec, TwoComponentMesh};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Source presets on `Q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SourceTerm {
    Constant(f64),
    /// `+c` below `x_N = 0`, `-c` above. The canonical constraint-engaging
    /// load for `c > 0`; `c < 0` opens the jump instead. Points exactly on
    /// `x_N = 0` take the sign of the component that owns the triangle.
    SplitSign(f64),
    /// Gaussian bump of weight `c` centered at `(L/2, 0)`.
    Bump(f64),
}

impl SourceTerm {
    pub fn eval(&self, x: [f64; 2], tag: Component, domain_length: f64, half_height: f64) -> f64 {
        match self {
            SourceTerm::Constant(c) => *c,
            SourceTerm::SplitSign(c) => {
                if x[1] < 0.0 {
                    *c
                } else if x[1] > 0.0 {
                    -*c
                } else {
                    match tag {
                        Component::Minus => *c,
                        Component::Plus => -*c,
                    }
                }
            }
            SourceTerm::Bump(c) => {
                let sigma = 0.25 * domain_length.min(half_height);
                let dx = x[0] - 0.5 * domain_length;
                let dy = x[1];
                c * libm::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma))
            }
        }
    }

    pub fn scaled(&self, t: f64) -> SourceTerm {
        match self {
            SourceTerm::Constant(c) => SourceTerm::Constant(t * c),
            SourceTerm::SplitSign(c) => SourceTerm::SplitSign(t * c),
            SourceTerm::Bump(c) => SourceTerm::Bump(t * c),
        }
    }
}

/// Constant gradients of the three P1 hat functions and the triangle area.
pub(crate) fn p1_element(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> ([[f64; 2]; 3], f64) {
    let det = (q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]);
    let area = 0.5 * det;
    let grads = [
        [(q[1] - r[1]) / det, (r[0] - q[0]) / det],
        [(r[1] - p[1]) / det, (p[0] - r[0]) / det],
        [(p[1] - q[1]) / det, (q[0] - p[0]) / det],
    ];
    (grads, area)
}

/// Stiffness of `a(u,v) = int A(x/eps) grad u . grad v` over both components.
/// Duplicated interface DOFs receive contributions only from their own
/// component's triangles.
pub fn assemble_stiffness(
    mesh: &TwoComponentMesh,
    coeff: &PeriodicCoefficient,
    eps: f64,
) -> Result<Csr> {
    let n = mesh.node_count();
    let mut trip = Triplets::new(n, n);
    for (eid, t) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = t.nodes;
        let (grads, area) = p1_element(mesh.nodes[a], mesh.nodes[b], mesh.nodes[c]);
        if area.abs() < 1e-14 {
            return Err(Error::Assembly(format!(
                "degenerate triangle {eid} (area {area:e})"
            )));
        }
        let bary = [
            (mesh.nodes[a][0] + mesh.nodes[b][0] + mesh.nodes[c][0]) / 3.0,
            (mesh.nodes[a][1] + mesh.nodes[b][1] + mesh.nodes[c][1]) / 3.0,
        ];
        let m = coeff.eval([bary[0] / eps, bary[1] / eps]);
        for (local_i, &gi) in t.nodes.iter().enumerate() {
            for (local_j, &gj) in t.nodes.iter().enumerate() {
                // row = test function, column = trial function
                let flux = m.mul_vec(grads[local_j]);
                let val = area * (flux[0] * grads[local_i][0] + flux[1] * grads[local_i][1]);
                trip.push(gi, gj, val);
            }
        }
    }
    Ok(trip.into_csr())
}

/// Interface coupling `eps^gamma int_edge h(x'/eps) [u][v] dsigma` with the
/// polyline arc length as the surface measure and trapezoidal quadrature of
/// `h`, lumped per pair. On a flat mesh the measure reduces to `dx'`.
pub fn assemble_interface_coupling(
    mesh: &TwoComponentMesh,
    h: &InterfaceConductance,
    eps: f64,
    gamma: f64,
) -> Csr {
    let n = mesh.node_count();
    if h.zero || mesh.pairs.is_empty() {
        return Csr::zero(n, n);
    }
    let scale = libm::pow(eps, gamma);
    let mut trip = Triplets::new(n, n);
    for pair in &mesh.pairs {
        let hv = h.eval(pair.x / eps);
        let w = scale * hv * pair.weight;
        if w == 0.0 {
            continue;
        }
        // ([u],[v]) on the pair: (e+ - e-)(e+ - e-)^T
        trip.push(pair.plus, pair.plus, w);
        trip.push(pair.minus, pair.minus, w);
        trip.push(pair.plus, pair.minus, -w);
        trip.push(pair.minus, pair.plus, -w);
    }
    trip.into_csr()
}

/// Consistent P1 load by the 3-point edge-midpoint rule.
pub fn assemble_load(mesh: &TwoComponentMesh, f: &SourceTerm, domain: &DomainSpec) -> Vec<f64> {
    let mut load = vec![0.0; mesh.node_count()];
    let length = domain.length_f();
    let half_height = domain.half_height_f();
    for t in &mesh.triangles {
        let [a, b, c] = t.nodes;
        let (pa, pb, pc) = (mesh.nodes[a], mesh.nodes[b], mesh.nodes[c]);
        let det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
        let area = 0.5 * det;
        let mids = [
            [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
            [0.5 * (pb[0] + pc[0]), 0.5 * (pb[1] + pc[1])],
            [0.5 * (pc[0] + pa[0]), 0.5 * (pc[1] + pa[1])],
        ];
        let fm: Vec<f64> = mids
            .iter()
            .map(|m| f.eval(*m, t.tag, length, half_height))
            .collect();
        // hat function i is 1/2 on the two midpoints of its adjacent edges
        load[a] += area / 3.0 * 0.5 * (fm[0] + fm[2]);
        load[b] += area / 3.0 * 0.5 * (fm[0] + fm[1]);
        load[c] += area / 3.0 * 0.5 * (fm[1] + fm[2]);
    }
    load
}

/// One interface pair as seen by the solver: full-mesh DOFs plus the slots
/// in the reduced free vector (absent when the pair is Dirichlet-pinned).
#[derive(Clone, Copy, Debug)]
pub struct ProblemPair {
    pub plus_full: usize,
    pub minus_full: usize,
    pub x: f64,
    pub weight: f64,
    pub free_slots: Option<(usize, usize)>,
}

/// Assembled discrete problem on the full DOF set.
#[derive(Clone, Debug)]
pub struct DiscreteViProblem {
    pub stiffness: Csr,
    pub coupling: Csr,
    pub load: Vec<f64>,
    pub free: Vec<usize>,
    pub full_to_free: Vec<isize>,
    pub pairs: Vec<ProblemPair>,
    pub symmetric: bool,
}

impl DiscreteViProblem {
    pub fn new(mesh: &TwoComponentMesh, stiffness: Csr, coupling: Csr, load: Vec<f64>) -> Self {
        let n = mesh.node_count();
        let mut free = Vec::with_capacity(n);
        let mut full_to_free = vec![-1isize; n];
        for v in 0..n {
            if !mesh.boundary[v] {
                full_to_free[v] = free.len() as isize;
                free.push(v);
            }
        }
        let pairs = mesh
            .pairs
            .iter()
            .map(|p| {
                let fp = full_to_free[p.plus];
                let fm = full_to_free[p.minus];
                let free_slots = if fp >= 0 && fm >= 0 {
                    Some((fp as usize, fm as usize))
                } else {
                    None
                };
                ProblemPair {
                    plus_full: p.plus,
                    minus_full: p.minus,
                    x: p.x,
                    weight: p.weight,
                    free_slots,
                }
            })
            .collect();
        let total = stiffness.add(&coupling);
        let scale = total.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let symmetric = total.is_symmetric(1e-12 * (1.0 + scale));
        DiscreteViProblem {
            stiffness,
            coupling,
            load,
            free,
            full_to_free,
            pairs,
            symmetric,
        }
    }

    /// Full assembly from presets.
    pub fn assemble(
        mesh: &TwoComponentMesh,
        coeff: &PeriodicCoefficient,
        h: &InterfaceConductance,
        source: &SourceTerm,
        domain: &DomainSpec,
    ) -> Result<Self> {
        let k = assemble_stiffness(mesh, coeff, domain.eps_f())?;
        let b = assemble_interface_coupling(mesh, h, domain.eps_f(), domain.gamma_f());
        let f = assemble_load(mesh, source, domain);
        Ok(DiscreteViProblem::new(mesh, k, b, f))
    }

    pub fn n_full(&self) -> usize {
        self.load.len()
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Scatters a free vector into a full vector with zero Dirichlet values.
    pub fn scatter(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.n_full()];
        for (slot, &v) in self.free.iter().enumerate() {
            full[v] = reduced[slot];
        }
        full
    }

    /// Normalized energy-identity defect
    /// `|u^T K u + u^T B u - f^T u| / (1 + |f^T u|)` at a full-mesh field.
    pub fn energy_residual(&self, u: &[f64]) -> f64 {
        let fu: f64 = self.load.iter().zip(u).map(|(f, v)| f * v).sum();
        let ku = self.stiffness.quad_form(u);
        let bu = self.coupling.quad_form(u);
        (ku + bu - fu).abs() / (1.0 + fu.abs())
    }
}

/// Symmetric Dirichlet elimination: the problem restricted to free DOFs.
#[derive(Clone, Debug)]
pub struct ReducedVi {
    pub n: usize,
    pub stiffness: Csr,
    pub coupling: Csr,
    pub load: Vec<f64>,
    /// (pair id, plus slot, minus slot) for pairs with both DOFs free.
    pub free_pairs: Vec<(usize, usize, usize)>,
    pub symmetric: bool,
}

pub fn apply_dirichlet(problem: &DiscreteViProblem) -> ReducedVi {
    let stiffness = problem.stiffness.extract(&problem.free);
    let coupling = problem.coupling.extract(&problem.free);
    let load: Vec<f64> = problem.free.iter().map(|&v| problem.load[v]).collect();
    let free_pairs = problem
        .pairs
        .iter()
        .enumerate()
        .filter_map(|(pid, p)| p.free_slots.map(|(fp, fm)| (pid, fp, fm)))
        .collect();
    ReducedVi {
        n: problem.free.len(),
        stiffness,
        coupling,
        load,
        free_pairs,
        symmetric: problem.symmetric,
    }
}
