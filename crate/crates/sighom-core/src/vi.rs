//! Solvers for the discrete variational inequality over the convex set of
//! nonnegative interface jumps.
//!
//! The pair constraint `u_plus - u_minus >= 0` couples two DOFs per
//! interface point. A per-pair change of variables to (mean, jump)
//! coordinates turns it into a componentwise bound `s >= 0`, which projected
//! successive over-relaxation handles by clamping. The returned multiplier
//! of a pair is the jump-coordinate residual of `K u + B u - f`, i.e. the
//! discrete conormal flux plus the penalty term weighted by the edge
//! measure; dual feasibility reads `multiplier >= 0`.
//!
//! An exhaustive active-set enumeration over all pair subsets serves as an
//! exact oracle on small problems, and a plain linear solver covers the
//! unconstrained and perfect-transmission cases.

use crate::assemble::{apply_dirichlet, DiscreteViProblem};
use crate::error::{Error, Result};
use crate::linalg::{cg_solve, Csr, DenseCholesky, Triplets};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Per-pair change of variables between nodal traces and (mean, jump)
/// coordinates on the free DOF set. The mean lives in the plus slot and the
/// jump in the minus slot; all other DOFs are untouched.
pub struct JumpCoordinateMap {
    pub n: usize,
    /// (pair id, mean slot, jump slot) per free pair.
    pub pairs: Vec<(usize, usize, usize)>,
    t: Csr,
    t_transpose: Csr,
}

impl JumpCoordinateMap {
    pub fn new(n: usize, free_pairs: &[(usize, usize, usize)]) -> Self {
        let mut is_pair_slot = vec![false; n];
        for &(_, p, m) in free_pairs {
            is_pair_slot[p] = true;
            is_pair_slot[m] = true;
        }
        let mut trip = Triplets::new(n, n);
        for i in 0..n {
            if !is_pair_slot[i] {
                trip.push(i, i, 1.0);
            }
        }
        for &(_, p, m) in free_pairs {
            // u_plus = mean + jump/2, u_minus = mean - jump/2
            trip.push(p, p, 1.0);
            trip.push(p, m, 0.5);
            trip.push(m, p, 1.0);
            trip.push(m, m, -0.5);
        }
        let t = trip.into_csr();
        let t_transpose = t.transpose();
        JumpCoordinateMap {
            n,
            pairs: free_pairs.to_vec(),
            t,
            t_transpose,
        }
    }

    /// `u = T z`.
    pub fn to_nodal(&self, z: &[f64]) -> Vec<f64> {
        self.t.mul_vec_alloc(z)
    }

    /// `z = T^{-1} u` (mean and jump per pair, identity elsewhere).
    pub fn to_jump(&self, u: &[f64]) -> Vec<f64> {
        let mut z = u.to_vec();
        for &(_, p, m) in &self.pairs {
            z[p] = 0.5 * (u[p] + u[m]);
            z[m] = u[p] - u[m];
        }
        z
    }

    /// Congruence transform `T^T A T`.
    pub fn transform_matrix(&self, a: &Csr) -> Csr {
        self.t_transpose.matmul(&a.matmul(&self.t))
    }

    /// `T^T f`.
    pub fn transform_load(&self, f: &[f64]) -> Vec<f64> {
        self.t_transpose.mul_vec_alloc(f)
    }
}

/// Status of one interface pair at the solution.
#[derive(Clone, Copy, Debug)]
pub struct PairStatus {
    pub pair: usize,
    pub jump: f64,
    pub multiplier: f64,
    pub active: bool,
}

/// Solution of a discrete VI (or linear) solve on the full mesh DOF set.
#[derive(Clone, Debug)]
pub struct ViSolution {
    /// Nodal values on the full mesh (zeros on the Dirichlet boundary).
    pub values: Vec<f64>,
    /// One entry per mesh pair; pinned pairs report zero jump and multiplier.
    pub pair_status: Vec<PairStatus>,
    /// Pair ids with a binding constraint (zero jump, positive multiplier).
    pub active: Vec<usize>,
    pub inactive: Vec<usize>,
    /// Max min-form complementarity residual over pairs and free residual
    /// over unconstrained slots.
    pub comp_residual: f64,
    pub iterations: usize,
    /// Last relaxation increment (0 for direct solves).
    pub final_residual: f64,
    /// Objective value per sweep when recording was requested.
    pub energy_history: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StartPoint {
    Zero,
    /// Unconstrained solve clamped onto the feasible set (default).
    ClampedUnconstrained,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Over-relaxation factor in (0, 2).
    pub relaxation: f64,
    pub start: StartPoint,
    pub record_energy: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: 200_000,
            relaxation: 1.5,
            start: StartPoint::ClampedUnconstrained,
            record_energy: false,
        }
    }
}

/// Projected successive over-relaxation in jump coordinates.
pub fn solve_vi(problem: &DiscreteViProblem, tol: f64, max_iter: usize) -> Result<ViSolution> {
    solve_vi_opts(
        problem,
        &SolveOptions { tol, max_iter, ..SolveOptions::default() },
    )
}

pub fn solve_vi_opts(problem: &DiscreteViProblem, opts: &SolveOptions) -> Result<ViSolution> {
    let red = apply_dirichlet(problem);
    if !red.symmetric {
        return Err(Error::NonsymmetricOperator);
    }
    if !(opts.relaxation > 0.0 && opts.relaxation < 2.0) {
        return Err(Error::Validation(format!(
            "relaxation factor must lie in (0,2), got {}",
            opts.relaxation
        )));
    }
    let total = red.stiffness.add(&red.coupling);
    let map = JumpCoordinateMap::new(red.n, &red.free_pairs);
    let a = map.transform_matrix(&total);
    let f = map.transform_load(&red.load);
    let mut constrained = vec![false; red.n];
    for &(_, _, s) in &map.pairs {
        constrained[s] = true;
    }
    let scale = 1.0 + f.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut z = match opts.start {
        StartPoint::Zero => vec![0.0; red.n],
        StartPoint::ClampedUnconstrained => {
            match linear_solve_reduced(&total, &red.load) {
                Ok(u) => {
                    let mut z = map.to_jump(&u);
                    for &(_, _, s) in &map.pairs {
                        if z[s] < 0.0 {
                            z[s] = 0.0;
                        }
                    }
                    z
                }
                Err(_) => vec![0.0; red.n],
            }
        }
    };

    let diag = a.diagonal();
    for (i, d) in diag.iter().enumerate() {
        if *d <= 0.0 {
            return Err(Error::Conditioning(format!(
                "nonpositive diagonal {d:e} at slot {i} in relaxation"
            )));
        }
    }

    let mut energy_history = if opts.record_energy { Some(Vec::new()) } else { None };
    let mut residual = vec![0.0; red.n];
    let mut iterations = 0;
    let mut incr_max = f64::INFINITY;
    let mut res_max = f64::INFINITY;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        incr_max = 0.0;
        for i in 0..red.n {
            let (cols, vals) = a.row(i);
            let mut sigma = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                if *c != i {
                    sigma += v * z[*c];
                }
            }
            let gs = (f[i] - sigma) / diag[i];
            let mut znew = z[i] + opts.relaxation * (gs - z[i]);
            if constrained[i] && znew < 0.0 {
                znew = 0.0;
            }
            let d = znew - z[i];
            incr_max = incr_max.max(d.abs());
            z[i] = znew;
        }
        if let Some(history) = energy_history.as_mut() {
            let fz: f64 = f.iter().zip(&z).map(|(fi, zi)| fi * zi).sum();
            history.push(0.5 * a.quad_form(&z) - fz);
        }
        a.mul_vec(&z, &mut residual);
        res_max = 0.0;
        for i in 0..red.n {
            let r = f[i] - residual[i];
            let local = if constrained[i] {
                // min-form: both s and mu nonnegative with zero product
                let mu = -r;
                z[i].min(mu).abs()
            } else {
                r.abs()
            };
            res_max = res_max.max(local);
        }
        if incr_max <= opts.tol * scale && res_max <= opts.tol * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { iterations, residual: res_max });
    }

    let solution = build_solution(problem, &map, &a, &f, &z, opts.tol * scale);
    Ok(ViSolution {
        iterations,
        final_residual: incr_max,
        comp_residual: res_max,
        energy_history,
        ..solution
    })
}

/// Exhaustive active-set enumeration, exact on small pair counts.
///
/// Subsets are visited in ascending bitmask order, so the empty set wins all
/// degenerate ties (e.g. a zero load).
pub fn solve_vi_activeset(problem: &DiscreteViProblem, pair_budget: usize) -> Result<ViSolution> {
    let red = apply_dirichlet(problem);
    let m = red.free_pairs.len();
    if m > pair_budget || pair_budget > 20 {
        return Err(Error::Validation(format!(
            "active-set enumeration needs pair count <= budget <= 20, got {m} pairs, budget {pair_budget}"
        )));
    }
    let total = red.stiffness.add(&red.coupling);
    let map = JumpCoordinateMap::new(red.n, &red.free_pairs);
    let a = map.transform_matrix(&total);
    let f = map.transform_load(&red.load);
    let dense = a.to_dense();
    let n = red.n;
    let scale_f = 1.0 + f.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut tried = 0usize;
    for mask in 0u32..(1u32 << m) {
        tried += 1;
        let mut sys = dense.clone();
        let mut rhs = f.clone();
        for (pidx, &(_, _, s)) in map.pairs.iter().enumerate() {
            if mask & (1 << pidx) != 0 {
                for j in 0..n {
                    sys[s * n + j] = 0.0;
                    sys[j * n + s] = 0.0;
                }
                sys[s * n + s] = 1.0;
                rhs[s] = 0.0;
            }
        }
        let chol = match DenseCholesky::factor(&sys, n) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let z = chol.solve(&rhs);
        // optimality against the original operator
        let az = a.mul_vec_alloc(&z);
        let scale_z = 1.0 + z.iter().fold(0.0f64, |mm, v| mm.max(v.abs()));
        let feas_tol = 1e-9 * scale_z;
        let dual_tol = 1e-9 * scale_f;
        let mut ok = true;
        for (pidx, &(_, _, s)) in map.pairs.iter().enumerate() {
            if mask & (1 << pidx) != 0 {
                let mu = az[s] - f[s];
                if mu < -dual_tol {
                    ok = false;
                    break;
                }
            } else if z[s] < -feas_tol {
                ok = false;
                break;
            }
        }
        if ok {
            let mut solution =
                build_solution(problem, &map, &a, &f, &z, 1e-9 * scale_f.max(scale_z));
            solution.iterations = tried;
            return Ok(solution);
        }
    }
    Err(Error::Conditioning(
        "no pair subset satisfies the optimality conditions within tolerance".into(),
    ))
}

/// Unconstrained solve of `(K + B) u = f` on the free DOFs: dense Cholesky
/// below 2000 DOFs, Jacobi-preconditioned CG to relative residual 1e-10
/// otherwise.
pub fn solve_linear(problem: &DiscreteViProblem) -> Result<ViSolution> {
    let red = apply_dirichlet(problem);
    let total = red.stiffness.add(&red.coupling);
    let u = linear_solve_reduced(&total, &red.load)?;
    let map = JumpCoordinateMap::new(red.n, &red.free_pairs);
    let a = map.transform_matrix(&total);
    let f = map.transform_load(&red.load);
    let z = map.to_jump(&u);
    let solution = build_solution(problem, &map, &a, &f, &z, 1e-9);
    Ok(solution)
}

fn linear_solve_reduced(total: &Csr, load: &[f64]) -> Result<Vec<f64>> {
    let n = load.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n < 2000 {
        let chol = DenseCholesky::factor(&total.to_dense(), n)?;
        Ok(chol.solve(load))
    } else {
        let (u, _) = cg_solve(total, load, 1e-10, 40 * n + 200)?;
        Ok(u)
    }
}

fn build_solution(
    problem: &DiscreteViProblem,
    map: &JumpCoordinateMap,
    a: &Csr,
    f: &[f64],
    z: &[f64],
    act_tol: f64,
) -> ViSolution {
    let u_red = map.to_nodal(z);
    let values = problem.scatter(&u_red);
    let az = a.mul_vec_alloc(z);
    let mut status: Vec<PairStatus> = problem
        .pairs
        .iter()
        .enumerate()
        .map(|(pid, _)| PairStatus { pair: pid, jump: 0.0, multiplier: 0.0, active: false })
        .collect();
    let mut comp_residual = 0.0f64;
    for &(pid, _, s) in &map.pairs {
        let jump = z[s];
        let mu = az[s] - f[s];
        let active = jump.abs() <= 10.0 * act_tol && mu > 10.0 * act_tol;
        status[pid] = PairStatus { pair: pid, jump, multiplier: mu, active };
        comp_residual = comp_residual.max(jump.min(mu).abs());
    }
    let active: Vec<usize> = status.iter().filter(|s| s.active).map(|s| s.pair).collect();
    let inactive: Vec<usize> =
        status.iter().filter(|s| !s.active).map(|s| s.pair).collect();
    ViSolution {
        values,
        pair_status: status,
        active,
        inactive,
        comp_residual,
        iterations: 0,
        final_residual: 0.0,
        energy_history: None,
    }
}
