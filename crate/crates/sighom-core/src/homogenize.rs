//! Periodic cell problems, the homogenized tensor, the effective interface
//! conductance and the (k, gamma) regime classification.

use crate::cell::CellMesh;
use crate::coeff::{InterfaceConductance, Matrix2, PeriodicCoefficient};
use crate::error::{Error, Result};
use crate::linalg::{cg_solve, DenseCholesky, Triplets};
use crate::profile::InterfaceProfile;
use crate::rational::Rational;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// The three asymptotic regimes: Signorini with conductance (A), Signorini
/// without (B), perfect transmission (C).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    A,
    B,
    C,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::A => write!(f, "A"),
            Regime::B => write!(f, "B"),
            Regime::C => write!(f, "C"),
        }
    }
}

/// Classifies (k, gamma) exactly. The boundary `gamma = 1 - k` (and
/// `gamma = 0` for `k >= 1`) belongs to case A, which is why the comparison
/// runs on rationals rather than floats.
pub fn classify_regime(k: Rational, gamma: Rational) -> Result<Regime> {
    if !k.is_positive() {
        return Err(Error::Validation(format!("k must be positive, got {k}")));
    }
    let threshold = if k >= Rational::ONE {
        Rational::ZERO
    } else {
        Rational::ONE - k
    };
    Ok(match gamma.cmp(&threshold) {
        core::cmp::Ordering::Equal => Regime::A,
        core::cmp::Ordering::Greater => Regime::B,
        core::cmp::Ordering::Less => Regime::C,
    })
}

/// Effective interface conductance of the flat limit interface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EffectiveConductance {
    Value(f64),
    /// The scaled interface weight tends to zero (case B).
    Vanishing,
}

impl fmt::Display for EffectiveConductance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EffectiveConductance::Value(v) => write!(f, "{v:e}"),
            EffectiveConductance::Vanishing => write!(f, "vanishing"),
        }
    }
}

/// Composite Simpson quadrature on `[0,1]` split at the given breakpoints,
/// with at least `min_points` sample intervals overall.
fn quad_unit_interval(
    f: &dyn Fn(f64) -> f64,
    interior_breaks: &[f64],
    min_points: usize,
) -> f64 {
    let mut breaks: Vec<f64> = Vec::with_capacity(interior_breaks.len() + 2);
    breaks.push(0.0);
    for &b in interior_breaks {
        if b > 0.0 && b < 1.0 {
            breaks.push(b);
        }
    }
    breaks.push(1.0);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = b - a;
        // proportional share of the interval count, rounded up to even
        let mut m = (len * min_points as f64) as usize;
        if m < 2 {
            m = 2;
        }
        if m % 2 == 1 {
            m += 1;
        }
        let h = len / m as f64;
        let mut acc = f(a) + f(b);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        total += acc * h / 3.0;
    }
    total
}

/// The effective conductance of the flat limit: the weak-* limit of the
/// scaled weight times the surface Jacobian. Only case-A parameters carry a
/// finite value; case-B parameters vanish; case-C parameters are a domain
/// error.
///
/// Branches for case A:
/// * `k = 1, gamma = 0`: mean of `h sqrt(1 + |g'|^2)`,
/// * `0 < k < 1, gamma = 1 - k`: mean of `h |g'|`,
/// * `k > 1, gamma = 0`: mean of `h`.
pub fn effective_conductance(
    h: &InterfaceConductance,
    profile: &InterfaceProfile,
    k: Rational,
    gamma: Rational,
) -> Result<EffectiveConductance> {
    match classify_regime(k, gamma)? {
        Regime::B => return Ok(EffectiveConductance::Vanishing),
        Regime::C => return Err(Error::NoEffectiveConductance),
        Regime::A => {}
    }
    if h.zero {
        return Ok(EffectiveConductance::Value(0.0));
    }
    let mut breaks = profile.kinks();
    breaks.extend(h.kinks());
    // |cos| factors of the sine profile kink where the slope crosses zero
    if let crate::profile::ProfileShape::Sine { amplitude, .. } = &profile.shape {
        if *amplitude != 0.0 {
            breaks.push(0.25);
            breaks.push(0.75);
        }
    }
    let value = if k == Rational::ONE {
        quad_unit_interval(
            &|y| {
                let (_, slope) = profile.eval(y);
                h.eval(y) * libm::sqrt(1.0 + slope * slope)
            },
            &breaks,
            4096,
        )
    } else if k > Rational::ONE {
        quad_unit_interval(&|y| h.eval(y), &breaks, 4096)
    } else {
        quad_unit_interval(
            &|y| {
                let (_, slope) = profile.eval(y);
                h.eval(y) * slope.abs()
            },
            &breaks,
            4096,
        )
    };
    Ok(EffectiveConductance::Value(value))
}

/// Homogenized tensor with certified bounds and the corrector fields.
#[derive(Clone, Debug)]
pub struct HomogenizedData {
    pub tensor: Matrix2,
    /// Minimum of `(A0 v, v)` over 360 unit directions.
    pub quad_min: f64,
    /// Maximum of `|A0 v|` over 360 unit directions.
    pub norm_max: f64,
    /// Correctors `omega_{e1}`, `omega_{e2}` as nodal cell fields.
    pub corrector_e1: Vec<f64>,
    pub corrector_e2: Vec<f64>,
    pub conductance: Option<EffectiveConductance>,
    pub regime: Regime,
}

impl HomogenizedData {
    /// Checks the inherited ellipticity window `alpha <= (A0 v, v)` and
    /// `|A0 v| <= beta^2/alpha`.
    pub fn bounds_hold(&self, alpha: f64, beta: f64) -> bool {
        let slack = 1e-10 * (1.0 + beta);
        self.quad_min >= alpha - slack && self.norm_max <= beta * beta / alpha + slack
    }
}

/// Solves the periodic cell problem for direction `lambda`: the corrector
/// `omega = phi + lambda . y` with periodic fluctuation `phi`, zero-mean
/// normalized (`M_Y(omega - lambda . y) = 0` by a post-shift of `phi`).
pub fn solve_cell(
    coeff: &PeriodicCoefficient,
    lambda: [f64; 2],
    cell: &CellMesh,
) -> Result<Vec<f64>> {
    let phi = solve_cell_fluctuation(coeff, lambda, cell)?;
    let omega: Vec<f64> = cell
        .nodes
        .iter()
        .zip(&phi)
        .map(|(p, ph)| ph + lambda[0] * p[0] + lambda[1] * p[1])
        .collect();
    Ok(omega)
}

/// Periodic fluctuation `phi` on all cell nodes plus the per-node master map
/// count, shared by the tensor assembly.
fn solve_cell_fluctuation(
    coeff: &PeriodicCoefficient,
    lambda: [f64; 2],
    cell: &CellMesh,
) -> Result<Vec<f64>> {
    let n_nodes = cell.nodes.len();
    // master indexing
    let mut master_slot = vec![usize::MAX; n_nodes];
    let mut masters = Vec::with_capacity(cell.master_count());
    for v in 0..n_nodes {
        if cell.master_of[v] == v {
            master_slot[v] = masters.len();
            masters.push(v);
        }
    }
    for v in 0..n_nodes {
        master_slot[v] = master_slot[cell.master_of[v]];
    }
    let n = masters.len();

    let mut trip = Triplets::new(n, n);
    let mut rhs = vec![0.0; n];
    for t in &cell.triangles {
        let [a, b, c] = t;
        let (grads, area) = crate::assemble::p1_element(
            cell.nodes[*a],
            cell.nodes[*b],
            cell.nodes[*c],
        );
        let bary = [
            (cell.nodes[*a][0] + cell.nodes[*b][0] + cell.nodes[*c][0]) / 3.0,
            (cell.nodes[*a][1] + cell.nodes[*b][1] + cell.nodes[*c][1]) / 3.0,
        ];
        let m = coeff.eval(bary);
        let slots = [master_slot[*a], master_slot[*b], master_slot[*c]];
        let a_lambda = m.mul_vec(lambda);
        for i in 0..3 {
            for j in 0..3 {
                let flux = m.mul_vec(grads[j]);
                trip.push(
                    slots[i],
                    slots[j],
                    area * (flux[0] * grads[i][0] + flux[1] * grads[i][1]),
                );
            }
            // right-hand side: -int A lambda . grad v
            rhs[slots[i]] -= area * (a_lambda[0] * grads[i][0] + a_lambda[1] * grads[i][1]);
        }
    }
    let mut k = trip.into_csr();
    // pin the first master to fix the constant mode
    let pin = 0usize;
    for row in 0..n {
        let (lo, hi) = (k.row_ptr[row], k.row_ptr[row + 1]);
        for idx in lo..hi {
            if row == pin || k.col_idx[idx] == pin {
                k.values[idx] = if row == pin && k.col_idx[idx] == pin { 1.0 } else { 0.0 };
            }
        }
    }
    rhs[pin] = 0.0;

    let phi_m = if n < 2000 {
        DenseCholesky::factor(&k.to_dense(), n)
            .map_err(|e| match e {
                Error::Conditioning(msg) => {
                    Error::Conditioning(format!("cell problem singular: {msg}"))
                }
                other => other,
            })?
            .solve(&rhs)
    } else {
        let (x, _) = cg_solve(&k, &rhs, 1e-12, 40 * n + 200)?;
        x
    };

    // scatter to all nodes and remove the mesh mean (exact P1 integral)
    let mut phi = vec![0.0; n_nodes];
    for v in 0..n_nodes {
        phi[v] = phi_m[master_slot[v]];
    }
    let mut mean = 0.0;
    for t in &cell.triangles {
        let area = cell.triangle_area(t);
        mean += area / 3.0 * (phi[t[0]] + phi[t[1]] + phi[t[2]]);
    }
    for v in &mut phi {
        *v -= mean;
    }
    Ok(phi)
}

/// The homogenized tensor: column `j` is the cell average of
/// `A grad omega_{e_j}`, assembled by element quadrature.
pub fn homogenized_tensor(
    coeff: &PeriodicCoefficient,
    cell: &CellMesh,
) -> Result<(Matrix2, Vec<f64>, Vec<f64>)> {
    coeff.validate(64)?;
    let mut tensor = Matrix2 { a: [[0.0; 2]; 2] };
    let mut correctors: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for (j, lambda) in [[1.0, 0.0], [0.0, 1.0]].into_iter().enumerate() {
        let phi = solve_cell_fluctuation(coeff, lambda, cell)?;
        let mut col = [0.0; 2];
        for t in &cell.triangles {
            let [a, b, c] = t;
            let (grads, area) = crate::assemble::p1_element(
                cell.nodes[*a],
                cell.nodes[*b],
                cell.nodes[*c],
            );
            let bary = [
                (cell.nodes[*a][0] + cell.nodes[*b][0] + cell.nodes[*c][0]) / 3.0,
                (cell.nodes[*a][1] + cell.nodes[*b][1] + cell.nodes[*c][1]) / 3.0,
            ];
            let m = coeff.eval(bary);
            let gphi = [
                grads[0][0] * phi[*a] + grads[1][0] * phi[*b] + grads[2][0] * phi[*c],
                grads[0][1] * phi[*a] + grads[1][1] * phi[*b] + grads[2][1] * phi[*c],
            ];
            let total_grad = [gphi[0] + lambda[0], gphi[1] + lambda[1]];
            let flux = m.mul_vec(total_grad);
            col[0] += area * flux[0];
            col[1] += area * flux[1];
        }
        tensor.a[0][j] = col[0];
        tensor.a[1][j] = col[1];
        let omega: Vec<f64> = cell
            .nodes
            .iter()
            .zip(&phi)
            .map(|(p, ph)| ph + lambda[0] * p[0] + lambda[1] * p[1])
            .collect();
        correctors[j] = omega;
    }
    let [c1, c2] = correctors;
    Ok((tensor, c1, c2))
}

/// Sampled coercivity certificate over 360 unit directions.
pub fn certify_bounds(tensor: &Matrix2) -> (f64, f64) {
    let mut quad_min = f64::INFINITY;
    let mut norm_max = 0.0f64;
    for i in 0..360 {
        let theta = core::f64::consts::PI * 2.0 * i as f64 / 360.0;
        let v = [libm::cos(theta), libm::sin(theta)];
        let av = tensor.mul_vec(v);
        quad_min = quad_min.min(av[0] * v[0] + av[1] * v[1]);
        norm_max = norm_max.max(libm::hypot(av[0], av[1]));
    }
    (quad_min, norm_max)
}

/// Bundles tensor, certificate, correctors, conductance and regime.
pub fn homogenized_data(
    coeff: &PeriodicCoefficient,
    cell: &CellMesh,
    h: &InterfaceConductance,
    profile: &InterfaceProfile,
    k: Rational,
    gamma: Rational,
) -> Result<HomogenizedData> {
    let regime = classify_regime(k, gamma)?;
    let (tensor, corrector_e1, corrector_e2) = homogenized_tensor(coeff, cell)?;
    let (quad_min, norm_max) = certify_bounds(&tensor);
    let conductance = match regime {
        Regime::C => None,
        _ => Some(effective_conductance(h, profile, k, gamma)?),
    };
    Ok(HomogenizedData {
        tensor,
        quad_min,
        norm_max,
        corrector_e1,
        corrector_e2,
        conductance,
        regime,
    })
}
