//! The three regime-dependent limit problems on the flat interface.
//!
//! All three reuse the same assembly and solver machinery with a constant
//! coefficient tensor; there are no special-cased kernels, so eps-level and
//! limit solves share their code path.

use crate::assemble::{DiscreteViProblem, SourceTerm};
use crate::coeff::{InterfaceConductance, Matrix2, PeriodicCoefficient};
use crate::error::{Error, Result};
use crate::homogenize::Regime;
use crate::mesh::{build_flat_mesh, build_single_mesh, DomainSpec, TwoComponentMesh};
use crate::rational::Rational;
use crate::vi::{solve_linear, solve_vi_opts, SolveOptions, ViSolution};
use alloc::format;

/// Data of one limit problem.
#[derive(Clone, Debug)]
pub struct LimitProblemSpec {
    pub regime: Regime,
    /// Homogenized tensor `A0`.
    pub tensor: Matrix2,
    /// Effective conductance; meaningful in regime A only.
    pub conductance: f64,
    pub source: SourceTerm,
    pub length: Rational,
    pub half_height: Rational,
    pub nx: usize,
    pub ny: usize,
    pub solver: SolveOptions,
}

impl LimitProblemSpec {
    fn domain(&self) -> DomainSpec {
        DomainSpec {
            length: self.length,
            half_height: self.half_height,
            eps: Rational::ONE,
            k: Rational::ONE,
            gamma: Rational::ZERO,
        }
    }

    fn validate(&self, want: Regime) -> Result<()> {
        if self.regime != want {
            return Err(Error::Validation(format!(
                "limit problem regime mismatch: spec says {}, solver is for {}",
                self.regime, want
            )));
        }
        if want == Regime::A && self.conductance < 0.0 {
            return Err(Error::Validation(format!(
                "regime A needs a nonnegative effective conductance, got {}",
                self.conductance
            )));
        }
        Ok(())
    }
}

fn flat_vi(spec: &LimitProblemSpec, conductance: f64) -> Result<(TwoComponentMesh, ViSolution)> {
    let domain = spec.domain();
    let mesh = build_flat_mesh(&domain, spec.nx, spec.ny)?;
    let h = if conductance == 0.0 {
        InterfaceConductance::none()
    } else {
        InterfaceConductance::constant(conductance)
    };
    let problem = DiscreteViProblem::assemble(
        &mesh,
        &PeriodicCoefficient::constant(spec.tensor),
        &h,
        &spec.source,
        &domain,
    )?;
    let solution = solve_vi_opts(&problem, &spec.solver)?;
    Ok((mesh, solution))
}

/// Regime A: flat-interface Signorini problem with the effective
/// conductance weighting the jump term.
pub fn solve_limit_a(spec: &LimitProblemSpec) -> Result<(TwoComponentMesh, ViSolution)> {
    spec.validate(Regime::A)?;
    flat_vi(spec, spec.conductance)
}

/// Regime B: flat-interface Signorini problem with no interface coupling
/// (also the limit of the `h == 0` variant for every k).
pub fn solve_limit_b(spec: &LimitProblemSpec) -> Result<(TwoComponentMesh, ViSolution)> {
    spec.validate(Regime::B)?;
    flat_vi(spec, 0.0)
}

/// Regime C: perfect transmission, a plain Dirichlet solve on the
/// continuous single-component mesh.
pub fn solve_limit_c(spec: &LimitProblemSpec) -> Result<(TwoComponentMesh, ViSolution)> {
    spec.validate(Regime::C)?;
    let domain = spec.domain();
    let mesh = build_single_mesh(&domain, spec.nx, spec.ny)?;
    let problem = DiscreteViProblem::assemble(
        &mesh,
        &PeriodicCoefficient::constant(spec.tensor),
        &InterfaceConductance::none(),
        &spec.source,
        &domain,
    )?;
    let solution = solve_linear(&problem)?;
    Ok((mesh, solution))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::l2_norms;

    fn base_spec(regime: Regime, conductance: f64, source: SourceTerm) -> LimitProblemSpec {
        LimitProblemSpec {
            regime,
            tensor: Matrix2::identity(),
            conductance,
            source,
            length: Rational::ONE,
            half_height: Rational::ONE,
            nx: 8,
            ny: 4,
            solver: SolveOptions { tol: 1e-12, max_iter: 100_000, ..SolveOptions::default() },
        }
    }

    #[test]
    fn zero_source_gives_zero_everywhere() {
        for regime in [Regime::A, Regime::B, Regime::C] {
            let spec = base_spec(regime, 1.0, SourceTerm::Constant(0.0));
            let (_, sol) = match regime {
                Regime::A => solve_limit_a(&spec).unwrap(),
                Regime::B => solve_limit_b(&spec).unwrap(),
                Regime::C => solve_limit_c(&spec).unwrap(),
            };
            assert!(sol.values.iter().all(|v| v.abs() < 1e-13));
        }
    }

    #[test]
    fn zero_conductance_limit_a_is_limit_b() {
        let spec_a = base_spec(Regime::A, 0.0, SourceTerm::SplitSign(-1.0));
        let (_, ua) = solve_limit_a(&spec_a).unwrap();
        let spec_b = base_spec(Regime::B, 0.0, SourceTerm::SplitSign(-1.0));
        let (_, ub) = solve_limit_b(&spec_b).unwrap();
        for (a, b) in ua.values.iter().zip(&ub.values) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn regime_mismatch_rejected() {
        let spec = base_spec(Regime::B, 0.0, SourceTerm::Constant(1.0));
        assert!(solve_limit_a(&spec).is_err());
        assert!(solve_limit_c(&spec).is_err());
    }

    #[test]
    fn locking_split_sign_saturates_the_constraint() {
        // +c below / -c above presses the jump shut: every interior pair
        // is active and the solution agrees with perfect transmission
        let spec = base_spec(Regime::B, 0.0, SourceTerm::SplitSign(1.0));
        let (mesh_b, ub) = solve_limit_b(&spec).unwrap();
        let free_pairs = mesh_b.pairs.len() - 2;
        assert_eq!(ub.active.len(), free_pairs, "all interior pairs active");
        let spec_c = base_spec(Regime::C, 0.0, SourceTerm::SplitSign(1.0));
        let (mesh_c, uc) = solve_limit_c(&spec_c).unwrap();
        let err = crate::fields::l2_error_on_mesh(&mesh_b, &ub.values, &mesh_c, &uc.values)
            .unwrap();
        assert!(err < 1e-9, "locked Signorini equals transmission, err {err}");
    }

    #[test]
    fn opening_split_sign_leaves_constraint_inactive() {
        // -c below / +c above opens the jump: the VI solution equals the
        // unconstrained (insulated) linear solve
        let spec = base_spec(Regime::B, 0.0, SourceTerm::SplitSign(-1.0));
        let (mesh, ub) = solve_limit_b(&spec).unwrap();
        assert!(ub.active.is_empty());
        let domain = spec.domain();
        let problem = DiscreteViProblem::assemble(
            &mesh,
            &PeriodicCoefficient::constant(spec.tensor),
            &InterfaceConductance::none(),
            &spec.source,
            &domain,
        )
        .unwrap();
        let lin = solve_linear(&problem).unwrap();
        for (a, b) in ub.values.iter().zip(&lin.values) {
            assert!((a - b).abs() < 1e-9);
        }
        // jump strictly positive along the interior interface
        for p in &ub.pair_status[1..ub.pair_status.len() - 1] {
            assert!(p.jump > 0.0);
        }
    }

    #[test]
    fn transmission_solution_symmetry() {
        // even source, diagonal tensor: solution even under x1 -> L - x1
        let spec = base_spec(Regime::C, 0.0, SourceTerm::Constant(1.0));
        let (mesh, sol) = solve_limit_c(&spec).unwrap();
        for (v, p) in mesh.nodes.iter().enumerate() {
            let mirrored = [1.0 - p[0], p[1]];
            let mv = mesh
                .nodes
                .iter()
                .position(|q| (q[0] - mirrored[0]).abs() < 1e-12 && (q[1] - mirrored[1]).abs() < 1e-12)
                .unwrap();
            assert!((sol.values[v] - sol.values[mv]).abs() < 1e-9);
        }
    }

    #[test]
    fn penalty_sweep_approaches_transmission() {
        // limit-A conductance 10^0..10^6: gap to the limit-C solution
        // decreases monotonically
        let source = SourceTerm::SplitSign(-1.0);
        let spec_c = base_spec(Regime::C, 0.0, source);
        let (mesh_c, uc) = solve_limit_c(&spec_c).unwrap();
        let mut last = f64::INFINITY;
        for p in 0..=6 {
            let h = libm::pow(10.0, p as f64);
            let spec = base_spec(Regime::A, h, source);
            let (mesh_a, ua) = solve_limit_a(&spec).unwrap();
            let gap =
                crate::fields::l2_error_on_mesh(&mesh_a, &ua.values, &mesh_c, &uc.values).unwrap();
            assert!(gap < last, "gap {gap} at h={h} not below {last}");
            last = gap;
        }
        assert!(last < 2e-2, "final gap {last}");
    }

    #[test]
    fn limit_norms_are_finite_and_positive() {
        let spec = base_spec(Regime::B, 0.0, SourceTerm::SplitSign(-1.0));
        let (mesh, sol) = solve_limit_b(&spec).unwrap();
        let norms = l2_norms(&mesh, &sol.values);
        assert!(norms.l2 > 0.0 && norms.l2.is_finite());
        assert!(norms.h1_total() > 0.0);
        assert!(norms.jump_l2 > 0.0);
    }
}
