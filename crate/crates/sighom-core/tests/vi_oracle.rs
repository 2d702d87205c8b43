//! Cross-validation of the projected-relaxation solver against the
//! exhaustive active-set oracle on every shipped small mesh, plus the
//! complementarity, energy, scaling and uniqueness invariants.

use sighom_core::assemble::{apply_dirichlet, DiscreteViProblem, SourceTerm};
use sighom_core::coeff::{InterfaceConductance, PeriodicCoefficient};
use sighom_core::mesh::{build_flat_mesh, build_rough_mesh, DomainSpec, TwoComponentMesh};
use sighom_core::profile::InterfaceProfile;
use sighom_core::rational::Rational;
use sighom_core::vi::{
    solve_linear, solve_vi, solve_vi_activeset, solve_vi_opts, SolveOptions, StartPoint,
};
use sighom_core::Error;

struct Case {
    name: &'static str,
    mesh: TwoComponentMesh,
    problem: DiscreteViProblem,
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn rough_case(
    name: &'static str,
    profile: InterfaceProfile,
    k: Rational,
    gamma: Rational,
    coeff: PeriodicCoefficient,
    h: InterfaceConductance,
    source: SourceTerm,
) -> Case {
    // one period across the cross section keeps the pair count at 9; the
    // slowly decaying amplitudes (k = 1/2) need the taller box
    let domain = DomainSpec {
        length: rat(1, 2),
        half_height: Rational::from_int(2),
        eps: rat(1, 2),
        k,
        gamma,
    };
    let mesh = build_rough_mesh(&domain, &profile, 8, 4).unwrap();
    assert!(mesh.pairs.len() <= 12, "{name}: {} pairs", mesh.pairs.len());
    let problem = DiscreteViProblem::assemble(&mesh, &coeff, &h, &source, &domain).unwrap();
    Case { name, mesh, problem }
}

fn flat_case(
    name: &'static str,
    conductance: f64,
    source: SourceTerm,
) -> Case {
    let domain = DomainSpec {
        length: Rational::ONE,
        half_height: Rational::ONE,
        eps: Rational::ONE,
        k: Rational::ONE,
        gamma: Rational::ZERO,
    };
    let mesh = build_flat_mesh(&domain, 8, 4).unwrap();
    let h = if conductance == 0.0 {
        InterfaceConductance::none()
    } else {
        InterfaceConductance::constant(conductance)
    };
    let problem = DiscreteViProblem::assemble(
        &mesh,
        &PeriodicCoefficient::identity(),
        &h,
        &source,
        &domain,
    )
    .unwrap();
    Case { name, mesh, problem }
}

/// Every shipped mesh with at most 12 interface pairs.
fn shipped_cases() -> Vec<Case> {
    vec![
        rough_case(
            "sine-locking",
            InterfaceProfile::sine(),
            rat(1, 1),
            rat(0, 1),
            PeriodicCoefficient::identity(),
            InterfaceConductance::constant(1.0),
            SourceTerm::SplitSign(1.0),
        ),
        rough_case(
            "sine-opening",
            InterfaceProfile::sine(),
            rat(1, 1),
            rat(0, 1),
            PeriodicCoefficient::identity(),
            InterfaceConductance::constant(1.0),
            SourceTerm::SplitSign(-1.0),
        ),
        rough_case(
            "sawtooth-caseA-boundary",
            InterfaceProfile::sawtooth(),
            rat(1, 2),
            rat(1, 2),
            PeriodicCoefficient::layered(2.0, 1.0),
            InterfaceConductance::sine_positive(1.0, 0.5),
            SourceTerm::SplitSign(1.0),
        ),
        rough_case(
            "sine-caseC-scaling",
            InterfaceProfile::sine(),
            rat(1, 1),
            rat(-1, 1),
            PeriodicCoefficient::identity(),
            InterfaceConductance::constant(1.0),
            SourceTerm::SplitSign(-1.0),
        ),
        rough_case(
            "sawtooth-bump-zero-h",
            InterfaceProfile::sawtooth(),
            rat(1, 1),
            rat(1, 1),
            PeriodicCoefficient::identity(),
            InterfaceConductance::none(),
            SourceTerm::Bump(1.0),
        ),
        flat_case("flat-limitA", 1.0, SourceTerm::SplitSign(1.0)),
        flat_case("flat-limitB-opening", 0.0, SourceTerm::SplitSign(-1.0)),
    ]
}

#[test]
fn psor_matches_activeset_oracle_on_all_shipped_meshes() {
    for case in shipped_cases() {
        let psor = solve_vi(&case.problem, 1e-12, 500_000)
            .unwrap_or_else(|e| panic!("{}: psor failed: {e}", case.name));
        let oracle = solve_vi_activeset(&case.problem, 16)
            .unwrap_or_else(|e| panic!("{}: oracle failed: {e}", case.name));
        let mut max_diff = 0.0f64;
        for (a, b) in psor.values.iter().zip(&oracle.values) {
            max_diff = max_diff.max((a - b).abs());
        }
        assert!(
            max_diff <= 1e-9,
            "{}: psor vs oracle max diff {max_diff:e}",
            case.name
        );
        assert_eq!(psor.active, oracle.active, "{}", case.name);
    }
}

#[test]
fn complementarity_triple_on_all_shipped_meshes() {
    for case in shipped_cases() {
        let sol = solve_vi(&case.problem, 1e-12, 500_000).unwrap();
        for status in &sol.pair_status {
            assert!(
                status.jump >= -1e-8,
                "{}: pair {} jump {:e}",
                case.name,
                status.pair,
                status.jump
            );
            assert!(
                status.multiplier >= -1e-8,
                "{}: pair {} multiplier {:e}",
                case.name,
                status.pair,
                status.multiplier
            );
            assert!(
                (status.jump * status.multiplier).abs() <= 1e-8,
                "{}: pair {} product {:e}",
                case.name,
                status.pair,
                status.jump * status.multiplier
            );
        }
        assert!(sol.comp_residual <= 1e-8, "{}", case.name);
    }
}

#[test]
fn energy_identity_on_all_shipped_meshes() {
    for case in shipped_cases() {
        let sol = solve_vi(&case.problem, 1e-12, 500_000).unwrap();
        let defect = case.problem.energy_residual(&sol.values);
        assert!(defect <= 1e-8, "{}: energy defect {defect:e}", case.name);
    }
}

#[test]
fn joint_data_scaling_invariance() {
    let t = 3.7;
    for case in shipped_cases() {
        let base = solve_vi(&case.problem, 1e-12, 500_000).unwrap();
        // rebuild with A, h, f all scaled by t
        let domain = DomainSpec {
            length: rat(1, 2),
            half_height: Rational::ONE,
            eps: rat(1, 2),
            k: rat(1, 1),
            gamma: rat(0, 1),
        };
        let _ = domain;
        let mut scaled_problem = case.problem.clone();
        for v in &mut scaled_problem.stiffness.values {
            *v *= t;
        }
        for v in &mut scaled_problem.coupling.values {
            *v *= t;
        }
        for v in &mut scaled_problem.load {
            *v *= t;
        }
        let scaled = solve_vi(&scaled_problem, 1e-12, 500_000).unwrap();
        for (i, (a, b)) in base.values.iter().zip(&scaled.values).enumerate() {
            assert!(
                (a - b).abs() <= 1e-10,
                "{}: dof {i} moved {:e} under joint scaling",
                case.name,
                (a - b).abs()
            );
        }
    }
}

#[test]
fn uniqueness_probe_two_starts_agree() {
    for case in shipped_cases() {
        let opts = SolveOptions {
            tol: 1e-12,
            max_iter: 500_000,
            relaxation: 1.5,
            start: StartPoint::Zero,
            record_energy: false,
        };
        let from_zero = solve_vi_opts(&case.problem, &opts).unwrap();
        let from_clamped = solve_vi_opts(
            &case.problem,
            &SolveOptions { start: StartPoint::ClampedUnconstrained, ..opts },
        )
        .unwrap();
        let mut max_diff = 0.0f64;
        for (a, b) in from_zero.values.iter().zip(&from_clamped.values) {
            max_diff = max_diff.max((a - b).abs());
        }
        assert!(max_diff <= 1e-8, "{}: starts disagree by {max_diff:e}", case.name);
    }
}

#[test]
fn feasible_linear_solution_equals_vi_solution() {
    // the opening load keeps the unconstrained solution feasible
    let case = flat_case("flat-feasible", 1.0, SourceTerm::SplitSign(-1.0));
    let linear = solve_linear(&case.problem).unwrap();
    assert!(
        linear.pair_status.iter().all(|s| s.jump >= -1e-12),
        "unconstrained solution should be feasible here"
    );
    let vi = solve_vi(&case.problem, 1e-12, 500_000).unwrap();
    let mut max_diff = 0.0f64;
    for (a, b) in vi.values.iter().zip(&linear.values) {
        max_diff = max_diff.max((a - b).abs());
    }
    assert!(max_diff <= 1e-9, "max diff {max_diff:e}");
}

#[test]
fn solve_linear_matches_gaussian_elimination_oracle() {
    let case = flat_case("flat-linear", 1.0, SourceTerm::SplitSign(-1.0));
    let red = apply_dirichlet(&case.problem);
    let total = red.stiffness.add(&red.coupling);
    let n = red.n;
    // independent oracle: plain Gaussian elimination with partial pivoting
    let mut a = total.to_dense();
    let mut b = red.load.clone();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        assert!(d.abs() > 1e-14);
        for r in col + 1..n {
            let factor = a[r * n + col] / d;
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= factor * a[col * n + c];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in r + 1..n {
            acc -= a[r * n + c] * x[c];
        }
        x[r] = acc / a[r * n + r];
    }
    let sol = solve_linear(&case.problem).unwrap();
    for (slot, &full) in case.problem.free.iter().enumerate() {
        assert!(
            (sol.values[full] - x[slot]).abs() <= 1e-9,
            "slot {slot}: {} vs {}",
            sol.values[full],
            x[slot]
        );
    }
}

#[test]
fn pair_budget_is_enforced() {
    // a mesh with more pairs than the budget is rejected up front
    let domain = DomainSpec {
        length: Rational::ONE,
        half_height: Rational::ONE,
        eps: rat(1, 2),
        k: rat(1, 1),
        gamma: rat(0, 1),
    };
    let mesh = build_rough_mesh(&domain, &InterfaceProfile::sine(), 8, 4).unwrap();
    assert!(mesh.pairs.len() > 13);
    let problem = DiscreteViProblem::assemble(
        &mesh,
        &PeriodicCoefficient::identity(),
        &InterfaceConductance::constant(1.0),
        &SourceTerm::SplitSign(1.0),
        &domain,
    )
    .unwrap();
    assert!(matches!(
        solve_vi_activeset(&problem, 12),
        Err(Error::Validation(_))
    ));
}

#[test]
fn locking_load_activates_every_interior_pair() {
    let case = flat_case("flat-locking", 1.0, SourceTerm::SplitSign(1.0));
    let sol = solve_vi(&case.problem, 1e-12, 500_000).unwrap();
    let free = case.mesh.pairs.len() - 2;
    assert_eq!(sol.active.len(), free);
    // multipliers strictly positive inside
    for s in &sol.pair_status[1..case.mesh.pairs.len() - 1] {
        assert!(s.multiplier > 1e-6, "pair {} multiplier {:e}", s.pair, s.multiplier);
    }
}

#[test]
fn mixed_active_inactive_under_one_sided_load() {
    // split-sign restricted to the left half opens the right half of the
    // interface and closes the left: both sets are nonempty
    let domain = DomainSpec {
        length: Rational::ONE,
        half_height: Rational::ONE,
        eps: Rational::ONE,
        k: Rational::ONE,
        gamma: Rational::ZERO,
    };
    let mesh = build_flat_mesh(&domain, 8, 4).unwrap();
    let k = sighom_core::assemble::assemble_stiffness(
        &mesh,
        &PeriodicCoefficient::identity(),
        1.0,
    )
    .unwrap();
    let b = sighom_core::assemble::assemble_interface_coupling(
        &mesh,
        &InterfaceConductance::constant(1.0),
        1.0,
        0.0,
    );
    let base = sighom_core::assemble::assemble_load(&mesh, &SourceTerm::SplitSign(1.0), &domain);
    let load: Vec<f64> = mesh
        .nodes
        .iter()
        .zip(&base)
        .map(|(p, f)| if p[0] < 0.5 { *f } else { -*f })
        .collect();
    let problem = DiscreteViProblem::new(&mesh, k, b, load);
    let psor = solve_vi(&problem, 1e-12, 500_000).unwrap();
    let oracle = solve_vi_activeset(&problem, 16).unwrap();
    assert_eq!(psor.active, oracle.active);
    assert!(!psor.active.is_empty(), "active set empty");
    let inactive_free: Vec<usize> = psor
        .pair_status
        .iter()
        .filter(|s| !s.active && s.jump > 1e-9)
        .map(|s| s.pair)
        .collect();
    assert!(!inactive_free.is_empty(), "no open pairs");
    let mut max_diff = 0.0f64;
    for (a, b) in psor.values.iter().zip(&oracle.values) {
        max_diff = max_diff.max((a - b).abs());
    }
    assert!(max_diff <= 1e-9);
}
