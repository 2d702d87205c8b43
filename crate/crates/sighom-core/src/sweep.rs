//! The eps-sweep harness: solves the rough-interface problem along a list of
//! decreasing scales, solves the matching limit problem once, and collects
//! norms, errors and diagnostics per row.
//!
//! Convergence is checked as a trend (factor-of-two decay over the sweep),
//! not as a rate: the underlying convergence statement carries no rate.

use crate::assemble::{DiscreteViProblem, SourceTerm};
use crate::coeff::{InterfaceConductance, PeriodicCoefficient};
use crate::error::{Error, Result};
use crate::fields::{l2_error_on_mesh, l2_norms};
use crate::homogenize::{
    effective_conductance, homogenized_tensor, classify_regime, EffectiveConductance, Regime,
};
use crate::limit::{solve_limit_a, solve_limit_b, solve_limit_c, LimitProblemSpec};
use crate::mesh::{build_rough_mesh, DomainSpec, TwoComponentMesh};
use crate::profile::InterfaceProfile;
use crate::rational::Rational;
use crate::vi::{solve_vi_opts, SolveOptions, StartPoint, ViSolution};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverParams {
    pub tol: f64,
    pub max_iter: usize,
    pub relaxation: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams { tol: 1e-10, max_iter: 500_000, relaxation: 1.5 }
    }
}

/// Thresholds of the a-priori checks: `bound_ratio` encodes "bounded
/// uniformly" as max/median, `decay_factor` the trend requirement
/// last <= factor * first.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckParams {
    pub bound_ratio: f64,
    pub decay_factor: f64,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams { bound_ratio: 3.0, decay_factor: 0.5 }
    }
}

/// Everything needed to run one scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub length: Rational,
    pub half_height: Rational,
    pub k: Rational,
    pub gamma: Rational,
    pub profile: InterfaceProfile,
    pub coeff: PeriodicCoefficient,
    pub conductance: InterfaceConductance,
    pub source: SourceTerm,
    pub nx_per_period: usize,
    pub ny: usize,
    /// Flat-mesh resolution of the limit solve; 0 picks the finest rough
    /// x'-resolution in the sweep.
    pub flat_nx: usize,
    /// Cell-mesh resolution for the homogenized tensor.
    pub cell_n: usize,
    pub eps_list: Vec<Rational>,
    pub solver: SolverParams,
    pub checks: CheckParams,
}

impl Scenario {
    pub fn domain_for(&self, eps: Rational) -> DomainSpec {
        DomainSpec {
            length: self.length,
            half_height: self.half_height,
            eps,
            k: self.k,
            gamma: self.gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_list.len() < 3 {
            return Err(Error::Validation(format!(
                "sweep needs >= 3 scales, got {}",
                self.eps_list.len()
            )));
        }
        for w in self.eps_list.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::Validation(
                    "sweep scales must be strictly decreasing".into(),
                ));
            }
        }
        self.profile.validate()?;
        self.coeff.validate(64)?;
        self.conductance.validate(256)?;
        classify_regime(self.k, self.gamma)?;
        for &eps in &self.eps_list {
            self.domain_for(eps).validate(&self.profile)?;
        }
        if self.cell_n < 4 {
            return Err(Error::Validation("cell_n must be at least 4".into()));
        }
        Ok(())
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            relaxation: self.solver.relaxation,
            start: StartPoint::ClampedUnconstrained,
            record_energy: false,
        }
    }
}

/// Which limit problem the sweep compares against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitOverride {
    /// The limit matching the (k, gamma) regime and the conductance flag.
    Matched,
    /// Deliberately solve the regime-B limit regardless (negative control).
    ForceB,
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub eps: Rational,
    pub dofs: usize,
    pub grad_norm: f64,
    pub jump_norm: f64,
    pub scaled_jump_norm: f64,
    pub l2_error: f64,
    pub active_fraction: f64,
    pub iterations: usize,
    /// `eps^gamma int h [u]^2 dsigma`, the term sent to zero in case B.
    pub interface_energy: f64,
    /// Normalized energy-identity defect of the converged solve.
    pub energy_defect: f64,
}

#[derive(Clone, Debug)]
pub struct RowFailure {
    pub eps: Rational,
    pub error: Error,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub scenario: String,
    /// Regime governing the limit problem actually solved.
    pub regime: Regime,
    pub rows: Vec<SweepRow>,
    pub failures: Vec<RowFailure>,
    pub limit_l2: f64,
    pub limit_grad: f64,
    /// Effective conductance used by the limit (regime A only).
    pub conductance: Option<f64>,
}

/// Prepared limit data shared by all rows of a sweep.
pub struct SweepContext {
    pub scenario: Scenario,
    pub regime: Regime,
    pub limit_mesh: TwoComponentMesh,
    pub limit_solution: ViSolution,
    pub conductance: Option<f64>,
}

/// Solves the limit problem once. The `h == 0` variant routes every k to the
/// regime-B limit.
pub fn prepare(scenario: &Scenario, limit: LimitOverride) -> Result<SweepContext> {
    scenario.validate()?;
    let classified = classify_regime(scenario.k, scenario.gamma)?;
    let mut regime = if scenario.conductance.zero { Regime::B } else { classified };
    if limit == LimitOverride::ForceB {
        regime = Regime::B;
    }
    let cell = crate::cell::build_cell_mesh(scenario.cell_n)?;
    let (tensor, _, _) = homogenized_tensor(&scenario.coeff, &cell)?;
    let conductance = if regime == Regime::A {
        match effective_conductance(
            &scenario.conductance,
            &scenario.profile,
            scenario.k,
            scenario.gamma,
        )? {
            EffectiveConductance::Value(v) => Some(v),
            EffectiveConductance::Vanishing => Some(0.0),
        }
    } else {
        None
    };
    let finest_eps = *scenario.eps_list.last().unwrap();
    let flat_nx = if scenario.flat_nx > 0 {
        scenario.flat_nx
    } else {
        let periods = scenario.domain_for(finest_eps).periods()? as usize;
        periods * scenario.nx_per_period
    };
    let spec = LimitProblemSpec {
        regime,
        tensor,
        conductance: conductance.unwrap_or(0.0),
        source: scenario.source,
        length: scenario.length,
        half_height: scenario.half_height,
        nx: flat_nx,
        ny: scenario.ny,
        solver: scenario.solve_options(),
    };
    let (limit_mesh, limit_solution) = match regime {
        Regime::A => solve_limit_a(&spec)?,
        Regime::B => solve_limit_b(&spec)?,
        Regime::C => solve_limit_c(&spec)?,
    };
    Ok(SweepContext {
        scenario: scenario.clone(),
        regime,
        limit_mesh,
        limit_solution,
        conductance,
    })
}

/// Builds, assembles and solves one row of the sweep.
pub fn run_row(ctx: &SweepContext, eps: Rational) -> Result<SweepRow> {
    let s = &ctx.scenario;
    let domain = s.domain_for(eps);
    let mesh = build_rough_mesh(&domain, &s.profile, s.nx_per_period, s.ny)?;
    let problem =
        DiscreteViProblem::assemble(&mesh, &s.coeff, &s.conductance, &s.source, &domain)?;
    let solution = solve_vi_opts(&problem, &s.solve_options())?;
    let norms = l2_norms(&mesh, &solution.values);
    let l2_error = l2_error_on_mesh(
        &mesh,
        &solution.values,
        &ctx.limit_mesh,
        &ctx.limit_solution.values,
    )?;
    let free_pairs = problem.pairs.iter().filter(|p| p.free_slots.is_some()).count();
    let active_fraction = if free_pairs > 0 {
        solution.active.len() as f64 / free_pairs as f64
    } else {
        0.0
    };
    let interface_energy = problem.coupling.quad_form(&solution.values);
    let energy_defect = problem.energy_residual(&solution.values);
    let scaled_jump_norm =
        libm::pow(domain.eps_f(), 0.5 * domain.gamma_f()) * norms.jump_l2;
    Ok(SweepRow {
        eps,
        dofs: problem.n_free(),
        grad_norm: norms.h1_total(),
        jump_norm: norms.jump_l2,
        scaled_jump_norm,
        l2_error,
        active_fraction,
        iterations: solution.iterations,
        interface_energy,
        energy_defect,
    })
}

pub fn run_sweep(scenario: &Scenario) -> Result<SweepReport> {
    run_sweep_with(scenario, LimitOverride::Matched)
}

/// Runs each scale in order. A failing row is recorded, and the sweep itself
/// fails when fewer than 3 rows succeed.
pub fn run_sweep_with(scenario: &Scenario, limit: LimitOverride) -> Result<SweepReport> {
    let ctx = prepare(scenario, limit)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &eps in &scenario.eps_list {
        match run_row(&ctx, eps) {
            Ok(row) => rows.push(row),
            Err(error) => failures.push(RowFailure { eps, error }),
        }
    }
    finish_report(&ctx, rows, failures)
}

/// Assembles the report from computed rows (used by parallel drivers that
/// run rows themselves).
pub fn finish_report(
    ctx: &SweepContext,
    rows: Vec<SweepRow>,
    failures: Vec<RowFailure>,
) -> Result<SweepReport> {
    if rows.len() < 3 {
        let cause = failures
            .first()
            .map(|f| format!("; first failure at eps={}: {}", f.eps, f.error))
            .unwrap_or_default();
        return Err(Error::Sweep(format!(
            "only {} of {} rows succeeded, need >= 3{cause}",
            rows.len(),
            rows.len() + failures.len()
        )));
    }
    let limit_norms = l2_norms(&ctx.limit_mesh, &ctx.limit_solution.values);
    Ok(SweepReport {
        scenario: ctx.scenario.id.clone(),
        regime: ctx.regime,
        rows,
        failures,
        limit_l2: limit_norms.l2,
        limit_grad: limit_norms.h1_total(),
        conductance: ctx.conductance,
    })
}

/// Outcome of one a-priori diagnostic.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn boundedness(name: &'static str, values: Vec<f64>, ratio: f64) -> CheckOutcome {
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    if max <= 1e-14 {
        return CheckOutcome {
            name,
            passed: true,
            detail: format!("all values zero (max {max:e})"),
        };
    }
    let mut vals = values;
    let med = median(&mut vals);
    let r = max / med.max(1e-300);
    CheckOutcome {
        name,
        passed: r <= ratio,
        detail: format!("max/median = {r:.3} (threshold {ratio})"),
    }
}

fn decay(name: &'static str, first: f64, last: f64, factor: f64) -> CheckOutcome {
    if first <= 1e-14 {
        return CheckOutcome {
            name,
            passed: last <= 1e-14,
            detail: format!("first {first:e}, last {last:e} (zero-level)"),
        };
    }
    CheckOutcome {
        name,
        passed: last <= factor * first,
        detail: format!("last/first = {:.4} (threshold {factor})", last / first),
    }
}

/// Verifies the boundedness and trend diagnostics on a finished report:
/// bounded gradient norms, bounded scaled jump norms, error decay, and the
/// regime-specific jump / interface-energy decay.
pub fn verify_apriori(report: &SweepReport, params: &CheckParams) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    if report.rows.len() < 3 {
        out.push(CheckOutcome {
            name: "rows",
            passed: false,
            detail: format!("only {} rows", report.rows.len()),
        });
        return out;
    }
    let grads: Vec<f64> = report.rows.iter().map(|r| r.grad_norm).collect();
    out.push(boundedness("grad_bounded", grads, params.bound_ratio));
    let scaled: Vec<f64> = report.rows.iter().map(|r| r.scaled_jump_norm).collect();
    out.push(boundedness("scaled_jump_bounded", scaled, params.bound_ratio));
    let first = report.rows.first().unwrap();
    let last = report.rows.last().unwrap();
    out.push(decay(
        "error_decay",
        first.l2_error,
        last.l2_error,
        params.decay_factor,
    ));
    match report.regime {
        Regime::B => {
            // the scaled interface term tends to zero but nothing forces it
            // monotone while the jump still grows toward its limit profile,
            // so the check asks for an overall drop plus a decreasing tail
            let energies: Vec<f64> = report.rows.iter().map(|r| r.interface_energy).collect();
            let first = *energies.first().unwrap();
            let last = *energies.last().unwrap();
            let tail_monotone = energies[1..]
                .windows(2)
                .all(|w| w[1] < w[0] + 1e-14 * (1.0 + w[0].abs()));
            let passed = tail_monotone && (last < first || first <= 1e-14);
            out.push(CheckOutcome {
                name: "interface_energy_decay",
                passed,
                detail: format!("first {first:e}, last {last:e}, tail monotone {tail_monotone}"),
            });
        }
        Regime::C => {
            out.push(decay(
                "jump_decay",
                first.jump_norm,
                last.jump_norm,
                params.decay_factor,
            ));
        }
        Regime::A => {}
    }
    out
}

/// Two-sided cross-mesh error consistency probe: the error evaluated with
/// the rough mesh's quadrature against the limit mesh, and vice versa.
pub fn cross_error_both_ways(
    rough: &TwoComponentMesh,
    rough_field: &[f64],
    limit: &TwoComponentMesh,
    limit_field: &[f64],
) -> Result<(f64, f64)> {
    let a = l2_error_on_mesh(rough, rough_field, limit, limit_field)?;
    let b = l2_error_on_mesh(limit, limit_field, rough, rough_field)?;
    Ok((a, b))
}
