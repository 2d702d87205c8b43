//! Implementations behind the CLI subcommands, separated from argument
//! parsing so tests can call them directly.

use crate::config::ScenarioConfig;
use crate::{dump, report, CliError};
use sighom_core::assemble::{apply_dirichlet, DiscreteViProblem};
use sighom_core::cell::build_cell_mesh;
use sighom_core::homogenize::{homogenized_data, EffectiveConductance, Regime};
use sighom_core::mesh::build_rough_mesh;
use sighom_core::rational::Rational;
use sighom_core::sweep::{
    finish_report, prepare, run_row, verify_apriori, CheckOutcome, LimitOverride, RowFailure,
    SweepReport,
};
use sighom_core::vi::{solve_vi_opts, JumpCoordinateMap, SolveOptions, StartPoint};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn eps_tag(eps: Rational) -> String {
    format!("{}_{}", eps.num(), eps.den())
}

/// Homogenized tensor, certificate, effective conductance and regime.
pub fn cmd_cell(cfg: &ScenarioConfig, out_dir: &Path) -> Result<String, CliError> {
    let s = &cfg.scenario;
    let cell = build_cell_mesh(s.cell_n)?;
    let data = homogenized_data(&s.coeff, &cell, &s.conductance, &s.profile, s.k, s.gamma)?;
    let mut text = String::new();
    let _ = writeln!(text, "scenario {}", s.id);
    let _ = writeln!(text, "regime {}", data.regime);
    let _ = writeln!(text, "a0 {:e} {:e}", data.tensor.a[0][0], data.tensor.a[0][1]);
    let _ = writeln!(text, "a0 {:e} {:e}", data.tensor.a[1][0], data.tensor.a[1][1]);
    let _ = writeln!(text, "quad_min {:e}", data.quad_min);
    let _ = writeln!(text, "norm_max {:e}", data.norm_max);
    match data.conductance {
        Some(EffectiveConductance::Value(v)) => {
            let _ = writeln!(text, "h_gamma_k {v:e}");
        }
        Some(EffectiveConductance::Vanishing) => {
            let _ = writeln!(text, "h_gamma_k vanishing");
        }
        None => {
            let _ = writeln!(text, "h_gamma_k none (no effective conductance in case C)");
        }
    }
    ensure_dir(out_dir)?;
    write_file(&out_dir.join(format!("{}-cell.txt", s.id)), &text)?;
    Ok(text)
}

/// One rough-interface solve; writes the mesh and solution dumps.
pub fn cmd_solve_eps(
    cfg: &ScenarioConfig,
    eps: Rational,
    out_dir: &Path,
) -> Result<String, CliError> {
    let s = &cfg.scenario;
    let domain = s.domain_for(eps);
    let mesh = build_rough_mesh(&domain, &s.profile, s.nx_per_period, s.ny)?;
    let problem =
        DiscreteViProblem::assemble(&mesh, &s.coeff, &s.conductance, &s.source, &domain)?;
    let opts = SolveOptions {
        tol: s.solver.tol,
        max_iter: s.solver.max_iter,
        relaxation: s.solver.relaxation,
        start: StartPoint::ClampedUnconstrained,
        record_energy: false,
    };
    let solution = solve_vi_opts(&problem, &opts)?;
    ensure_dir(out_dir)?;
    let tag = eps_tag(eps);
    let mesh_path = out_dir.join(format!("{}-mesh-{tag}.txt", s.id));
    let sol_path = out_dir.join(format!("{}-solution-{tag}.txt", s.id));
    write_file(&mesh_path, &dump::write_mesh(&mesh))?;
    write_file(&sol_path, &dump::write_solution(&solution))?;
    let mut summary = String::new();
    let _ = writeln!(summary, "scenario {} eps {}", s.id, eps);
    let _ = writeln!(
        summary,
        "dofs {} pairs {} active {} iterations {}",
        problem.n_free(),
        mesh.pairs.len(),
        solution.active.len(),
        solution.iterations
    );
    let _ = writeln!(
        summary,
        "comp_residual {:e} energy_defect {:e}",
        solution.comp_residual,
        problem.energy_residual(&solution.values)
    );
    let _ = writeln!(summary, "wrote {}", mesh_path.display());
    let _ = writeln!(summary, "wrote {}", sol_path.display());
    Ok(summary)
}

/// Full sweep: per-eps rows (optionally in parallel), a-priori checks, CSV
/// and SVG artifacts. Returns the report, checks and written paths.
pub fn cmd_sweep(
    cfg: &ScenarioConfig,
    out_dir: &Path,
    threads: usize,
) -> Result<(SweepReport, Vec<CheckOutcome>, PathBuf, PathBuf), CliError> {
    let s = &cfg.scenario;
    let ctx = prepare(s, LimitOverride::Matched)?;
    let eps_list = s.eps_list.clone();
    let results: Vec<(Rational, Result<sighom_core::sweep::SweepRow, sighom_core::Error>)> =
        if threads <= 1 {
            eps_list.iter().map(|&eps| (eps, run_row(&ctx, eps))).collect()
        } else {
            // deterministic ordered merge: workers take strided slots
            let mut slots: Vec<Option<(Rational, _)>> = (0..eps_list.len()).map(|_| None).collect();
            std::thread::scope(|scope| {
                let mut handles = Vec::new();
                for worker in 0..threads.min(eps_list.len()) {
                    let ctx = &ctx;
                    let eps_list = &eps_list;
                    handles.push(scope.spawn(move || {
                        let mut mine = Vec::new();
                        let mut idx = worker;
                        while idx < eps_list.len() {
                            let eps = eps_list[idx];
                            mine.push((idx, eps, run_row(ctx, eps)));
                            idx += threads;
                        }
                        mine
                    }));
                }
                for handle in handles {
                    for (idx, eps, res) in handle.join().expect("sweep worker panicked") {
                        slots[idx] = Some((eps, res));
                    }
                }
            });
            slots.into_iter().map(|s| s.expect("missing sweep row")).collect()
        };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (eps, res) in results {
        match res {
            Ok(row) => rows.push(row),
            Err(error) => failures.push(RowFailure { eps, error }),
        }
    }
    let report = finish_report(&ctx, rows, failures)?;
    let checks = verify_apriori(&report, &s.checks);
    ensure_dir(out_dir)?;
    let csv_path = out_dir.join(format!("{}.csv", s.id));
    let svg_path = out_dir.join(format!("{}.svg", s.id));
    write_file(&csv_path, &report::write_csv(&report))?;
    write_file(&svg_path, &report::write_svg(&report))?;
    Ok((report, checks, csv_path, svg_path))
}

/// One named verification outcome for `verify`.
#[derive(Debug)]
pub struct VerifyCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Recomputes complementarity and the energy identity from a solution dump
/// against the problem rebuilt from the config.
pub fn cmd_verify(
    cfg: &ScenarioConfig,
    eps: Rational,
    dump_path: &Path,
) -> Result<Vec<VerifyCheck>, CliError> {
    let s = &cfg.scenario;
    let domain = s.domain_for(eps);
    let mesh = build_rough_mesh(&domain, &s.profile, s.nx_per_period, s.ny)?;
    let problem =
        DiscreteViProblem::assemble(&mesh, &s.coeff, &s.conductance, &s.source, &domain)?;
    let text = fs::read_to_string(dump_path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", dump_path.display())))?;
    let parsed = dump::parse_solution(&text)?;
    if parsed.values.len() != mesh.node_count() {
        return Err(CliError::Io(format!(
            "dump has {} field values, mesh has {} nodes",
            parsed.values.len(),
            mesh.node_count()
        )));
    }
    if parsed.pairs.len() != mesh.pairs.len() {
        return Err(CliError::Io(format!(
            "dump has {} pair lines, mesh has {} pairs",
            parsed.pairs.len(),
            mesh.pairs.len()
        )));
    }

    let u = &parsed.values;
    let scale_u = 1.0 + u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-8;

    let mut checks = Vec::new();

    // Dirichlet values
    let mut worst_boundary = 0.0f64;
    for (v, flag) in mesh.boundary.iter().enumerate() {
        if *flag {
            worst_boundary = worst_boundary.max(u[v].abs());
        }
    }
    checks.push(VerifyCheck {
        name: "boundary_zero",
        passed: worst_boundary <= tol * scale_u,
        detail: format!("max |u| on boundary = {worst_boundary:e}"),
    });

    // recompute jump-coordinate residuals
    let red = apply_dirichlet(&problem);
    let map = JumpCoordinateMap::new(red.n, &red.free_pairs);
    let total = red.stiffness.add(&red.coupling);
    let a = map.transform_matrix(&total);
    let f = map.transform_load(&red.load);
    let u_red: Vec<f64> = problem.free.iter().map(|&v| u[v]).collect();
    let z = map.to_jump(&u_red);
    let az = a.mul_vec_alloc(&z);
    let scale_f = 1.0 + f.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut jump_mismatch = 0.0f64;
    let mut mult_mismatch = 0.0f64;
    let mut feas = 0.0f64;
    let mut dual = 0.0f64;
    let mut product = 0.0f64;
    let mut pinned_nonzero = 0.0f64;
    for &(pid, _, slot) in &map.pairs {
        let jump = z[slot];
        let mu = az[slot] - f[slot];
        let dumped = &parsed.pairs[pid];
        jump_mismatch = jump_mismatch.max((dumped.jump - jump).abs());
        mult_mismatch = mult_mismatch.max((dumped.multiplier - mu).abs());
        feas = feas.min(jump.min(dumped.jump));
        dual = dual.min(mu.min(dumped.multiplier));
        product = product.max((jump * mu).abs());
        let _ = feas;
    }
    for (pid, p) in problem.pairs.iter().enumerate() {
        if p.free_slots.is_none() {
            let dumped = &parsed.pairs[pid];
            pinned_nonzero = pinned_nonzero
                .max(dumped.jump.abs())
                .max((u[p.plus_full] - u[p.minus_full]).abs());
        }
    }
    let mut min_jump = f64::INFINITY;
    let mut min_mult = f64::INFINITY;
    for &(pid, _, slot) in &map.pairs {
        min_jump = min_jump.min(z[slot].min(parsed.pairs[pid].jump));
        min_mult = min_mult.min((az[slot] - f[slot]).min(parsed.pairs[pid].multiplier));
    }
    if map.pairs.is_empty() {
        min_jump = 0.0;
        min_mult = 0.0;
    }

    checks.push(VerifyCheck {
        name: "pair_table_consistent",
        passed: jump_mismatch <= tol * scale_u && mult_mismatch <= tol * scale_f
            && pinned_nonzero <= tol * scale_u,
        detail: format!(
            "max jump mismatch {jump_mismatch:e}, max multiplier mismatch {mult_mismatch:e}"
        ),
    });
    checks.push(VerifyCheck {
        name: "feasibility",
        passed: min_jump >= -tol * scale_u,
        detail: format!("min jump = {min_jump:e}"),
    });
    checks.push(VerifyCheck {
        name: "dual_feasibility",
        passed: min_mult >= -tol * scale_f,
        detail: format!("min multiplier = {min_mult:e}"),
    });
    checks.push(VerifyCheck {
        name: "complementarity",
        passed: product <= tol * scale_u * scale_f,
        detail: format!("max |jump * multiplier| = {product:e}"),
    });
    let defect = problem.energy_residual(u);
    checks.push(VerifyCheck {
        name: "energy_identity",
        passed: defect <= 1e-8,
        detail: format!("normalized defect = {defect:e}"),
    });
    Ok(checks)
}

/// The regime letter a config classifies into (helper for messages).
pub fn regime_of(cfg: &ScenarioConfig) -> Result<Regime, CliError> {
    Ok(sighom_core::homogenize::classify_regime(
        cfg.scenario.k,
        cfg.scenario.gamma,
    )?)
}
