use clap::{Parser, Subcommand};
use sighom_cli::commands;
use sighom_cli::config;
use sighom_cli::CliError;
use sighom_core::rational::Rational;
use std::path::PathBuf;
use std::process::ExitCode;

/// Rough-interface Signorini transmission problems: eps-level solves,
/// homogenized limits and convergence sweeps.
#[derive(Parser)]
#[command(name = "sighom", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the homogenized tensor, effective conductance and regime
    Cell {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides SIGHOM_OUT_DIR and the config)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the rough-interface problem at one scale and dump the solution
    SolveEps {
        #[arg(long)]
        config: PathBuf,
        /// Scale as a rational, e.g. 1/8
        #[arg(long)]
        eps: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the eps sweep, check the a-priori diagnostics, emit CSV and SVG
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for the sweep rows
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Recheck complementarity and the energy identity of a solution dump
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        eps: String,
        /// Solution dump written by solve-eps
        dump: PathBuf,
    },
}

fn out_dir(flag: Option<PathBuf>, cfg: &config::ScenarioConfig) -> PathBuf {
    if let Some(dir) = flag {
        return dir;
    }
    if let Ok(dir) = std::env::var("SIGHOM_OUT_DIR") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from(&cfg.out_dir)
}

fn parse_eps(raw: &str) -> Result<Rational, CliError> {
    let eps = Rational::parse(raw).map_err(|e| CliError::Validation(e.to_string()))?;
    if !eps.is_positive() {
        return Err(CliError::Validation(format!("eps must be positive, got {eps}")));
    }
    Ok(eps)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Cell { config, out } => {
            let cfg = config::load(&config)?;
            let dir = out_dir(out, &cfg);
            let text = commands::cmd_cell(&cfg, &dir)?;
            print!("{text}");
            Ok(ExitCode::SUCCESS)
        }
        Command::SolveEps { config, eps, out } => {
            let cfg = config::load(&config)?;
            let eps = parse_eps(&eps)?;
            let dir = out_dir(out, &cfg);
            let summary = commands::cmd_solve_eps(&cfg, eps, &dir)?;
            print!("{summary}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, out, threads } => {
            let cfg = config::load(&config)?;
            let dir = out_dir(out, &cfg);
            let (report, checks, csv, svg) = commands::cmd_sweep(&cfg, &dir, threads.max(1))?;
            println!(
                "scenario {} regime {} rows {} (of {})",
                report.scenario,
                report.regime,
                report.rows.len(),
                report.rows.len() + report.failures.len()
            );
            for failure in &report.failures {
                println!("row eps {} failed: {}", failure.eps, failure.error);
            }
            for row in &report.rows {
                println!(
                    "eps {} dofs {} grad {:e} jump {:e} err {:e} active {:.3} iters {}",
                    row.eps,
                    row.dofs,
                    row.grad_norm,
                    row.jump_norm,
                    row.l2_error,
                    row.active_fraction,
                    row.iterations
                );
            }
            let mut all_passed = true;
            for check in &checks {
                println!(
                    "check {}: {} ({})",
                    check.name,
                    if check.passed { "PASS" } else { "FAIL" },
                    check.detail
                );
                all_passed &= check.passed;
            }
            println!("wrote {}", csv.display());
            println!("wrote {}", svg.display());
            if all_passed {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::Verify { config, eps, dump } => {
            let cfg = config::load(&config)?;
            let eps = parse_eps(&eps)?;
            let checks = commands::cmd_verify(&cfg, eps, &dump)?;
            let mut all_passed = true;
            for check in &checks {
                println!(
                    "check {}: {} ({})",
                    check.name,
                    if check.passed { "PASS" } else { "FAIL" },
                    check.detail
                );
                all_passed &= check.passed;
            }
            if all_passed {
                println!("verify: PASS");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("verify: FAIL");
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
