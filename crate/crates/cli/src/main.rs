//! Batch front end: reads a JSON problem description, runs the requested
//! pipeline and writes machine-readable reports plus plot-ready traces.
//!
//! Exit codes: 0 success / invariant / witness found; 1 malformed input or
//! internal error; 2 not parabolic or not invariant; 3 inconclusive;
//! 4 stability gate rejection; 5 falsification budget exhausted.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use parinv_core::criterion::{check_theorem, layer_criterion, structural_check};
use parinv_core::error::Error;
use parinv_core::export::{write_field_binary, write_trace_csv};
use parinv_core::parabolicity::{petrovskii_margin, MarginSampling};
use parinv_core::simulate::{
    counterexample_init, falsify, random_in_body, run_monitored, stability_gate, BumpSpec,
    Scheme, SolutionField,
};

use parinv_cli::config::{InitialDoc, Problem};
use parinv_cli::report;

#[derive(Parser)]
#[command(name = "parinv", version, about = "Invariance analysis for linear parabolic systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON problem description.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for reports and traces.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the config's random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's alignment tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the Petrovskii parabolicity margin.
    Parabolicity(CommonArgs),
    /// Decide invariance by the eigenvector criterion (plus shortcuts).
    Check(CommonArgs),
    /// Integrate initial data and monitor the body violation.
    Simulate(CommonArgs),
    /// Search for initial data that exit a non-invariant body.
    Falsify(CommonArgs),
}

fn load(args: &CommonArgs) -> Result<Problem, Error> {
    let raw = fs::read_to_string(&args.config)
        .map_err(|e| Error::input(format!("cannot read {}: {e}", args.config.display())))?;
    let mut problem = Problem::parse(&raw)?;
    if let Some(seed) = args.seed {
        problem.seed = seed;
    }
    if let Some(tol) = args.tol {
        problem.tolerance = tol;
    }
    fs::create_dir_all(&args.out)
        .map_err(|e| Error::input(format!("cannot create {}: {e}", args.out.display())))?;
    Ok(problem)
}

fn write_report<T: serde::Serialize>(out_dir: &Path, report: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Io(format!("report serialization failed: {e}")))?;
    fs::write(out_dir.join("report.json"), text)?;
    Ok(())
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(1)
}

fn margin_sampling(problem: &Problem) -> MarginSampling {
    MarginSampling {
        sigma_resolution: problem.sigma_resolution,
        x_points: problem.grid.x_points.clone(),
        t_points: problem.grid.t_points.clone(),
        refine_rounds: 6,
    }
}

fn cmd_parabolicity(args: &CommonArgs) -> ExitCode {
    let problem = match load(args) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let report = match petrovskii_margin(&problem.system, &margin_sampling(&problem)) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let out = report::ParabolicityOut {
        schema: "parinv/parabolicity/v1".into(),
        margin: report.margin,
        parabolic: report.parabolic,
        report: report.clone(),
        config_echo: problem.raw.clone(),
    };
    if let Err(e) = write_report(&args.out, &out) {
        return fail(&e);
    }
    println!("margin = {:.6e}, parabolic = {}", report.margin, report.parabolic);
    if report.parabolic {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn cmd_check(args: &CommonArgs) -> ExitCode {
    let problem = match load(args) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let body = match problem.require_body() {
        Ok(b) => b,
        Err(e) => return fail(&e),
    };
    let margin = match petrovskii_margin(&problem.system, &margin_sampling(&problem)) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let warning = (!margin.parabolic).then(|| {
        format!(
            "system is not uniformly parabolic (sampled margin {:.3e}); verdicts are formal",
            margin.margin
        )
    });
    if let Some(w) = &warning {
        eprintln!("warning: {w}");
    }

    let generic = match check_theorem(&problem.system, body, &problem.grid, problem.tolerance) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let structural = if problem.system.time_dependent() {
        None
    } else {
        match structural_check(&problem.system, body, &problem.grid, problem.tolerance) {
            Ok(v) => v,
            Err(e) => return fail(&e),
        }
    };
    let layer = if problem.system.time_dependent() {
        match layer_criterion(&problem.system, body, &problem.grid, problem.tolerance) {
            Ok(v) => Some(v),
            Err(e) => return fail(&e),
        }
    } else {
        None
    };

    let paths_agree = structural.as_ref().map(|s| s.status == generic.status);
    // When a structural shortcut exists it is authoritative (curved bodies
    // are sampled only for cross-validation on the generic path).
    let decisive = structural.as_ref().unwrap_or(&generic).clone();
    let out = report::CheckOut {
        schema: "parinv/check/v1".into(),
        status: format!("{:?}", decisive.status),
        generic: generic.clone(),
        structural,
        paths_agree,
        layer,
        parabolicity_margin: margin.margin,
        warning,
        config_echo: problem.raw.clone(),
    };
    if let Err(e) = write_report(&args.out, &out) {
        return fail(&e);
    }
    println!("status = {:?}", decisive.status);
    if paths_agree == Some(false) {
        eprintln!("error: structural and generic verdicts disagree; this is an internal error");
        return ExitCode::from(1);
    }
    ExitCode::from(decisive.exit_code() as u8)
}

fn build_initial(problem: &Problem) -> Result<SolutionField, Error> {
    let sim = problem.require_sim()?;
    let body = problem.require_body()?;
    let spec = problem
        .initial
        .as_ref()
        .ok_or_else(|| Error::input("simulate needs an 'initial' section in the config"))?;
    match spec {
        InitialDoc::Constant { value } => {
            if value.len() != problem.system.order() {
                return Err(Error::input("initial value length must equal m"));
            }
            Ok(SolutionField::constant(
                sim.grid.clone(),
                &nalgebra::DVector::from_row_slice(value),
            ))
        }
        InitialDoc::Bump {
            a,
            nu,
            tau,
            alpha,
            beta,
            y,
            r,
        } => counterexample_init(
            body,
            &nalgebra::DVector::from_row_slice(a),
            &nalgebra::DVector::from_row_slice(nu),
            &nalgebra::DVector::from_row_slice(tau),
            &BumpSpec {
                alpha: alpha.clone(),
                beta: beta.clone(),
                y: y.clone(),
                r: *r,
            },
            &sim.grid,
        ),
        InitialDoc::RandomInBody { modes, amplitude } => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(problem.seed);
            random_in_body(
                body,
                &sim.grid,
                &mut rng,
                modes.unwrap_or(3),
                amplitude.unwrap_or(0.5),
            )
        }
    }
}

fn cmd_simulate(args: &CommonArgs) -> ExitCode {
    let problem = match load(args) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let sim = match problem.require_sim() {
        Ok(s) => s.clone(),
        Err(e) => return fail(&e),
    };
    let body = match problem.require_body() {
        Ok(b) => b.clone(),
        Err(e) => return fail(&e),
    };
    // The gate runs first so a rejected step size gets its dedicated exit
    // code and a usable suggestion.
    let gate = match stability_gate(&problem.system, &sim) {
        Ok(g) => g,
        Err(e) => return fail(&e),
    };
    if sim.scheme == Scheme::ExplicitCentral && !gate.ok {
        eprintln!(
            "error: stability gate rejected dt = {:.3e}; use dt <= {:.3e} \
             (Lambda = {:.3e}, dx = {:.3e})",
            sim.dt, gate.dt_limit, gate.lambda, gate.dx_min
        );
        return ExitCode::from(4);
    }
    let psi = match build_initial(&problem) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let started = Instant::now();
    let outcome = match run_monitored(&problem.system, &psi, &body, &sim) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let trace_path = args.out.join("trace.csv");
    if let Err(e) = write_trace_csv(&trace_path, &outcome.trace) {
        return fail(&e);
    }
    let out = report::SimulateOut {
        schema: "parinv/simulate/v1".into(),
        max_violation: outcome.max_violation,
        solver_tolerance: outcome.solver_tolerance,
        within_tolerance: outcome.max_violation <= outcome.solver_tolerance,
        gate,
        runtime_s: started.elapsed().as_secs_f64(),
        trace_path: trace_path.display().to_string(),
        config_echo: problem.raw.clone(),
    };
    if let Err(e) = write_report(&args.out, &out) {
        return fail(&e);
    }
    println!(
        "max violation = {:.6e} (solver tolerance {:.6e})",
        outcome.max_violation, outcome.solver_tolerance
    );
    ExitCode::SUCCESS
}

fn cmd_falsify(args: &CommonArgs) -> ExitCode {
    let problem = match load(args) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let sim = match problem.require_sim() {
        Ok(s) => s.clone(),
        Err(e) => return fail(&e),
    };
    let body = match problem.require_body() {
        Ok(b) => b.clone(),
        Err(e) => return fail(&e),
    };
    let started = Instant::now();
    let report = match falsify(&problem.system, &body, &sim, problem.falsify_budget, problem.seed)
    {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let runtime_s = started.elapsed().as_secs_f64();

    match report.witness {
        Some(w) => {
            let trace_path = args.out.join("trace.csv");
            let bin_path = args.out.join("witness.bin");
            let json_path = args.out.join("witness.json");
            if let Err(e) = write_trace_csv(&trace_path, &w.trace) {
                return fail(&e);
            }
            if let Err(e) = write_field_binary(&bin_path, &json_path, &w.initial, sim.dt) {
                return fail(&e);
            }
            let out = report::FalsifyOut {
                schema: "parinv/falsify/v1".into(),
                found: true,
                candidate: Some(w.candidate),
                first_exit: Some(w.first_exit),
                exit_margin: Some(w.exit_margin),
                threshold: report.threshold,
                candidates_tried: report.candidates_tried,
                runtime_s,
                trace_path: Some(trace_path.display().to_string()),
                witness_paths: Some((
                    bin_path.display().to_string(),
                    json_path.display().to_string(),
                )),
                config_echo: problem.raw.clone(),
            };
            if let Err(e) = write_report(&args.out, &out) {
                return fail(&e);
            }
            println!(
                "witness found: candidate {} exits at t = {:.4e} with margin {:.4e}",
                w.candidate, w.first_exit, w.exit_margin
            );
            ExitCode::SUCCESS
        }
        None => {
            let out = report::FalsifyOut {
                schema: "parinv/falsify/v1".into(),
                found: false,
                candidate: None,
                first_exit: None,
                exit_margin: None,
                threshold: report.threshold,
                candidates_tried: report.candidates_tried,
                runtime_s,
                trace_path: None,
                witness_paths: None,
                config_echo: problem.raw.clone(),
            };
            if let Err(e) = write_report(&args.out, &out) {
                return fail(&e);
            }
            println!(
                "no witness within the {}-candidate budget",
                report.candidates_tried
            );
            ExitCode::from(5)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Parabolicity(args) => cmd_parabolicity(args),
        Command::Check(args) => cmd_check(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Falsify(args) => cmd_falsify(args),
    }
}
