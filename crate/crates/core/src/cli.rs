//! Subcommand implementations: wiring configuration to the checker, solver
//! and oracle, and writing the report/CSV outputs.
//!
//! Exit codes: `check` 0 PASS / 1 FAIL / 2 UNKNOWN; `solve` 1 on
//! non-convergence (partial outputs still written); `compare` 1 when the
//! final-period distance exceeds the threshold; any invalid configuration
//! exits 3.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{HistorySource, InitialGuess, RawConfig, RunConfig};
use crate::error::{Error, Result};
use crate::hypotheses::{full_report, Verdict};
use crate::integrator::{distance_to_periodic, simulate, HistorySegment};
use crate::manufactured::manufactured_spec;
use crate::periodic::{trajectory_norm, PeriodicTrajectory};
use crate::problem::{registry_problem, ProblemSpec, RegistryParams};
use crate::report::{
    distance_csv, format_float, hypothesis_lines, solution_csv, trajectory_csv, write_atomic,
    Report,
};
use crate::solver::{fixed_point_residual, picard_solve, PicardOptions};
use crate::spectral::SpectralField;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

fn registry_params(cfg: &RunConfig) -> RegistryParams {
    RegistryParams {
        omega: cfg.omega,
        tau: cfg.tau,
        xi: cfg.xi,
        alpha: cfg.alpha,
        n_modes: cfg.n_modes,
        m_t: cfg.m_t,
        m_x: cfg.m_x,
        convention: cfg.convention,
        source_model: cfg.source_model,
        delay_interp: cfg.delay_interp,
        a0: cfg.a0,
        a1: cfg.a1,
        big_k: cfg.big_k,
        lip_g: cfg.lip_g,
    }
}

/// Build the problem named by the configuration, applying constant
/// overrides.
pub fn build_problem(cfg: &RunConfig) -> Result<ProblemSpec> {
    let params = registry_params(cfg);
    let mut spec = match cfg.problem.as_str() {
        "manufactured" => {
            let recipe = cfg.recipe.clone().ok_or_else(|| {
                Error::InvalidParameter(
                    "problem = manufactured requires a recipe key".into(),
                )
            })?;
            manufactured_spec(&recipe, cfg.g_amp, &params)?
        }
        name => registry_problem(name, &params)?,
    };
    // explicit declarations beat the registry defaults
    let c = &mut spec.constants;
    if cfg.l1.is_some() {
        c.l1 = cfg.l1;
    }
    if cfg.mu1.is_some() {
        c.mu1 = cfg.mu1;
    }
    if cfg.l2.is_some() {
        c.l2 = cfg.l2;
    }
    if cfg.mu2.is_some() {
        c.mu2 = cfg.mu2;
    }
    if cfg.gamma.is_some() {
        c.gamma = cfg.gamma;
    }
    if let Some(fl) = cfg.f_lipschitz {
        c.f_lipschitz = fl;
    }
    c.validate()?;
    Ok(spec)
}

fn random_trajectory(spec: &ProblemSpec, seed: u64) -> PeriodicTrajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PeriodicTrajectory::from_fn(spec.omega, spec.m_t, |_| {
        SpectralField::new(
            (1..=spec.n_modes)
                .map(|n| rng.random_range(-1.0..1.0) / (n * n) as f64)
                .collect(),
        )
        .expect("finite")
    })
    .expect("validated grid")
}

/// `check`: hypothesis report + exit status from the mild-solution verdict.
pub fn cmd_check(cfg: &RunConfig, out_dir: &Path) -> Result<i32> {
    let spec = build_problem(cfg)?;
    let hr = full_report(&spec)?;
    let mut report = Report::new();
    hypothesis_lines(&hr, &mut report);
    report.extend_config(&cfg.echo("check"));
    write_atomic(&out_dir.join("check_report.txt"), &report.render())?;
    Ok(match hr.mild_verdict() {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Unknown => EXIT_UNKNOWN,
    })
}

/// `solve`: Picard iteration to the periodic solution; solution CSV + run
/// report. Partial outputs and exit 1 on non-convergence.
pub fn cmd_solve(cfg: &RunConfig, out_dir: &Path) -> Result<i32> {
    let spec = build_problem(cfg)?;
    let initial = match cfg.initial {
        InitialGuess::Zero => spec.zero_trajectory(),
        InitialGuess::Random => random_trajectory(&spec, cfg.seed),
    };
    let opts = PicardOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        damping: cfg.damping,
        ..PicardOptions::default()
    };
    let res = picard_solve(&spec, initial, &opts)?;
    write_atomic(
        &out_dir.join("solution.csv"),
        &solution_csv(&res.solution, spec.basis()),
    )?;
    let mut report = Report::new();
    report.push("converged", res.converged.to_string());
    report.push("iterations", res.iterations.to_string());
    report.push_float("residual", res.residual);
    report.push_float(
        "mild_identity_residual",
        crate::solver::neutral_mild_residual(&spec, &res.solution)?,
    );
    // Contraction certificate: without it the iteration still runs, but in
    // the weaker existence regime there is no convergence guarantee.
    match crate::hypotheses::check_mild(&spec) {
        Ok(m) => {
            report.push("contraction_guarantee", m.uniqueness.to_string());
            if m.uniqueness != Verdict::Pass {
                eprintln!(
                    "warning: uniqueness condition not certified; Picard iteration has no \
                     convergence guarantee here"
                );
            }
        }
        Err(_) => report.push("contraction_guarantee", Verdict::Unknown.to_string()),
    }
    report.push_float(
        "solution_norm",
        trajectory_norm(&res.solution, spec.alpha, spec.convention)?,
    );
    for (i, r) in res.contraction_ratios.iter().enumerate() {
        report.push(format!("ratio.{i}"), format_float(*r));
    }
    report.extend_config(&cfg.echo("solve"));
    write_atomic(&out_dir.join("solve_report.txt"), &report.render())?;
    Ok(if res.converged { EXIT_OK } else { EXIT_FAIL })
}

fn default_dt(spec: &ProblemSpec) -> f64 {
    let mut dt = spec.omega / 1000.0;
    let min_delay = [spec.tau, spec.xi]
        .into_iter()
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if min_delay.is_finite() {
        dt = dt.min(min_delay / 4.0);
    }
    dt
}

fn solve_for_reference(spec: &ProblemSpec, cfg: &RunConfig) -> Result<PeriodicTrajectory> {
    let res = picard_solve(
        spec,
        spec.zero_trajectory(),
        &PicardOptions {
            tol: cfg.tol,
            max_iter: cfg.max_iter,
            damping: cfg.damping,
            ..PicardOptions::default()
        },
    )?;
    if !res.converged {
        return Err(Error::InvalidParameter(
            "reference periodic solve did not converge".into(),
        ));
    }
    Ok(res.solution)
}

fn history_for(
    spec: &ProblemSpec,
    cfg: &RunConfig,
    dt: f64,
    reference: Option<&PeriodicTrajectory>,
) -> Result<HistorySegment> {
    let duration = spec.tau.max(spec.xi).max(dt);
    let nodes = (duration / dt).round() as usize + 1;
    match cfg.history {
        HistorySource::Zero => HistorySegment::zero(spec.n_modes, duration, nodes),
        HistorySource::Basis(n) => {
            if n > spec.n_modes {
                return Err(Error::InvalidParameter(format!(
                    "history mode e{n} exceeds n_modes = {}",
                    spec.n_modes
                )));
            }
            HistorySegment::constant(SpectralField::basis(n, spec.n_modes), duration, nodes)
        }
        HistorySource::Periodic => {
            let u_per = reference.ok_or_else(|| {
                Error::InvalidParameter("periodic history needs a reference solution".into())
            })?;
            HistorySegment::from_periodic(u_per, duration, nodes, spec.delay_interp)
        }
    }
}

/// `simulate`: method-of-steps run; trajectory CSV + report.
pub fn cmd_simulate(cfg: &RunConfig, out_dir: &Path) -> Result<i32> {
    let spec = build_problem(cfg)?;
    let dt = cfg.dt.unwrap_or_else(|| default_dt(&spec));
    let horizon = cfg.horizon.unwrap_or(5.0 * spec.omega);
    let reference = if cfg.history == HistorySource::Periodic {
        Some(solve_for_reference(&spec, cfg)?)
    } else {
        None
    };
    let history = history_for(&spec, cfg, dt, reference.as_ref())?;
    let traj = simulate(&spec, &history, horizon, dt)?;
    write_atomic(
        &out_dir.join("trajectory.csv"),
        &trajectory_csv(&traj, spec.basis()),
    )?;
    let mut report = Report::new();
    report.push_float("dt", dt);
    report.push_float("horizon", horizon);
    report.push("steps", (traj.fields.len() - 1).to_string());
    report.push_float(
        "final_l2_norm",
        traj.last().l2_norm(),
    );
    report.extend_config(&cfg.echo("simulate"));
    write_atomic(&out_dir.join("simulate_report.txt"), &report.render())?;
    Ok(EXIT_OK)
}

/// `compare`: simulate against the periodic solution and report per-period
/// distances; exit 0 iff the final-period distance is at or below the
/// threshold.
pub fn cmd_compare(cfg: &RunConfig, out_dir: &Path) -> Result<i32> {
    let spec = build_problem(cfg)?;
    let dt = cfg.dt.unwrap_or_else(|| default_dt(&spec));
    let horizon = cfg.horizon.unwrap_or(20.0 * spec.omega);
    let reference = match &cfg.solution_csv {
        Some(path) => crate::report::load_solution_csv(
            &std::fs::read_to_string(path)?,
            spec.omega,
            spec.n_modes,
        )?,
        None => solve_for_reference(&spec, cfg)?,
    };
    let history = history_for(&spec, cfg, dt, Some(&reference))?;
    let traj = simulate(&spec, &history, horizon, dt)?;
    let distances = distance_to_periodic(
        &traj,
        &reference,
        spec.alpha,
        spec.convention,
        spec.delay_interp,
    )?;
    write_atomic(
        &out_dir.join("trajectory.csv"),
        &trajectory_csv(&traj, spec.basis()),
    )?;
    write_atomic(&out_dir.join("distances.csv"), &distance_csv(&distances))?;
    let final_distance = *distances.last().unwrap_or(&f64::INFINITY);
    let mut report = Report::new();
    report.push_float("dt", dt);
    report.push_float("horizon", horizon);
    report.push("periods", distances.len().to_string());
    report.push_float("final_distance", final_distance);
    report.push_float("threshold", cfg.threshold);
    report.extend_config(&cfg.echo("compare"));
    write_atomic(&out_dir.join("compare_report.txt"), &report.render())?;
    Ok(if final_distance <= cfg.threshold {
        EXIT_OK
    } else {
        EXIT_FAIL
    })
}

/// `manufacture`: validate a recipe, emit the problem bundle and verify the
/// prescribed solution is a fixed point on the configured grid.
pub fn cmd_manufacture(cfg: &RunConfig, out_dir: &Path) -> Result<i32> {
    let recipe = cfg.recipe.clone().ok_or_else(|| {
        Error::InvalidParameter("manufacture requires a recipe key".into())
    })?;
    let params = registry_params(cfg);
    let spec = manufactured_spec(&recipe, cfg.g_amp, &params)?;
    let ustar = recipe.exact_trajectory(spec.omega, spec.m_t, spec.n_modes)?;

    let mut bundle = String::new();
    bundle.push_str("problem = manufactured\n");
    for (k, v) in cfg.echo("manufacture") {
        if k == "problem" {
            continue;
        }
        bundle.push_str(&format!("{k} = {v}\n"));
    }
    write_atomic(&out_dir.join("manufactured_problem.cfg"), &bundle)?;

    let mut report = Report::new();
    report.push("recipe", crate::config::render_recipe(&recipe));
    report.push_float("g_amp", cfg.g_amp);
    if cfg.verify {
        let residual = fixed_point_residual(&spec, &ustar)?;
        report.push_float("fixed_point_residual", residual);
        report.push_float(
            "exact_solution_norm",
            trajectory_norm(&ustar, spec.alpha, spec.convention)?,
        );
    }
    report.extend_config(&cfg.echo("manufacture"));
    write_atomic(&out_dir.join("manufacture_report.txt"), &report.render())?;
    Ok(EXIT_OK)
}

/// Shared entry: parse config + overrides, dispatch, map errors to exit
/// codes and stderr messages.
pub fn run(
    subcommand: &str,
    config_path: Option<&Path>,
    overrides: &[(String, String)],
    out_dir: &Path,
) -> i32 {
    let text = match config_path {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read config {}: {e}", p.display());
                return EXIT_CONFIG;
            }
        },
        None => String::new(),
    };
    let mut raw = match RawConfig::parse(&text) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    // A bundle file is a flat global config layered underneath: the main
    // config and CLI flags override its entries.
    if let Some(bundle_path) = raw.global_value("bundle").map(String::from) {
        if let Err(e) = load_bundle(&mut raw, Path::new(&bundle_path)) {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    }
    for (k, v) in overrides {
        // flags beat both the global and the per-subcommand entries
        raw.set("", k, v);
        raw.set(subcommand, k, v);
    }
    let cfg = match RunConfig::resolve(&raw, subcommand) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let dispatch = match subcommand {
        "check" => cmd_check(&cfg, out_dir),
        "solve" => cmd_solve(&cfg, out_dir),
        "simulate" => cmd_simulate(&cfg, out_dir),
        "compare" => cmd_compare(&cfg, out_dir),
        "manufacture" => cmd_manufacture(&cfg, out_dir),
        other => {
            eprintln!("error: unknown subcommand {other}");
            return EXIT_CONFIG;
        }
    };
    match dispatch {
        Ok(code) => code,
        Err(e @ (Error::Io(_) | Error::Diverged { .. } | Error::NonFiniteState(_))) => {
            eprintln!("error: {e}");
            EXIT_FAIL
        }
        Err(e) => {
            // anything else is a configuration/validation problem
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn load_bundle(raw: &mut RawConfig, path: &Path) -> std::result::Result<(), String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read bundle {}: {e}", path.display()))?;
    let bundle = RawConfig::parse(&text).map_err(|e| format!("bundle {e}"))?;
    raw.merge_defaults(&bundle);
    Ok(())
}
