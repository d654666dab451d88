//! The fixed-point operator Q and Picard iteration to the ω-periodic mild
//! solution of the neutral equation.
//!
//! Qu = P[F(·, u, u_τ)] + G(·, u_ξ) - P[AG(·, u_ξ)], with P the periodic
//! solution operator. A fixed point of Q is an ω-periodic mild solution, and
//! when the contraction condition holds, Picard iteration converges to the
//! unique one.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::periodic::{
    mild_identity_residual, periodic_solve, trajectory_norm, PeriodicTrajectory,
};
use crate::problem::{eval_ag, eval_f, eval_g, ProblemSpec};
use crate::spectral::SpectralField;

/// Outcome of a Picard run.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub solution: PeriodicTrajectory,
    /// ‖Q(u) - u‖_{Cα} at the returned iterate.
    pub residual: f64,
    /// Number of Picard updates performed.
    pub iterations: usize,
    /// Per-step ratios ‖u_{k+1}-u_k‖ / ‖u_k-u_{k-1}‖.
    pub contraction_ratios: Vec<f64>,
    pub converged: bool,
}

/// Options for [`picard_solve`].
#[derive(Debug, Clone)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Damping θ ∈ (0,1]: u ← (1-θ)u + θQu. θ = 1 is plain Picard.
    pub damping: f64,
    /// Abort when the iterate norm exceeds this guard.
    pub overflow_guard: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
            damping: 1.0,
            overflow_guard: 1e12,
        }
    }
}

fn forcing_trajectories(
    spec: &ProblemSpec,
    u: &PeriodicTrajectory,
) -> Result<(PeriodicTrajectory, PeriodicTrajectory, PeriodicTrajectory)> {
    let u_tau = u.delayed(spec.tau, spec.delay_interp)?;
    let u_xi = u.delayed(spec.xi, spec.delay_interp)?;
    let m_t = spec.m_t;
    let dt = spec.dt();
    // Pure pointwise evaluations at independent grid times.
    let rows: Vec<(SpectralField, SpectralField, SpectralField)> = (0..m_t)
        .into_par_iter()
        .map(|j| -> Result<_> {
            let t = j as f64 * dt;
            let wrap = |e: Error| Error::Evaluation {
                index: j,
                source: Box::new(e),
            };
            let f = eval_f(spec, u.field(j as isize), u_tau.field(j as isize), t)
                .map_err(wrap)?;
            let g = eval_g(spec, u_xi.field(j as isize), t).map_err(wrap)?;
            let ag = eval_ag(spec, u_xi.field(j as isize), t).map_err(wrap)?;
            Ok((f, g, ag))
        })
        .collect::<Result<_>>()?;
    let mut fs = Vec::with_capacity(m_t);
    let mut gs = Vec::with_capacity(m_t);
    let mut ags = Vec::with_capacity(m_t);
    for (f, g, ag) in rows {
        fs.push(f);
        gs.push(g);
        ags.push(ag);
    }
    Ok((
        PeriodicTrajectory::new(spec.omega, fs)?,
        PeriodicTrajectory::new(spec.omega, gs)?,
        PeriodicTrajectory::new(spec.omega, ags)?,
    ))
}

/// Qu on the problem grid.
pub fn apply_q(spec: &ProblemSpec, u: &PeriodicTrajectory) -> Result<PeriodicTrajectory> {
    let (f_traj, g_traj, ag_traj) = forcing_trajectories(spec, u)?;
    let q1 = periodic_solve(&f_traj, spec.source_model)?;
    let p_ag = periodic_solve(&ag_traj, spec.source_model)?;
    q1.lin_comb(1.0, &g_traj.lin_comb(1.0, &p_ag, -1.0)?, 1.0)
}

/// The compact part Q₁u = P[F(·, u, u_τ)].
pub fn apply_q1(spec: &ProblemSpec, u: &PeriodicTrajectory) -> Result<PeriodicTrajectory> {
    let (f_traj, _, _) = forcing_trajectories(spec, u)?;
    periodic_solve(&f_traj, spec.source_model)
}

/// The contractive part Q₂u = G(·, u_ξ) - P[AG(·, u_ξ)].
pub fn apply_q2(spec: &ProblemSpec, u: &PeriodicTrajectory) -> Result<PeriodicTrajectory> {
    let (_, g_traj, ag_traj) = forcing_trajectories(spec, u)?;
    let p_ag = periodic_solve(&ag_traj, spec.source_model)?;
    g_traj.lin_comb(1.0, &p_ag, -1.0)
}

/// ‖Q(u) - u‖_{Cα}.
pub fn fixed_point_residual(spec: &ProblemSpec, u: &PeriodicTrajectory) -> Result<f64> {
    let qu = apply_q(spec, u)?;
    trajectory_norm(&qu.lin_comb(1.0, u, -1.0)?, spec.alpha, spec.convention)
}

/// Iterate u ← (1-θ)u + θQu from `initial` until the successive difference in
/// ‖·‖_{Cα} drops below `tol` or `max_iter` is reached. Non-convergence is
/// reported, not an error; divergence past the overflow guard aborts.
pub fn picard_solve(
    spec: &ProblemSpec,
    initial: PeriodicTrajectory,
    opts: &PicardOptions,
) -> Result<SolveResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "damping must lie in (0, 1], got {}",
            opts.damping
        )));
    }
    if !initial.same_grid(&spec.zero_trajectory()) {
        return Err(Error::GridMismatch(
            "initial guess is not on the problem grid".into(),
        ));
    }
    let mut u = initial;
    let mut prev_diff: Option<f64> = None;
    let mut ratios = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for k in 0..opts.max_iter {
        let qu = apply_q(spec, &u)?;
        let next = if opts.damping == 1.0 {
            qu
        } else {
            u.lin_comb(1.0 - opts.damping, &qu, opts.damping)?
        };
        let diff = trajectory_norm(
            &next.lin_comb(1.0, &u, -1.0)?,
            spec.alpha,
            spec.convention,
        )?;
        u = next;
        iterations = k + 1;
        if let Some(p) = prev_diff {
            if p > 0.0 && diff.is_finite() {
                ratios.push(diff / p);
            }
        }
        prev_diff = Some(diff);
        let norm = trajectory_norm(&u, spec.alpha, spec.convention)?;
        if !norm.is_finite() || norm > opts.overflow_guard {
            return Err(Error::Diverged {
                iteration: iterations,
                norm,
            });
        }
        if diff <= opts.tol {
            converged = true;
            break;
        }
    }
    let residual = fixed_point_residual(spec, &u)?;
    Ok(SolveResult {
        solution: u,
        residual,
        iterations,
        contraction_ratios: ratios,
        converged,
    })
}

/// Mild-solution defect of a trajectory under the full neutral dynamics:
/// the residual of v = u - G(·,u_ξ) against its forcing F - AG in the
/// one-step identity. Diagnostic used by the CLI report.
pub fn neutral_mild_residual(spec: &ProblemSpec, u: &PeriodicTrajectory) -> Result<f64> {
    let (f_traj, g_traj, ag_traj) = forcing_trajectories(spec, u)?;
    let v = u.lin_comb(1.0, &g_traj, -1.0)?;
    let h = f_traj.lin_comb(1.0, &ag_traj, -1.0)?;
    mild_identity_residual(&v, &h, spec.source_model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manufactured::{manufactured_spec, Recipe};
    use crate::periodic::{InterpRule, SourceModel};
    use crate::problem::{example51, DeclaredConstants, RegistryParams};
    use crate::spectral::Convention;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn constant_forcing_spec() -> ProblemSpec {
        // F(t,·,·) ≡ e_1 via f(x,·) = √2 sin(πx), G ≡ 0.
        ProblemSpec::new(
            1.0,
            0.3,
            0.2,
            0.5,
            8,
            32,
            65,
            Convention::EigenConsistent,
            SourceModel::Spectral,
            InterpRule::Spectral,
            DeclaredConstants {
                a0: Some(0.0),
                a1: Some(0.0),
                big_k: Some(1.0),
                lip_g: Some(0.0),
                f_lipschitz: true,
                ..DeclaredConstants::default()
            },
            Some(Arc::new(|x: f64, _, _, _, _, _| {
                std::f64::consts::SQRT_2 * (PI * x).sin()
            })),
            None,
        )
        .unwrap()
    }

    #[test]
    fn constant_forcing_q_is_constant_map() {
        let spec = constant_forcing_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..3 {
            let u = PeriodicTrajectory::from_fn(1.0, 32, |_| {
                SpectralField::new((0..8).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .unwrap()
            })
            .unwrap();
            let qu = apply_q(&spec, &u).unwrap();
            for f in qu.fields() {
                assert_abs_diff_eq!(f.coeffs()[0], 1.0 / (PI * PI), epsilon = 1e-12);
                for c in &f.coeffs()[1..] {
                    assert_abs_diff_eq!(*c, 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_problem_q_is_zero() {
        let p = RegistryParams {
            n_modes: 8,
            m_t: 16,
            m_x: 65,
            ..RegistryParams::default()
        };
        let spec = crate::problem::heat_decay(&p).unwrap();
        let u = PeriodicTrajectory::from_fn(1.0, 16, |t| {
            SpectralField::basis(2, 8).scale((2.0 * PI * t).cos())
        })
        .unwrap();
        let qu = apply_q(&spec, &u).unwrap();
        assert_eq!(
            trajectory_norm(&qu, 0.5, Convention::EigenConsistent).unwrap(),
            0.0
        );
    }

    #[test]
    fn q_decomposes_into_q1_plus_q2() {
        let spec = example51(&RegistryParams {
            n_modes: 16,
            m_t: 32,
            m_x: 129,
            ..RegistryParams::default()
        })
        .unwrap();
        let u = PeriodicTrajectory::from_fn(1.0, 32, |t| {
            SpectralField::basis(1, 16).scale(0.3 * (2.0 * PI * t).sin())
        })
        .unwrap();
        let q = apply_q(&spec, &u).unwrap();
        let q1 = apply_q1(&spec, &u).unwrap();
        let q2 = apply_q2(&spec, &u).unwrap();
        let sum = q1.lin_comb(1.0, &q2, 1.0).unwrap();
        let diff = q.lin_comb(1.0, &sum, -1.0).unwrap();
        assert!(trajectory_norm(&diff, 0.5, Convention::EigenConsistent).unwrap() <= 1e-14);
    }

    #[test]
    fn picard_on_constant_forcing_converges_in_two_iterations() {
        let spec = constant_forcing_spec();
        let res = picard_solve(&spec, spec.zero_trajectory(), &PicardOptions::default())
            .unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 2);
        for f in res.solution.fields() {
            assert_abs_diff_eq!(f.coeffs()[0], 1.0 / (PI * PI), epsilon = 1e-12);
        }
        assert!(res.residual <= 1e-12);
    }

    #[test]
    fn fixed_point_residual_examples() {
        let p = RegistryParams {
            n_modes: 32,
            m_t: 128,
            m_x: 129,
            ..RegistryParams::default()
        };
        let spec = manufactured_spec(&Recipe::builtin(), 0.01, &p).unwrap();
        let ustar = Recipe::builtin().exact_trajectory(1.0, 128, 32).unwrap();
        // exact manufactured solution: residual at round-off scale
        let r = fixed_point_residual(&spec, &ustar).unwrap();
        assert!(r <= 1e-8, "residual {r}");
        // zero trajectory is far from the fixed point
        let r0 = fixed_point_residual(&spec, &spec.zero_trajectory()).unwrap();
        assert!(r0 > 0.1);
    }

    #[test]
    fn picard_rejects_bad_options() {
        let spec = constant_forcing_spec();
        let z = spec.zero_trajectory();
        assert!(picard_solve(
            &spec,
            z.clone(),
            &PicardOptions {
                tol: 0.0,
                ..PicardOptions::default()
            }
        )
        .is_err());
        assert!(picard_solve(
            &spec,
            z,
            &PicardOptions {
                damping: 1.5,
                ..PicardOptions::default()
            }
        )
        .is_err());
    }

    #[test]
    fn divergence_is_reported() {
        // Massive feedback gain: Picard blows up and must abort cleanly.
        let spec = example51(&RegistryParams {
            a0: 500.0,
            n_modes: 8,
            m_t: 32,
            m_x: 65,
            big_k: 1.0,
            ..RegistryParams::default()
        })
        .unwrap();
        let err = picard_solve(
            &spec,
            spec.zero_trajectory(),
            &PicardOptions {
                max_iter: 400,
                ..PicardOptions::default()
            },
        );
        assert!(matches!(err, Err(Error::Diverged { .. })));
    }

    #[test]
    fn non_convergence_reports_history() {
        // Gain slightly too large to converge within a couple of iterations.
        let spec = example51(&RegistryParams {
            a0: 500.0,
            n_modes: 8,
            m_t: 32,
            m_x: 65,
            big_k: 1.0,
            ..RegistryParams::default()
        })
        .unwrap();
        let res = picard_solve(
            &spec,
            spec.zero_trajectory(),
            &PicardOptions {
                max_iter: 3,
                ..PicardOptions::default()
            },
        )
        .unwrap();
        assert!(!res.converged);
        assert!(!res.contraction_ratios.is_empty());
        assert!(res.contraction_ratios.iter().any(|r| *r > 1.0));
    }

    #[test]
    fn damped_iteration_still_converges() {
        let spec = example51(&RegistryParams {
            n_modes: 16,
            m_t: 64,
            m_x: 129,
            ..RegistryParams::default()
        })
        .unwrap();
        let plain = picard_solve(&spec, spec.zero_trajectory(), &PicardOptions::default())
            .unwrap();
        let damped = picard_solve(
            &spec,
            spec.zero_trajectory(),
            &PicardOptions {
                damping: 0.7,
                ..PicardOptions::default()
            },
        )
        .unwrap();
        assert!(plain.converged && damped.converged);
        let gap = trajectory_norm(
            &plain.solution.lin_comb(1.0, &damped.solution, -1.0).unwrap(),
            0.5,
            Convention::EigenConsistent,
        )
        .unwrap();
        assert!(gap <= 1e-8, "gap {gap}");
    }

    #[test]
    fn translation_equivariance() {
        // Shifting the trajectory and the time dependence of f, g together
        // commutes with Q.
        let base = RegistryParams {
            n_modes: 16,
            m_t: 32,
            m_x: 129,
            ..RegistryParams::default()
        };
        let spec = example51(&base).unwrap();
        let shift_steps = 7isize;
        let s = shift_steps as f64 * spec.dt();
        // same problem with f delayed by s in its explicit time argument
        let (a0, a1, k) = (base.a0, base.a1, base.big_k);
        let f2: crate::problem::FHandle = Arc::new(move |_x, t, v, eta, w, zeta| {
            a0 * (v + eta) + a1 * (w + zeta) + k * (2.0 * PI * (t - s)).sin()
        });
        let spec2 = ProblemSpec::new(
            base.omega,
            base.tau,
            base.xi,
            base.alpha,
            base.n_modes,
            base.m_t,
            base.m_x,
            base.convention,
            base.source_model,
            base.delay_interp,
            spec.constants.clone(),
            Some(f2),
            spec.g_handle.clone(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = PeriodicTrajectory::from_fn(1.0, 32, |_| {
            SpectralField::new(
                (1..=16)
                    .map(|n| rng.random_range(-1.0..1.0) / (n * n) as f64)
                    .collect(),
            )
            .unwrap()
        })
        .unwrap();
        let lhs = apply_q(&spec2, &u.shift(shift_steps)).unwrap();
        let rhs = apply_q(&spec, &u).unwrap().shift(shift_steps);
        let diff = lhs.lin_comb(1.0, &rhs, -1.0).unwrap();
        let d = trajectory_norm(&diff, 0.5, Convention::EigenConsistent).unwrap();
        assert!(d <= 1e-12, "equivariance defect {d}");
    }
}
