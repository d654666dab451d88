//! Spectral solver for ω-periodic mild solutions of neutral delay evolution
//! equations of the form
//!
//! ```text
//! (u(t) - G(t, u(t-ξ)))' + A u(t) = F(t, u(t), u(t-τ)),    t ∈ ℝ,
//! ```
//!
//! with A = -∂²/∂x² on (0,1) under Dirichlet boundary conditions.
//!
//! The solution is found as the fixed point of the operator
//! Qu = P[F(·,u,u_τ)] + G(·,u_ξ) - P[AG(·,u_ξ)], where P maps an ω-periodic
//! forcing to the unique ω-periodic mild solution of the linear equation.
//! Everything is diagonal in the sine eigenbasis, so the library is organized
//! around truncated sine expansions:
//!
//! * [`spectral`] — transforms, semigroup, fractional powers, X_α norms;
//! * [`periodic`] — the periodic solution operator P and trajectories;
//! * [`problem`] — nonlinearities, delay evaluation, built-in problems;
//! * [`solver`] — the operator Q and Picard iteration;
//! * [`hypotheses`] — the smallness conditions behind existence/uniqueness;
//! * [`integrator`] — an independent method-of-steps oracle;
//! * [`manufactured`] — exact-solution problem construction;
//! * [`cli`], [`config`], [`report`] — the command-line front end.

// Validation deliberately writes `!(x > 0.0)` so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod hypotheses;
pub mod integrator;
pub mod manufactured;
pub mod periodic;
mod phi;
pub mod problem;
pub mod report;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use hypotheses::{
    check_example51, check_mild, check_regularity, compute_constants, full_report,
    kappa_theory, HypothesisReport, Verdict,
};
pub use integrator::{distance_to_periodic, simulate, HistorySegment, IvpTrajectory};
pub use manufactured::{manufactured_spec, ModeTone, Recipe};
pub use periodic::{
    mild_identity_residual, periodic_solve, trajectory_norm, InterpRule, PeriodicTrajectory,
    SourceModel,
};
pub use problem::{
    delayed_state, eval_ag, eval_ag_direct, eval_f, eval_g, registry_problem, DeclaredConstants,
    ProblemSpec, RegistryParams,
};
pub use solver::{
    apply_q, apply_q1, apply_q2, fixed_point_residual, picard_solve, PicardOptions, SolveResult,
};
pub use spectral::{
    forward_transform, fractional_power_apply, inverse_transform, norm_alpha, resolvent_apply,
    semigroup_apply, spatial_derivative, Convention, GridFunction, SineBasis, SpectralField,
};
