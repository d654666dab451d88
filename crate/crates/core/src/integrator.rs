//! Independent oracle: method-of-steps initial-value integration of the
//! neutral equation, used to validate periodic solutions and observe
//! attraction.
//!
//! The neutral term is handled through the rewrite v(t) = u(t) - G(t, u_ξ):
//! v satisfies v' + Av = F(t, u, u_τ) - AG(t, u_ξ) with every delayed
//! argument known history inside a step, so v advances by a second-order
//! exponential predictor-corrector (exact stiff linear part per mode) and u
//! is recovered algebraically.

use crate::error::{Error, Result};
use crate::periodic::{InterpRule, PeriodicTrajectory};
use crate::phi::{phi1_neg, phi2_neg};
use crate::problem::{eval_ag, eval_f, eval_g, ProblemSpec};
use crate::spectral::{eigenvalue, norm_alpha, SpectralField};

/// Initial data for the method of steps: fields on a uniform grid covering
/// [-d, 0] with d at least as large as both delays.
#[derive(Debug, Clone)]
pub struct HistorySegment {
    duration: f64,
    fields: Vec<SpectralField>,
}

impl HistorySegment {
    pub fn new(duration: f64, fields: Vec<SpectralField>) -> Result<Self> {
        if !(duration >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "history duration must be nonnegative, got {duration}"
            )));
        }
        if fields.len() < 2 {
            return Err(Error::InvalidParameter(
                "a history segment needs at least two nodes".into(),
            ));
        }
        let n = fields[0].n_modes();
        if fields.iter().any(|f| f.n_modes() != n) {
            return Err(Error::GridMismatch("history fields must share n_modes".into()));
        }
        Ok(Self { duration, fields })
    }

    pub fn constant(field: SpectralField, duration: f64, nodes: usize) -> Result<Self> {
        Self::new(duration, vec![field; nodes.max(2)])
    }

    pub fn zero(n_modes: usize, duration: f64, nodes: usize) -> Result<Self> {
        Self::constant(SpectralField::zeros(n_modes), duration, nodes)
    }

    /// Sample a periodic trajectory on [-d, 0].
    pub fn from_periodic(
        u_per: &PeriodicTrajectory,
        duration: f64,
        nodes: usize,
        rule: InterpRule,
    ) -> Result<Self> {
        let nodes = nodes.max(2);
        let fields = (0..nodes)
            .map(|m| {
                let t = -duration + duration * m as f64 / (nodes - 1) as f64;
                u_per.sample(t, rule)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(duration, fields)
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn n_modes(&self) -> usize {
        self.fields[0].n_modes()
    }

    /// Linear interpolation on [-d, 0]; ends are clamped to the boundary
    /// nodes (queries outside the segment are integration bugs, caught by
    /// the caller's step bound).
    pub fn sample(&self, t: f64) -> SpectralField {
        let n = self.fields.len();
        if self.duration == 0.0 {
            return self.fields[n - 1].clone();
        }
        let s = ((t + self.duration) / self.duration * (n - 1) as f64)
            .clamp(0.0, (n - 1) as f64);
        let j = (s.floor() as usize).min(n - 2);
        let frac = s - j as f64;
        if frac == 0.0 {
            self.fields[j].clone()
        } else {
            self.fields[j].lin_comb(1.0 - frac, &self.fields[j + 1], frac)
        }
    }
}

/// Trajectory on [0, horizon] at uniform steps dt (`fields[k]` at t = k·dt).
#[derive(Debug, Clone)]
pub struct IvpTrajectory {
    pub dt: f64,
    pub fields: Vec<SpectralField>,
}

impl IvpTrajectory {
    pub fn horizon(&self) -> f64 {
        self.dt * (self.fields.len() - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn last(&self) -> &SpectralField {
        self.fields.last().expect("nonempty")
    }
}

struct StepWeights {
    rho: Vec<f64>,
    w_total: Vec<f64>, // Δt φ₁
    w0: Vec<f64>,      // Δt (φ₁ - φ₂)
    w1: Vec<f64>,      // Δt φ₂
}

impl StepWeights {
    fn new(n_modes: usize, dt: f64) -> Self {
        let mut rho = Vec::with_capacity(n_modes);
        let mut w_total = Vec::with_capacity(n_modes);
        let mut w0 = Vec::with_capacity(n_modes);
        let mut w1 = Vec::with_capacity(n_modes);
        for n in 1..=n_modes {
            let z = eigenvalue(n) * dt;
            rho.push((-z).exp());
            let p1 = phi1_neg(z);
            let p2 = phi2_neg(z);
            w_total.push(dt * p1);
            w0.push(dt * (p1 - p2));
            w1.push(dt * p2);
        }
        Self {
            rho,
            w_total,
            w0,
            w1,
        }
    }
}

fn combine(
    rho: &[f64],
    v: &SpectralField,
    wa: &[f64],
    a: &SpectralField,
    wb: Option<(&[f64], &SpectralField)>,
) -> SpectralField {
    let coeffs = (0..v.n_modes())
        .map(|k| {
            let mut x = rho[k] * v.coeffs()[k] + wa[k] * a.coeffs()[k];
            if let Some((w, b)) = wb {
                x += w[k] * b.coeffs()[k];
            }
            x
        })
        .collect();
    SpectralField::new(coeffs).expect("finite checked by caller")
}

struct Buffer<'a> {
    history: &'a HistorySegment,
    dt: f64,
    computed: Vec<SpectralField>,
    /// Provisional value for t beyond the last computed node (used by the
    /// zero-delay fixed-point sweep).
    pending: Option<SpectralField>,
}

impl Buffer<'_> {
    /// u at arbitrary time ≤ (last computed + dt).
    fn sample(&self, t: f64) -> SpectralField {
        if t <= 0.0 {
            return self.history.sample(t);
        }
        let s = t / self.dt;
        let last = (self.computed.len() - 1) as f64;
        let j = s.floor();
        let frac = s - j;
        let at = |idx: f64| -> &SpectralField {
            if idx > last {
                self.pending.as_ref().unwrap_or(&self.computed[last as usize])
            } else {
                &self.computed[idx as usize]
            }
        };
        if frac < 1e-12 {
            at(j).clone()
        } else if frac > 1.0 - 1e-12 {
            at(j + 1.0).clone()
        } else {
            at(j).lin_comb(1.0 - frac, at(j + 1.0), frac)
        }
    }
}

/// Integrate the neutral equation from the history over [0, horizon].
///
/// `dt` must not exceed the smallest positive delay: that keeps every
/// delayed argument inside known history within a step. With a zero delay
/// the implicit dependence is resolved by one fixed-point sweep per step.
pub fn simulate(
    spec: &ProblemSpec,
    history: &HistorySegment,
    horizon: f64,
    dt: f64,
) -> Result<IvpTrajectory> {
    if !(horizon > 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "horizon and dt must be positive, got {horizon}, {dt}"
        )));
    }
    let d_needed = spec.tau.max(spec.xi);
    if history.duration() + 1e-12 < d_needed {
        return Err(Error::HistoryTooShort {
            duration: history.duration(),
            required: d_needed,
        });
    }
    if history.n_modes() != spec.n_modes {
        return Err(Error::GridMismatch(
            "history n_modes differs from the problem".into(),
        ));
    }
    let positive_delays: Vec<f64> = [spec.tau, spec.xi]
        .into_iter()
        .filter(|d| *d > 0.0)
        .collect();
    if let Some(min_delay) = positive_delays
        .iter()
        .copied()
        .min_by(|a, b| a.total_cmp(b))
    {
        if dt > min_delay {
            return Err(Error::StepBound {
                dt,
                bound: min_delay,
            });
        }
    }
    let needs_sweep = spec.tau < dt || spec.xi < dt;

    let n_steps = (horizon / dt).round().max(1.0) as usize;
    let weights = StepWeights::new(spec.n_modes, dt);
    let mut buf = Buffer {
        history,
        dt,
        computed: vec![history.sample(0.0)],
        pending: None,
    };

    for k in 0..n_steps {
        let t0 = k as f64 * dt;
        let t1 = t0 + dt;
        let u0 = buf.computed[k].clone();
        let u_xi0 = buf.sample(t0 - spec.xi);
        let u_tau0 = buf.sample(t0 - spec.tau);
        let g0 = eval_g(spec, &u_xi0, t0)?;
        let v0 = &u0 - &g0;
        let n0 = &eval_f(spec, &u0, &u_tau0, t0)? - &eval_ag(spec, &u_xi0, t0)?;

        // Predictor: constant source over the step.
        let v_pred = combine(&weights.rho, &v0, &weights.w_total, &n0, None);
        buf.pending = Some(u0.clone());
        let mut u1 = {
            let u_xi1 = buf.sample(t1 - spec.xi);
            let g1 = eval_g(spec, &u_xi1, t1)?;
            &v_pred + &g1
        };

        // Corrector (+ one extra sweep when a delay is shorter than the step).
        let sweeps = if needs_sweep { 2 } else { 1 };
        for _ in 0..sweeps {
            buf.pending = Some(u1.clone());
            let u_xi1 = buf.sample(t1 - spec.xi);
            let u_tau1 = buf.sample(t1 - spec.tau);
            let g1 = eval_g(spec, &u_xi1, t1)?;
            let n1 = &eval_f(spec, &u1, &u_tau1, t1)? - &eval_ag(spec, &u_xi1, t1)?;
            let v1 = combine(
                &weights.rho,
                &v0,
                &weights.w0,
                &n0,
                Some((&weights.w1, &n1)),
            );
            u1 = &v1 + &g1;
        }
        if !u1.is_finite() {
            return Err(Error::NonFiniteState(t1));
        }
        buf.pending = None;
        buf.computed.push(u1);
    }
    Ok(IvpTrajectory {
        dt,
        fields: buf.computed,
    })
}

/// Per-period distances max_t ‖u(t) - u_per(t mod ω)‖_α over each whole
/// period window covered by the trajectory.
pub fn distance_to_periodic(
    traj: &IvpTrajectory,
    u_per: &PeriodicTrajectory,
    alpha: f64,
    convention: crate::spectral::Convention,
    rule: InterpRule,
) -> Result<Vec<f64>> {
    let omega = u_per.omega();
    if traj.horizon() + 1e-9 < omega {
        return Err(Error::InvalidParameter(
            "trajectory must cover at least one period".into(),
        ));
    }
    // Precompute the reference at each distinct phase when the step divides
    // the period; otherwise fall back to per-query sampling.
    let steps_per = omega / traj.dt;
    let aligned = (steps_per - steps_per.round()).abs() < 1e-9;
    let refs: Option<Vec<SpectralField>> = if aligned {
        let s = steps_per.round() as usize;
        Some(
            (0..s)
                .map(|k| u_per.sample(k as f64 * traj.dt, rule))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    let periods = (traj.horizon() / omega + 1e-9).floor() as usize;
    let mut out = Vec::with_capacity(periods);
    for p in 0..periods {
        let mut worst = 0.0f64;
        for k in 0..traj.fields.len() {
            let t = traj.time(k);
            if t < p as f64 * omega - 1e-12 || t >= (p + 1) as f64 * omega - 1e-12 {
                continue;
            }
            let reference = match &refs {
                Some(r) => r[k % r.len()].clone(),
                None => u_per.sample(t.rem_euclid(omega), rule)?,
            };
            let d = norm_alpha(&(&traj.fields[k] - &reference), alpha, convention)?;
            worst = worst.max(d);
        }
        out.push(worst);
    }
    Ok(out)
}
