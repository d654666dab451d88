//! Problem model for the delayed parabolic equation on (0,1):
//! pointwise nonlinearities f and g, the abstract maps F, G, AG, and delay
//! evaluation on periodic trajectories.
//!
//! The equation being modelled is
//!
//! ```text
//! ∂t[u - g(x,t)(u(x,t-ξ) + ∂x u(x,t-ξ))] - ∂xx u
//!     = f(x, t, u, ∂x u, u(·,t-τ), ∂x u(·,t-τ)),     u(0,t) = u(1,t) = 0,
//! ```
//!
//! with F(t,·,·) and G(t,·) the induced maps on spectral fields.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::periodic::{InterpRule, PeriodicTrajectory, SourceModel};
use crate::spectral::{
    eigenvalue, norm_alpha, Convention, GridFunction, SineBasis, SpectralField,
};

/// Pointwise nonlinearity f(x, t, v, η, w, ζ) where v = u(x,t), η = ∂x u(x,t),
/// w = u(x,t-τ), ζ = ∂x u(x,t-τ). Handles must be pure and ω-periodic in t;
/// unused arguments are simply ignored by the closure.
pub type FHandle = Arc<dyn Fn(f64, f64, f64, f64, f64, f64) -> f64 + Send + Sync>;

/// Scalar field handle g(x, t) and optional spatial derivatives.
#[derive(Clone)]
pub struct GHandle {
    pub g: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub g_x: Option<Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>>,
    pub g_xx: Option<Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>>,
}

impl std::fmt::Debug for GHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GHandle")
            .field("g_x", &self.g_x.is_some())
            .field("g_xx", &self.g_xx.is_some())
            .finish()
    }
}

/// Constants declared by the problem for the hypothesis arithmetic. `None`
/// means "not declared"; the checker then reports UNKNOWN for anything that
/// needs the missing value.
#[derive(Debug, Clone, Default)]
pub struct DeclaredConstants {
    pub a0: Option<f64>,
    pub a1: Option<f64>,
    pub big_k: Option<f64>,
    pub lip_g: Option<f64>,
    pub l1: Option<f64>,
    pub mu1: Option<f64>,
    pub l2: Option<f64>,
    pub mu2: Option<f64>,
    /// Explicit growth constant γ for problems declared only with a bound
    /// h_r; never inferred from a black-box f.
    pub gamma: Option<f64>,
    /// Whether f was declared Lipschitz in its state arguments.
    pub f_lipschitz: bool,
}

impl DeclaredConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a0", self.a0),
            ("a1", self.a1),
            ("k", self.big_k),
            ("l", self.lip_g),
            ("l1", self.l1),
            ("l2", self.l2),
            ("gamma", self.gamma),
        ] {
            if let Some(v) = v {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "constant {name} must be finite and nonnegative, got {v}"
                    )));
                }
            }
        }
        for (name, v) in [("mu1", self.mu1), ("mu2", self.mu2)] {
            if let Some(v) = v {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "{name} must lie in (0, 1], got {v}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Full problem description: period, delays, smoothness index, grid sizes,
/// declared constants and the nonlinearity handles.
#[derive(Clone)]
pub struct ProblemSpec {
    pub omega: f64,
    /// Delays, already reduced mod ω (only the residue class is observable
    /// on periodic solutions).
    pub tau: f64,
    pub xi: f64,
    pub alpha: f64,
    pub n_modes: usize,
    pub m_t: usize,
    pub m_x: usize,
    pub convention: Convention,
    pub source_model: SourceModel,
    pub delay_interp: InterpRule,
    pub constants: DeclaredConstants,
    pub f_handle: Option<FHandle>,
    pub g_handle: Option<GHandle>,
    basis: Arc<SineBasis>,
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("omega", &self.omega)
            .field("tau", &self.tau)
            .field("xi", &self.xi)
            .field("alpha", &self.alpha)
            .field("n_modes", &self.n_modes)
            .field("m_t", &self.m_t)
            .field("m_x", &self.m_x)
            .field("convention", &self.convention)
            .field("source_model", &self.source_model)
            .field("delay_interp", &self.delay_interp)
            .field("constants", &self.constants)
            .field("f_handle", &self.f_handle.is_some())
            .field("g_handle", &self.g_handle.is_some())
            .finish()
    }
}

impl ProblemSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        omega: f64,
        tau: f64,
        xi: f64,
        alpha: f64,
        n_modes: usize,
        m_t: usize,
        m_x: usize,
        convention: Convention,
        source_model: SourceModel,
        delay_interp: InterpRule,
        constants: DeclaredConstants,
        f_handle: Option<FHandle>,
        g_handle: Option<GHandle>,
    ) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::NonPositivePeriod(omega));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::AlphaOutOfRange {
                alpha,
                range: "[0, 1)",
            });
        }
        if tau < 0.0 || xi < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "delays must be nonnegative, got tau = {tau}, xi = {xi}"
            )));
        }
        if n_modes == 0 || m_t < 2 {
            return Err(Error::InvalidParameter(
                "n_modes >= 1 and m_t >= 2 required".into(),
            ));
        }
        constants.validate()?;
        let basis = Arc::new(SineBasis::new(n_modes, m_x)?);
        if let Some(gh) = &g_handle {
            // G maps into D(A) only if g vanishes on the boundary.
            for k in 0..4 {
                let t = omega * k as f64 / 4.0;
                for x in [0.0, 1.0] {
                    let v = (gh.g)(x, t);
                    if v.abs() > 1e-12 {
                        return Err(Error::BoundaryViolation { x, t, value: v });
                    }
                }
            }
        }
        Ok(Self {
            omega,
            tau: tau.rem_euclid(omega),
            xi: xi.rem_euclid(omega),
            alpha,
            n_modes,
            m_t,
            m_x,
            convention,
            source_model,
            delay_interp,
            constants,
            f_handle,
            g_handle,
            basis,
        })
    }

    pub fn basis(&self) -> &SineBasis {
        &self.basis
    }

    /// Same problem under the other fractional-power convention.
    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn dt(&self) -> f64 {
        self.omega / self.m_t as f64
    }

    /// Zero trajectory on this problem's grid.
    pub fn zero_trajectory(&self) -> PeriodicTrajectory {
        PeriodicTrajectory::zeros(self.omega, self.m_t, self.n_modes)
            .expect("validated grid")
    }

    /// Reduce a time to the fundamental period before handing it to the
    /// (ω-periodic) handles, so periodicity in t holds exactly.
    fn wrap_time(&self, t: f64) -> f64 {
        t.rem_euclid(self.omega)
    }
}

/// Field of a periodic trajectory at time (t - delay) mod ω, via the
/// problem's interpolation rule.
pub fn delayed_state(
    spec: &ProblemSpec,
    u: &PeriodicTrajectory,
    t: f64,
    delay: f64,
) -> Result<SpectralField> {
    u.sample(t - delay, spec.delay_interp)
}

/// F(t, u(t), u(t-τ)) evaluated through the dealiased grid.
pub fn eval_f(
    spec: &ProblemSpec,
    u_now: &SpectralField,
    u_tau: &SpectralField,
    t: f64,
) -> Result<SpectralField> {
    let f = match &spec.f_handle {
        None => return Ok(SpectralField::zeros(spec.n_modes)),
        Some(f) => f,
    };
    let basis = spec.basis();
    let t = spec.wrap_time(t);
    let v = basis.synthesize(u_now);
    let eta = basis.synthesize_derivative(u_now);
    let w = basis.synthesize(u_tau);
    let zeta = basis.synthesize_derivative(u_tau);
    let m_x = spec.m_x;
    let mut vals = vec![0.0; m_x - 1];
    for (i, val) in vals.iter_mut().enumerate() {
        let x = (i + 1) as f64 / m_x as f64;
        let y = f(x, t, v.values()[i], eta.values()[i], w.values()[i], zeta.values()[i]);
        if !y.is_finite() {
            return Err(Error::HandleOutput { x, t });
        }
        *val = y;
    }
    basis.analyze(&GridFunction::new(vals))
}

/// G(t, u(t-ξ)) = g(x,t)(w + ∂x w) as a spectral field in D(A).
pub fn eval_g(spec: &ProblemSpec, u_xi: &SpectralField, t: f64) -> Result<SpectralField> {
    let gh = match &spec.g_handle {
        None => return Ok(SpectralField::zeros(spec.n_modes)),
        Some(g) => g,
    };
    let basis = spec.basis();
    let t = spec.wrap_time(t);
    let w = basis.synthesize(u_xi);
    let wx = basis.synthesize_derivative(u_xi);
    let m_x = spec.m_x;
    let mut vals = vec![0.0; m_x - 1];
    for (i, val) in vals.iter_mut().enumerate() {
        let x = (i + 1) as f64 / m_x as f64;
        let y = (gh.g)(x, t) * (w.values()[i] + wx.values()[i]);
        if !y.is_finite() {
            return Err(Error::HandleOutput { x, t });
        }
        *val = y;
    }
    basis.analyze(&GridFunction::new(vals))
}

/// AG(t, u(t-ξ)): A applied spectrally to the output of [`eval_g`].
pub fn eval_ag(spec: &ProblemSpec, u_xi: &SpectralField, t: f64) -> Result<SpectralField> {
    Ok(eval_g(spec, u_xi, t)?.mode_scaled(eigenvalue))
}

/// Direct-mode AG: -∂xx[g·(w + w_x)] assembled pointwise from g, g_x, g_xx
/// via the product rule, then transformed once. Needs derivative handles.
pub fn eval_ag_direct(
    spec: &ProblemSpec,
    u_xi: &SpectralField,
    t: f64,
) -> Result<SpectralField> {
    let gh = match &spec.g_handle {
        None => return Ok(SpectralField::zeros(spec.n_modes)),
        Some(g) => g,
    };
    let (g_x, g_xx) = match (&gh.g_x, &gh.g_xx) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::MissingDerivativeHandles),
    };
    let basis = spec.basis();
    let t = spec.wrap_time(t);
    let w = basis.synthesize(u_xi);
    let w1 = basis.synthesize_derivative(u_xi);
    // w'' is a sine series with coefficients -(nπ)² c_n, w''' the matching
    // cosine series with coefficients -(nπ)³ c_n.
    let w2 = basis.synthesize(&u_xi.mode_scaled(|n| -eigenvalue(n)));
    let w3 = basis.synthesize_cos(
        &u_xi.mode_scaled(|n| -(n as f64 * std::f64::consts::PI) * eigenvalue(n)),
    );
    let m_x = spec.m_x;
    let mut vals = vec![0.0; m_x - 1];
    for (i, val) in vals.iter_mut().enumerate() {
        let x = (i + 1) as f64 / m_x as f64;
        let h = w.values()[i] + w1.values()[i];
        let hx = w1.values()[i] + w2.values()[i];
        let hxx = w2.values()[i] + w3.values()[i];
        let y = -(g_xx(x, t) * h + 2.0 * g_x(x, t) * hx + (gh.g)(x, t) * hxx);
        if !y.is_finite() {
            return Err(Error::HandleOutput { x, t });
        }
        *val = y;
    }
    basis.analyze(&GridFunction::new(vals))
}

/// Empirical Lipschitz diagnostic for (H2): the largest observed ratio
/// ‖AG(w₁) - AG(w₂)‖ / ‖w₁ - w₂‖_{1/2} over seeded random probes whose
/// coefficients decay like n^{-decay}. Reported for comparison with the
/// declared constant; the bound is not enforced.
pub fn empirical_ag_lipschitz(
    spec: &ProblemSpec,
    probes: usize,
    decay: f64,
    seed: u64,
) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let random_field = |rng: &mut rand_chacha::ChaCha8Rng| {
        SpectralField::new(
            (1..=spec.n_modes)
                .map(|n| rng.random_range(-1.0..1.0) / (n as f64).powf(decay))
                .collect(),
        )
        .expect("finite")
    };
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let w1 = random_field(&mut rng);
        let w2 = random_field(&mut rng);
        let num = (&eval_ag(spec, &w1, 0.0)? - &eval_ag(spec, &w2, 0.0)?).l2_norm();
        let den = norm_alpha(&(&w1 - &w2), 0.5, spec.convention)?;
        if den > 0.0 {
            worst = worst.max(num / den);
        }
    }
    Ok(worst)
}

/// Parameter overrides accepted by the built-in problem registry.
#[derive(Debug, Clone)]
pub struct RegistryParams {
    pub omega: f64,
    pub tau: f64,
    pub xi: f64,
    pub alpha: f64,
    pub n_modes: usize,
    pub m_t: usize,
    pub m_x: usize,
    pub convention: Convention,
    pub source_model: SourceModel,
    pub delay_interp: InterpRule,
    pub a0: f64,
    pub a1: f64,
    pub big_k: f64,
    pub lip_g: f64,
}

impl Default for RegistryParams {
    fn default() -> Self {
        Self {
            omega: 1.0,
            tau: 0.3,
            xi: 0.2,
            alpha: 0.5,
            n_modes: 64,
            m_t: 256,
            m_x: 257,
            convention: Convention::default(),
            source_model: SourceModel::default(),
            delay_interp: InterpRule::default(),
            a0: 0.01,
            a1: 0.01,
            big_k: 0.25,
            lip_g: 0.01,
        }
    }
}

/// Built-in problems selectable by name: `heat_decay` (f = g = 0),
/// `example51` (linear-in-state instance of the delayed parabolic model with
/// prescribed constants) and the manufactured problems from
/// [`crate::manufactured`].
pub fn registry_problem(name: &str, p: &RegistryParams) -> Result<ProblemSpec> {
    match name {
        "heat_decay" => heat_decay(p),
        "example51" => example51(p),
        "manufactured_linear" => {
            crate::manufactured::builtin_recipe_spec(p, 0.0)
        }
        "manufactured_neutral" => {
            crate::manufactured::builtin_recipe_spec(p, 0.01)
        }
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

/// f = g = 0; the unique periodic solution is 0.
pub fn heat_decay(p: &RegistryParams) -> Result<ProblemSpec> {
    ProblemSpec::new(
        p.omega,
        p.tau,
        p.xi,
        p.alpha,
        p.n_modes,
        p.m_t,
        p.m_x,
        p.convention,
        p.source_model,
        p.delay_interp,
        DeclaredConstants {
            a0: Some(0.0),
            a1: Some(0.0),
            big_k: Some(0.0),
            lip_g: Some(0.0),
            l1: Some(0.0),
            mu1: Some(1.0),
            l2: Some(0.0),
            mu2: Some(1.0),
            gamma: None,
            f_lipschitz: true,
        },
        None,
        None,
    )
}

/// Concrete instance of the delayed parabolic model problem:
///
///   f = a0 (v + η) + a1 (w + ζ) + K sin(2πt/ω),
///   g = (L/2) x(1-x),
///
/// so the pointwise growth constants are exactly a0, a1, K and
/// sup|∂xx g| = L. Everything is linear in the state, so f is Lipschitz with
/// the same constants.
pub fn example51(p: &RegistryParams) -> Result<ProblemSpec> {
    let (a0, a1, k, l, omega) = (p.a0, p.a1, p.big_k, p.lip_g, p.omega);
    let f: FHandle = Arc::new(move |_x, t, v, eta, w, zeta| {
        a0 * (v + eta) + a1 * (w + zeta) + k * (2.0 * std::f64::consts::PI * t / omega).sin()
    });
    let g = GHandle {
        g: Arc::new(move |x, _t| l / 2.0 * x * (1.0 - x)),
        g_x: Some(Arc::new(move |x, _t| l / 2.0 * (1.0 - 2.0 * x))),
        g_xx: Some(Arc::new(move |_x, _t| -l)),
    };
    ProblemSpec::new(
        p.omega,
        p.tau,
        p.xi,
        p.alpha,
        p.n_modes,
        p.m_t,
        p.m_x,
        p.convention,
        p.source_model,
        p.delay_interp,
        DeclaredConstants {
            a0: Some(a0),
            a1: Some(a1),
            big_k: Some(k),
            lip_g: Some(l),
            l1: Some(a0.max(a1).max(2.0 * std::f64::consts::PI * k / p.omega)),
            mu1: Some(1.0),
            l2: Some(l),
            mu2: Some(1.0),
            gamma: None,
            f_lipschitz: true,
        },
        Some(f),
        Some(g),
    )
}
