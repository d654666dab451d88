//! Manufactured problems: prescribe an exact periodic solution u*, derive the
//! state-independent forcing F that makes it solve the neutral equation, and
//! register the result as an ordinary problem.
//!
//! The forcing is F(t) = (u* - G(t, u*(t-ξ)))' + A u*(t), with the time
//! derivative of the neutral combination computed analytically from the
//! recipe, so u* solves the equation by construction.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::periodic::PeriodicTrajectory;
use crate::problem::{DeclaredConstants, FHandle, GHandle, ProblemSpec, RegistryParams};
use crate::spectral::{eigenvalue, SpectralField};

/// One spatial mode of the prescribed solution:
/// u*_n(t) = mean + sin_amp·sin(2πh t/ω) + cos_amp·cos(2πh t/ω).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTone {
    /// 1-based sine-mode index.
    pub mode: usize,
    pub mean: f64,
    pub sin_amp: f64,
    pub cos_amp: f64,
    /// Temporal harmonic h ≥ 1.
    pub harmonic: u32,
}

/// A finite sine-in-space / Fourier-in-time recipe for u*.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Recipe {
    pub tones: Vec<ModeTone>,
}

impl Recipe {
    pub fn single(mode: usize, mean: f64, sin_amp: f64, cos_amp: f64, harmonic: u32) -> Self {
        Self {
            tones: vec![ModeTone {
                mode,
                mean,
                sin_amp,
                cos_amp,
                harmonic,
            }],
        }
    }

    /// The default recipe used by the built-in manufactured problems:
    /// u*(t) = (0.5 + 0.25 sin(2πt/ω)) e_1.
    pub fn builtin() -> Self {
        Self::single(1, 0.5, 0.25, 0.0, 1)
    }

    pub fn max_mode(&self) -> usize {
        self.tones.iter().map(|t| t.mode).max().unwrap_or(0)
    }

    fn validate(&self, n_modes: usize) -> Result<()> {
        for tone in &self.tones {
            if tone.mode == 0 || tone.mode > n_modes {
                return Err(Error::RecipeMode {
                    mode: tone.mode,
                    n_modes,
                });
            }
            if tone.harmonic == 0 {
                return Err(Error::InvalidParameter(
                    "recipe harmonic must be >= 1 (use mean for the constant part)".into(),
                ));
            }
        }
        Ok(())
    }

    /// Coefficients of u*(t).
    pub fn value(&self, t: f64, omega: f64, n_modes: usize) -> SpectralField {
        let mut c = vec![0.0; n_modes];
        for tone in &self.tones {
            let arg = 2.0 * PI * tone.harmonic as f64 * t / omega;
            c[tone.mode - 1] += tone.mean + tone.sin_amp * arg.sin() + tone.cos_amp * arg.cos();
        }
        SpectralField::new(c).expect("finite")
    }

    /// Coefficients of du*/dt.
    pub fn derivative(&self, t: f64, omega: f64, n_modes: usize) -> SpectralField {
        let mut c = vec![0.0; n_modes];
        for tone in &self.tones {
            let freq = 2.0 * PI * tone.harmonic as f64 / omega;
            let arg = freq * t;
            c[tone.mode - 1] += freq * (tone.sin_amp * arg.cos() - tone.cos_amp * arg.sin());
        }
        SpectralField::new(c).expect("finite")
    }

    /// u* sampled on the solver grid.
    pub fn exact_trajectory(
        &self,
        omega: f64,
        m_t: usize,
        n_modes: usize,
    ) -> Result<PeriodicTrajectory> {
        self.validate(n_modes)?;
        PeriodicTrajectory::from_fn(omega, m_t, |t| self.value(t, omega, n_modes))
    }
}

/// Per-tone pointwise pieces, evaluated without building coefficient
/// vectors (the forcing handle runs once per grid node on the hot path).
impl ModeTone {
    fn coeff(&self, t: f64, omega: f64) -> f64 {
        let arg = 2.0 * PI * self.harmonic as f64 * t / omega;
        self.mean + self.sin_amp * arg.sin() + self.cos_amp * arg.cos()
    }

    fn coeff_dt(&self, t: f64, omega: f64) -> f64 {
        let freq = 2.0 * PI * self.harmonic as f64 / omega;
        freq * (self.sin_amp * (freq * t).cos() - self.cos_amp * (freq * t).sin())
    }
}

/// Build the manufactured problem for a recipe, with g(x) = g_amp·x(1-x).
///
/// The declared constants are exact: the forcing is state-independent
/// (a0 = a1 = 0), sup|∂xx g| = 2·g_amp, and K bounds ‖F(t)‖ on the grid.
pub fn manufactured_spec(
    recipe: &Recipe,
    g_amp: f64,
    p: &RegistryParams,
) -> Result<ProblemSpec> {
    recipe.validate(p.n_modes)?;
    if !(g_amp >= 0.0) || !g_amp.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "g amplitude must be finite and nonnegative, got {g_amp}"
        )));
    }
    let omega = p.omega;
    let xi = p.xi.rem_euclid(omega);
    let n_modes = p.n_modes;
    let rec = recipe.clone();

    // F*(x,t) = u̇*(x,t) - g(x)(ẇ + ẇ_x)(x, t-ξ) + (A u*)(x,t), all analytic.
    let f: FHandle = Arc::new(move |x, t, _v, _eta, _w, _zeta| {
        let mut out = 0.0;
        for tone in &rec.tones {
            let n = tone.mode as f64;
            let sin_nx = std::f64::consts::SQRT_2 * (n * PI * x).sin();
            let cos_nx = std::f64::consts::SQRT_2 * n * PI * (n * PI * x).cos();
            // u̇* + A u* at this node
            out += (tone.coeff_dt(t, omega) + eigenvalue(tone.mode) * tone.coeff(t, omega))
                * sin_nx;
            if g_amp != 0.0 {
                let dw = tone.coeff_dt(t - xi, omega);
                out -= g_amp * x * (1.0 - x) * dw * (sin_nx + cos_nx);
            }
        }
        out
    });
    let g_handle = if g_amp != 0.0 {
        Some(GHandle {
            g: Arc::new(move |x, _t| g_amp * x * (1.0 - x)),
            g_x: Some(Arc::new(move |x, _t| g_amp * (1.0 - 2.0 * x))),
            g_xx: Some(Arc::new(move |_x, _t| -2.0 * g_amp)),
        })
    } else {
        None
    };

    // Bound ‖F(t)‖_{L²} over one period for the (H1') constant K, using
    // |g·(ẇ + ẇ_x)|_{L²} ≤ sup|g| (‖ẇ‖ + ‖ẇ'‖) with sup|g| = g_amp/4.
    let probe = 64usize;
    let mut big_k = 0.0f64;
    for j in 0..probe {
        let t = omega * j as f64 / probe as f64;
        let du = recipe.derivative(t, omega, n_modes);
        let au = recipe.value(t, omega, n_modes).mode_scaled(eigenvalue);
        let mut bound = (&du + &au).l2_norm();
        if g_amp != 0.0 {
            let dw = recipe.derivative(t - xi, omega, n_modes);
            let dw_slope = crate::spectral::norm_alpha(
                &dw,
                0.5,
                crate::spectral::Convention::EigenConsistent,
            )
            .expect("alpha in range");
            bound += g_amp / 4.0 * (dw.l2_norm() + dw_slope);
        }
        big_k = big_k.max(bound);
    }

    ProblemSpec::new(
        omega,
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
            big_k: Some(big_k),
            lip_g: Some(2.0 * g_amp),
            l1: Some(0.0),
            mu1: Some(1.0),
            l2: Some(2.0 * g_amp),
            mu2: Some(1.0),
            gamma: None,
            f_lipschitz: true,
        },
        Some(f),
        g_handle,
    )
}

/// Registry entry point for the built-in manufactured problems.
pub fn builtin_recipe_spec(p: &RegistryParams, g_amp: f64) -> Result<ProblemSpec> {
    manufactured_spec(&Recipe::builtin(), g_amp, p)
}
