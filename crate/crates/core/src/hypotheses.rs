//! Condition arithmetic: evaluate the smallness inequalities behind the
//! existence, uniqueness and regularity results and report which of them
//! hold for the declared constants.
//!
//! All inequalities share the constants C = ‖(I-T(ω))⁻¹‖ = 1/(1-e^{-π²ω}),
//! M_α = Γ(α) (the smoothing constant with M = 1) and
//! C_{1-α} = ‖A^{-(1-α)}‖, whose value depends on the active convention:
//! (π²)^{-(1-α)} eigenvalue-consistent, 1 paper-literal.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::problem::ProblemSpec;
use crate::spectral::Convention;

/// Three-valued outcome: hypotheses with undeclared constants must not
/// silently pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Unknown,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Unknown => "UNKNOWN",
        })
    }
}

/// One evaluated inequality lhs < rhs.
#[derive(Debug, Clone, Copy)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
}

impl Inequality {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn verdict(&self) -> Verdict {
        if self.margin() > 0.0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

fn verdict_of(ineq: Option<Inequality>) -> Verdict {
    ineq.map_or(Verdict::Unknown, |i| i.verdict())
}

/// The shared constants of the condition arithmetic.
#[derive(Debug, Clone, Copy)]
pub struct Constants {
    pub c: f64,
    pub m_alpha: f64,
    pub c_one_minus_alpha: f64,
    /// Growth constant γ: explicit if declared, else (a0+a1)ω^{1-α}/(1-α)
    /// when linear growth constants are available.
    pub gamma: Option<f64>,
    /// ω^{1-α}/(1-α), the delay-window weight in every inequality.
    pub omega_weight: f64,
}

/// C = 1/(1 - e^{-π²ω}).
pub fn resolvent_bound(omega: f64) -> f64 {
    1.0 / -(-PI * PI * omega).exp_m1()
}

/// Compute C, M_α, C_{1-α} and γ for a problem. α ∈ {0, 1} is rejected
/// because the smoothing constant Γ(α) is undefined there.
pub fn compute_constants(spec: &ProblemSpec) -> Result<Constants> {
    let alpha = spec.alpha;
    if alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::AlphaOutOfRange {
            alpha,
            range: "(0, 1)",
        });
    }
    let omega_weight = spec.omega.powf(1.0 - alpha) / (1.0 - alpha);
    let gamma_val = spec
        .constants
        .gamma
        .or(match (spec.constants.a0, spec.constants.a1) {
            (Some(a0), Some(a1)) => Some((a0 + a1) * omega_weight),
            _ => None,
        });
    Ok(Constants {
        c: resolvent_bound(spec.omega),
        m_alpha: gamma(alpha),
        c_one_minus_alpha: spec.convention.c_one_minus_alpha(alpha),
        gamma: gamma_val,
        omega_weight,
    })
}

/// The contraction coefficient κ = C M_α (a0+a1+L) ω^{1-α}/(1-α) + C_{1-α} L.
/// Single source of truth for both the checker and the solver's contraction
/// property.
pub fn kappa_theory(omega: f64, alpha: f64, convention: Convention, a0: f64, a1: f64, l: f64) -> f64 {
    let c = resolvent_bound(omega);
    let omega_weight = omega.powf(1.0 - alpha) / (1.0 - alpha);
    c * gamma(alpha) * (a0 + a1 + l) * omega_weight + convention.c_one_minus_alpha(alpha) * l
}

/// Verdicts for the mild-solution conditions.
#[derive(Debug, Clone, Copy)]
pub struct MildReport {
    /// C M_α γ + C_{1-α} L + C M_α L ω^{1-α}/(1-α) < 1, as stated; the
    /// proof's inequality carries an extra L on the first term — the stated
    /// form is implemented.
    pub h3: Option<Inequality>,
    /// C M_α (a0+a1+L) ω^{1-α}/(1-α) + C_{1-α} L < 1.
    pub h3_prime: Option<Inequality>,
    /// Existence (needs H3, hence γ).
    pub existence: Verdict,
    /// Uniqueness (needs the Lipschitz declaration and H3').
    pub uniqueness: Verdict,
}

pub fn check_mild(spec: &ProblemSpec) -> Result<MildReport> {
    let k = compute_constants(spec)?;
    let l = spec.constants.lip_g;
    let h3 = match (k.gamma, l) {
        (Some(g), Some(l)) => Some(Inequality {
            lhs: k.c * k.m_alpha * g
                + k.c_one_minus_alpha * l
                + k.c * k.m_alpha * l * k.omega_weight,
            rhs: 1.0,
        }),
        _ => None,
    };
    let h3_prime = match (spec.constants.a0, spec.constants.a1, l) {
        (Some(a0), Some(a1), Some(l)) => Some(Inequality {
            lhs: kappa_theory(spec.omega, spec.alpha, spec.convention, a0, a1, l),
            rhs: 1.0,
        }),
        _ => None,
    };
    let uniqueness = if spec.constants.f_lipschitz {
        verdict_of(h3_prime)
    } else {
        Verdict::Unknown
    };
    Ok(MildReport {
        h3,
        h3_prime,
        existence: verdict_of(h3),
        uniqueness,
    })
}

/// Verdicts for the regularity conditions.
#[derive(Debug, Clone, Copy)]
pub struct RegularityReport {
    /// C M_α (2L₁+L₂) ω^{1-α}/(1-α) + C_{1-α} L₂ < 1.
    pub h6: Option<Inequality>,
    /// Classical solution: Hölder exponents strictly inside (0,1).
    pub classical: Verdict,
    /// Strong solution: Lipschitz case μ₁ = μ₂ = 1 (report only).
    pub strong: Verdict,
}

pub fn check_regularity(spec: &ProblemSpec) -> Result<RegularityReport> {
    let k = compute_constants(spec)?;
    let c = &spec.constants;
    let h6 = match (c.l1, c.l2) {
        (Some(l1), Some(l2)) => Some(Inequality {
            lhs: k.c * k.m_alpha * (2.0 * l1 + l2) * k.omega_weight + k.c_one_minus_alpha * l2,
            rhs: 1.0,
        }),
        _ => None,
    };
    let holder = |mu: Option<f64>| -> Result<Option<bool>> {
        match mu {
            None => Ok(None),
            Some(m) if m > 0.0 && m <= 1.0 => Ok(Some(m < 1.0)),
            Some(m) => Err(Error::InvalidParameter(format!(
                "Hölder exponent must lie in (0, 1], got {m}"
            ))),
        }
    };
    let (m1, m2) = (holder(c.mu1)?, holder(c.mu2)?);
    let classical = match (verdict_of(h6), m1, m2) {
        (Verdict::Pass, Some(true), Some(true)) => Verdict::Pass,
        (Verdict::Fail, _, _) => Verdict::Fail,
        _ => Verdict::Unknown,
    };
    let strong = match (verdict_of(h6), m1, m2) {
        (Verdict::Pass, Some(false), Some(false)) => Verdict::Pass,
        (Verdict::Fail, _, _) => Verdict::Fail,
        _ => Verdict::Unknown,
    };
    Ok(RegularityReport {
        h6,
        classical,
        strong,
    })
}

/// Verdicts for the model problem's explicit conditions.
#[derive(Debug, Clone, Copy)]
pub struct ModelReport {
    /// 2ω^{1/2}/(1-e^{-π²ω}) Γ(1/2)(a0+a1+L) + L < π/(1+π).
    pub f3: Option<Inequality>,
    /// Same with (2l₁+l₂) and l₂.
    pub f6: Option<Inequality>,
    pub mild: Verdict,
    pub classical: Verdict,
    pub strong: Verdict,
}

/// π/(1+π), the right-hand side of the model conditions.
pub fn model_rhs() -> f64 {
    PI / (1.0 + PI)
}

pub fn check_example51(spec: &ProblemSpec) -> Result<ModelReport> {
    let c = resolvent_bound(spec.omega);
    let weight = 2.0 * spec.omega.sqrt() * c * gamma(0.5);
    let k = &spec.constants;
    let f3 = match (k.a0, k.a1, k.lip_g) {
        (Some(a0), Some(a1), Some(l)) => Some(Inequality {
            lhs: weight * (a0 + a1 + l) + l,
            rhs: model_rhs(),
        }),
        _ => None,
    };
    let f6 = match (k.l1, k.l2) {
        (Some(l1), Some(l2)) => Some(Inequality {
            lhs: weight * (2.0 * l1 + l2) + l2,
            rhs: model_rhs(),
        }),
        _ => None,
    };
    let strict_holder = |mu: Option<f64>| matches!(mu, Some(m) if m > 0.0 && m < 1.0);
    let lipschitz = |mu: Option<f64>| matches!(mu, Some(m) if m == 1.0);
    let classical = match verdict_of(f6) {
        Verdict::Pass if strict_holder(k.mu1) && strict_holder(k.mu2) => Verdict::Pass,
        Verdict::Fail => Verdict::Fail,
        Verdict::Pass => Verdict::Unknown,
        v => v,
    };
    let strong = match verdict_of(f6) {
        Verdict::Pass if lipschitz(k.mu1) && lipschitz(k.mu2) => Verdict::Pass,
        Verdict::Fail => Verdict::Fail,
        Verdict::Pass => Verdict::Unknown,
        v => v,
    };
    Ok(ModelReport {
        f3,
        f6,
        mild: verdict_of(f3),
        classical,
        strong,
    })
}

/// Everything the checker knows about a problem, renderable as a flat
/// key: value report.
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub convention: Convention,
    pub omega: f64,
    pub alpha: f64,
    pub constants: Constants,
    pub mild: MildReport,
    pub regularity: RegularityReport,
    pub model: ModelReport,
}

impl HypothesisReport {
    /// The headline verdict deciding the check exit status: PASS if any
    /// mild-solution route passes.
    pub fn mild_verdict(&self) -> Verdict {
        let vs = [
            self.mild.existence,
            self.mild.uniqueness,
            self.model.mild,
        ];
        if vs.contains(&Verdict::Pass) {
            Verdict::Pass
        } else if vs.iter().all(|v| *v == Verdict::Unknown) {
            Verdict::Unknown
        } else {
            Verdict::Fail
        }
    }
}

pub fn full_report(spec: &ProblemSpec) -> Result<HypothesisReport> {
    Ok(HypothesisReport {
        convention: spec.convention,
        omega: spec.omega,
        alpha: spec.alpha,
        constants: compute_constants(spec)?,
        mild: check_mild(spec)?,
        regularity: check_regularity(spec)?,
        model: check_example51(spec)?,
    })
}
