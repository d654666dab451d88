//! Eigen-expansion calculus for A = -d²/dx² on (0,1) with Dirichlet boundary
//! conditions.
//!
//! Everything in this module is diagonal in the orthonormal sine basis
//! e_n(x) = √2 sin(nπx): the semigroup e^{-tA}, fractional powers A^a, the
//! periodic resolvent (I - T(ω))⁻¹ and the X_α norms. Grid values live on the
//! interior nodes x_i = i/M_x and move to coefficient space through the
//! type-I discrete sine transform.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Element of X = L²(0,1) truncated to the span of e_1..e_N.
///
/// `coeffs[k]` is the coefficient of e_{k+1}.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "spectral coefficients must be finite".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    pub fn zeros(n_modes: usize) -> Self {
        Self {
            coeffs: vec![0.0; n_modes],
        }
    }

    /// The basis element e_n (1-based) embedded in an N-mode field.
    pub fn basis(n: usize, n_modes: usize) -> Self {
        assert!(n >= 1 && n <= n_modes, "basis index out of range");
        let mut coeffs = vec![0.0; n_modes];
        coeffs[n - 1] = 1.0;
        Self { coeffs }
    }

    pub fn n_modes(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Componentwise a*self + b*other.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.n_modes(), other.n_modes());
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|x| a * x).collect(),
        }
    }

    /// Multiply each mode by a per-mode factor.
    pub fn mode_scaled(&self, factor: impl Fn(usize) -> f64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| factor(k + 1) * c)
                .collect(),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

impl std::ops::Add<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.lin_comb(1.0, rhs, 1.0)
    }
}

impl std::ops::Sub<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.lin_comb(1.0, rhs, -1.0)
    }
}

/// Values at the interior nodes x_i = i/M_x, i = 1..M_x-1.
///
/// The boundary values u(0) = u(1) = 0 are implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Sample f at the interior nodes of an M_x-interval grid.
    pub fn from_fn(m_x: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = (1..m_x).map(|i| f(i as f64 / m_x as f64)).collect();
        Self { values }
    }

    pub fn zeros(m_x: usize) -> Self {
        Self {
            values: vec![0.0; m_x - 1],
        }
    }

    /// Number of grid intervals M_x (one more than interior nodes).
    pub fn m_x(&self) -> usize {
        self.values.len() + 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// ∫₀¹ u² dx by the trapezoidal rule (boundary terms vanish).
    pub fn quadrature_l2_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.m_x() as f64
    }
}

/// Which normalization of the fractional powers is active.
///
/// The `eigen` convention takes λ_n^{1/2} = nπ, the unique choice under
/// which ‖v'‖ = ‖A^{1/2}v‖ holds. The `paper` convention is the literature
/// form that takes A^{∓1/2} with eigenvalues n^{∓1} (so ‖A^{-1/2}‖ = 1)
/// while keeping the full power A at n²π²; the two normalizations disagree
/// by factors of π and both are kept selectable so the discrepancy stays
/// visible in every constant that depends on them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    #[default]
    EigenConsistent,
    PaperLiteral,
}

impl Convention {
    pub fn name(self) -> &'static str {
        match self {
            Convention::EigenConsistent => "eigen",
            Convention::PaperLiteral => "paper",
        }
    }

    /// λ_n^alpha as used by the X_α norms: (n²π²)^α or (n²)^α.
    fn norm_factor(self, n: usize, alpha: f64) -> f64 {
        let nf = n as f64;
        match self {
            Convention::EigenConsistent => (nf * nf * PI * PI).powf(alpha),
            Convention::PaperLiteral => (nf * nf).powf(alpha),
        }
    }

    /// ‖A^{-(1-alpha)}‖ under this convention.
    pub fn c_one_minus_alpha(self, alpha: f64) -> f64 {
        // sup_n λ_n^{-(1-α)} is attained at n = 1.
        1.0 / self.norm_factor(1, 1.0 - alpha)
    }
}

impl std::str::FromStr for Convention {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "eigen" => Ok(Convention::EigenConsistent),
            "paper" => Ok(Convention::PaperLiteral),
            other => Err(format!("unknown convention {other:?} (expected eigen|paper)")),
        }
    }
}

/// Eigenvalue n²π² of A on mode n (1-based).
pub fn eigenvalue(n: usize) -> f64 {
    let nf = n as f64;
    nf * nf * PI * PI
}

/// sin(π k / m), with k folded into [0, m/2] so that the exact symmetries of
/// the discrete sine transform hold to the last bit.
fn sin_pi_ratio(k: usize, m: usize) -> f64 {
    let k = k % (2 * m);
    let (k, sign) = if k > m { (2 * m - k, -1.0) } else { (k, 1.0) };
    let k = if 2 * k > m { m - k } else { k };
    sign * (PI * k as f64 / m as f64).sin()
}

/// cos(π k / m), folded the same way.
fn cos_pi_ratio(k: usize, m: usize) -> f64 {
    let k = k % (2 * m);
    let k = if k > m { 2 * m - k } else { k };
    let (k, sign) = if 2 * k > m { (m - k, -1.0) } else { (k, 1.0) };
    sign * (PI * k as f64 / m as f64).cos()
}

/// Precomputed sine/cosine tables for moving between coefficients and the
/// interior grid. Building one costs O(N · M_x); reuse it on hot paths.
#[derive(Debug, Clone)]
pub struct SineBasis {
    n_modes: usize,
    m_x: usize,
    sin: Vec<f64>, // [n][i], row-major over modes
    cos: Vec<f64>,
}

impl SineBasis {
    pub fn new(n_modes: usize, m_x: usize) -> Result<Self> {
        if m_x < 2 || m_x - 1 < n_modes {
            return Err(Error::DimensionMismatch {
                expected: n_modes + 1,
                got: m_x,
            });
        }
        let pts = m_x - 1;
        let mut sin = vec![0.0; n_modes * pts];
        let mut cos = vec![0.0; n_modes * pts];
        for n in 1..=n_modes {
            for i in 1..m_x {
                sin[(n - 1) * pts + (i - 1)] = sin_pi_ratio(n * i, m_x);
                cos[(n - 1) * pts + (i - 1)] = cos_pi_ratio(n * i, m_x);
            }
        }
        Ok(Self {
            n_modes,
            m_x,
            sin,
            cos,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn m_x(&self) -> usize {
        self.m_x
    }

    /// u(x_i) = √2 Σ c_n sin(nπ x_i).
    pub fn synthesize(&self, u: &SpectralField) -> GridFunction {
        self.synthesize_weighted(u, |_| 1.0, &self.sin)
    }

    /// u'(x_i) = √2 Σ c_n nπ cos(nπ x_i).
    pub fn synthesize_derivative(&self, u: &SpectralField) -> GridFunction {
        self.synthesize_weighted(u, |n| n as f64 * PI, &self.cos)
    }

    /// √2 Σ w(n) c_n table_n(x_i) for either table; shared synthesis kernel.
    fn synthesize_weighted(
        &self,
        u: &SpectralField,
        weight: impl Fn(usize) -> f64,
        table: &[f64],
    ) -> GridFunction {
        assert_eq!(u.n_modes(), self.n_modes, "basis/mode count mismatch");
        let pts = self.m_x - 1;
        let mut values = vec![0.0; pts];
        for n in 1..=self.n_modes {
            let c = std::f64::consts::SQRT_2 * weight(n) * u.coeffs()[n - 1];
            if c == 0.0 {
                continue;
            }
            let row = &table[(n - 1) * pts..n * pts];
            for (v, s) in values.iter_mut().zip(row) {
                *v += c * s;
            }
        }
        GridFunction::new(values)
    }

    /// Cosine synthesis of the same coefficient vector (used for the
    /// higher odd derivatives in the direct AG route).
    pub fn synthesize_cos(&self, u: &SpectralField) -> GridFunction {
        self.synthesize_weighted(u, |_| 1.0, &self.cos)
    }

    /// c_n = (√2 / M_x) Σ_i g(x_i) sin(nπ x_i); exact on span{e_1..e_{M_x-1}}.
    pub fn analyze(&self, g: &GridFunction) -> Result<SpectralField> {
        if g.m_x() != self.m_x {
            return Err(Error::DimensionMismatch {
                expected: self.m_x,
                got: g.m_x(),
            });
        }
        let pts = self.m_x - 1;
        let scale = std::f64::consts::SQRT_2 / self.m_x as f64;
        let coeffs = (1..=self.n_modes)
            .map(|n| {
                let row = &self.sin[(n - 1) * pts..n * pts];
                scale
                    * row
                        .iter()
                        .zip(g.values())
                        .map(|(s, v)| s * v)
                        .sum::<f64>()
            })
            .collect();
        Ok(SpectralField { coeffs })
    }
}

/// Discrete sine analysis of a grid function into its first `n_modes`
/// coefficients. Builds a throwaway table; use [`SineBasis`] in loops.
pub fn forward_transform(g: &GridFunction, n_modes: usize) -> Result<SpectralField> {
    SineBasis::new(n_modes, g.m_x())?.analyze(g)
}

/// Evaluate the sine expansion on the interior nodes of an M_x grid.
pub fn inverse_transform(u: &SpectralField, m_x: usize) -> Result<GridFunction> {
    Ok(SineBasis::new(u.n_modes(), m_x)?.synthesize(u))
}

/// ∂u/∂x on the interior nodes, by termwise differentiation of the series.
pub fn spatial_derivative(u: &SpectralField, m_x: usize) -> Result<GridFunction> {
    Ok(SineBasis::new(u.n_modes(), m_x)?.synthesize_derivative(u))
}

/// T(t)u = Σ e^{-n²π²t} (u,e_n) e_n.
pub fn semigroup_apply(t: f64, u: &SpectralField) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    Ok(u.mode_scaled(|n| (-eigenvalue(n) * t).exp()))
}

/// A^order under the active convention.
///
/// Eigenvalue-consistent: any order in [-1, 1], factor (n²π²)^order.
/// Paper-literal: only orders ±1/2 (factor n^{±1}) and ±1 (factor (n²π²)^{±1},
/// matching the full operator) are defined.
pub fn fractional_power_apply(
    order: f64,
    u: &SpectralField,
    convention: Convention,
) -> Result<SpectralField> {
    match convention {
        Convention::EigenConsistent => {
            if !(-1.0..=1.0).contains(&order) {
                return Err(Error::UnsupportedOrder {
                    order,
                    convention: "eigen",
                });
            }
            Ok(u.mode_scaled(|n| eigenvalue(n).powf(order)))
        }
        Convention::PaperLiteral => {
            let eps = 1e-12;
            if (order - 0.5).abs() < eps {
                Ok(u.mode_scaled(|n| n as f64))
            } else if (order + 0.5).abs() < eps {
                Ok(u.mode_scaled(|n| 1.0 / n as f64))
            } else if (order - 1.0).abs() < eps {
                Ok(u.mode_scaled(eigenvalue))
            } else if (order + 1.0).abs() < eps {
                Ok(u.mode_scaled(|n| 1.0 / eigenvalue(n)))
            } else {
                Err(Error::UnsupportedOrder {
                    order,
                    convention: "paper",
                })
            }
        }
    }
}

/// (I - T(ω))⁻¹ u, the periodic resolvent: `coeffs[n] / (1 - e^{-n²π²ω})`.
pub fn resolvent_apply(omega: f64, u: &SpectralField) -> Result<SpectralField> {
    if !(omega > 0.0) {
        return Err(Error::NonPositivePeriod(omega));
    }
    // 1 - e^{-λω} via expm1 so small λω does not cancel.
    Ok(u.mode_scaled(|n| 1.0 / (-(-eigenvalue(n) * omega).exp_m1())))
}

/// ‖u‖_α = ‖A^α u‖ = (Σ (λ_n^α c_n)²)^{1/2} with λ_n per convention.
pub fn norm_alpha(u: &SpectralField, alpha: f64, convention: Convention) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange {
            alpha,
            range: "[0, 1]",
        });
    }
    Ok(u.coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let f = convention.norm_factor(k + 1, alpha) * c;
            f * f
        })
        .sum::<f64>()
        .sqrt())
}
