//! Exponential-integrator weights φ₁(-z), φ₂(-z) for z = λΔt ≥ 0.
//!
//! Both switch to a Taylor series below z = 1e-4 where the direct formulas
//! cancel.

const TAYLOR_CUTOFF: f64 = 1e-4;

/// φ₁(-z) = (1 - e^{-z}) / z.
pub(crate) fn phi1_neg(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z < TAYLOR_CUTOFF {
        1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0
    } else {
        -(-z).exp_m1() / z
    }
}

/// φ₂(-z) = (e^{-z} - 1 + z) / z², with expm1 taming the subtraction.
pub(crate) fn phi2_neg(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z < TAYLOR_CUTOFF {
        0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0
    } else {
        ((-z).exp_m1() + z) / (z * z)
    }
}
