//! Dedekind eta q-product and the flat log-determinant constant
//! zeta'_Delta(0) = -log(4 pi^2 |eta(tau)|^4).

use crate::error::{EngineError, EngineResult};
use num_complex::Complex64;

/// |eta(tau)| via the q-product, truncated when factors are within 1e-16
/// of 1.
pub fn dedekind_eta_abs(tau: Complex64) -> EngineResult<f64> {
    if tau.im <= 0.0 {
        return Err(EngineError::InvalidTau);
    }
    let i = Complex64::new(0.0, 1.0);
    let q = (2.0 * std::f64::consts::PI * i * tau).exp();
    let mut acc = ((std::f64::consts::PI * i * tau) / 12.0).exp();
    let mut qn = Complex64::new(1.0, 0.0);
    for _ in 0..100_000 {
        qn *= q;
        if qn.norm() < 1e-18 {
            break;
        }
        acc *= Complex64::new(1.0, 0.0) - qn;
    }
    Ok(acc.norm())
}

/// zeta'_Delta(0) for the flat Dolbeault Laplacian with modulus tau.
pub fn dedekind_log_det(tau: Complex64) -> EngineResult<f64> {
    let eta = dedekind_eta_abs(tau)?;
    Ok(-(4.0 * std::f64::consts::PI * std::f64::consts::PI * eta.powi(4)).ln())
}

/// Alias matching the geometric usage.
pub fn zeta_prime_zero(tau: Complex64) -> EngineResult<f64> {
    dedekind_log_det(tau)
}
