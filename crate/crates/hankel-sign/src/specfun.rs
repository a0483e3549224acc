//! Complex gamma function and friends.
//!
//! Every b-function in this crate is a ratio of gamma functions, so the
//! accuracy of [`log_gamma`] is the precision floor for the whole pipeline.
//! Ratios are always formed as `exp(lnΓ(a) − lnΓ(b))`: `|Γ(1 − iξ)|` underflows
//! once `|ξ|` passes roughly 170.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// ln √(2π)
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_6e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

/// Principal branch of ln Γ(z) for `Re z > 0`.
///
/// Lanczos (g = 607/128) on `Re z ≥ 1/2`, one step of the recurrence below that.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("log_gamma: non-finite argument {z}")));
    }
    if z.re <= 0.0 {
        return Err(Error::Domain(format!("log_gamma: Re z = {} ≤ 0", z.re)));
    }
    if z.re < 0.5 {
        return Ok(lanczos(z + 1.0) - z.ln());
    }
    Ok(lanczos(z))
}

fn lanczos(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (k, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        x += *c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (z + 0.5) * t.ln() - t + x.ln() + LN_SQRT_2PI
}

/// Γ(z) for `Re z > 0`.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    log_gamma(z).map(|l| l.exp())
}

/// Γ(a)/Γ(b) through log-gamma, safe for large imaginary parts.
pub fn gamma_ratio(a: Complex64, b: Complex64) -> Result<Complex64> {
    Ok((log_gamma(a)? - log_gamma(b)?).exp())
}

/// Real Γ(x) for any real x that is not a pole (reflection below 1/2).
pub fn gamma_real(x: f64) -> Result<f64> {
    if x > 0.0 {
        return Ok(log_gamma(Complex64::new(x, 0.0))?.re.exp());
    }
    if x == x.floor() {
        return Err(Error::Domain(format!("gamma_real: pole at {x}")));
    }
    // Γ(x)Γ(1 − x) = π / sin(πx)
    let g1 = log_gamma(Complex64::new(1.0 - x, 0.0))?.re.exp();
    Ok(PI / ((PI * x).sin() * g1))
}

/// 1/Γ(x) for real x; zero at the poles.
pub fn rgamma_real(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    1.0 / gamma_real(x).expect("non-pole")
}

/// Leading Stirling term for Γ(α + iλ) as `|λ| → ∞`:
/// `√(2π) |λ|^{α−1/2} e^{−π|λ|/2} e^{i(λ ln|λ| − λ + π(α−1/2)/2)}`, conjugated for λ < 0.
///
/// Relative error against the true value is O(1/|λ|).
pub fn stirling_gamma(alpha: f64, lambda: f64) -> Result<Complex64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("stirling_gamma: alpha = {alpha} must be > 0")));
    }
    if !(lambda.abs() >= 1.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("stirling_gamma: |lambda| = {} < 1", lambda.abs())));
    }
    let l = lambda.abs();
    let modulus = (LN_SQRT_2PI + (alpha - 0.5) * l.ln() - PI * l / 2.0).exp();
    let phase = l * (l.ln() - 1.0) + PI * (2.0 * alpha - 1.0) / 4.0;
    let v = Complex64::from_polar(modulus, phase);
    Ok(if lambda < 0.0 { v.conj() } else { v })
}
