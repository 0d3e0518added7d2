//! Monotone rearrangements between the exponential and Gaussian laws.
//!
//! `φ₁ : (0, ∞) → ℝ` carries `e^{−t} dt` on `(0, ∞)` to `π^{−1/2} e^{−s²} ds`;
//! `φ₂ : ℝ → (0, ∞)` carries the Gaussian back to the exponential law.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{erfc, inv_log_erfc, log_erfc, LN_SQRT_PI};

/// Which rearrangement a transport map uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rearrangement {
    /// `φ₁(t) = erf⁻¹(1 − 2e^{−t})`, defined for `t > 0`.
    ExponentialToGaussian,
    /// `φ₂(t) = −ln(erfc(t)/2)`, defined on all of `ℝ`.
    GaussianToExponential,
}

impl Rearrangement {
    /// `(φ(t), ln φ′(t))`, or `None` outside the domain.
    #[inline]
    pub fn eval(self, t: f64) -> Option<(f64, f64)> {
        match self {
            Rearrangement::ExponentialToGaussian => {
                if !(t > 0.0) || !t.is_finite() {
                    return None;
                }
                let p = phi1_unchecked(t);
                Some((p, LN_SQRT_PI + p * p - t))
            }
            Rearrangement::GaussianToExponential => {
                if !t.is_finite() {
                    return None;
                }
                let p = phi2(t);
                Some((p, p - t * t - LN_SQRT_PI))
            }
        }
    }

    pub fn accepts(self, t: f64) -> bool {
        match self {
            Rearrangement::ExponentialToGaussian => t > 0.0 && t.is_finite(),
            Rearrangement::GaussianToExponential => t.is_finite(),
        }
    }
}

/// Solves `½·erfc(−φ) = 1 − e^{−t}` in the form that keeps full relative
/// accuracy on both sides of `t = ln 2`.
fn phi1_unchecked(t: f64) -> f64 {
    if t >= LN_2 {
        // erfc(φ) = 2e^{−t}
        inv_log_erfc(LN_2 - t)
    } else {
        // erfc(−φ) = 2(1 − e^{−t})
        -inv_log_erfc(LN_2 + (-(-t).exp_m1()).ln())
    }
}

fn check_phi1_domain(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("phi1 needs t > 0, got {t}")))
    }
}

pub fn phi1(t: f64) -> Result<f64> {
    check_phi1_domain(t)?;
    Ok(phi1_unchecked(t))
}

/// `φ₁′(t) = √π·exp(φ₁(t)² − t)`.
pub fn phi1_prime(t: f64) -> Result<f64> {
    Ok(phi1_log_prime(t)?.exp())
}

pub fn phi1_log_prime(t: f64) -> Result<f64> {
    let p = phi1(t)?;
    Ok(LN_SQRT_PI + p * p - t)
}

/// `φ₂(t) = −ln((1 − erf t)/2)`, always positive.
pub fn phi2(t: f64) -> f64 {
    if t < 0.0 {
        // erfc(t) = 2 − erfc(−t); keep the small quantity separate.
        -(-0.5 * erfc(-t)).ln_1p()
    } else {
        LN_2 - log_erfc(t)
    }
}

/// `φ₂′(t) = exp(φ₂(t) − t²)/√π`.
pub fn phi2_prime(t: f64) -> f64 {
    phi2_log_prime(t).exp()
}

pub fn phi2_log_prime(t: f64) -> f64 {
    phi2(t) - t * t - LN_SQRT_PI
}

/// `|−t + ln√π + φ₁(t)² − ln φ₁′(t)|`.
pub fn phi1_identity_residual(t: f64) -> Result<f64> {
    let p = phi1(t)?;
    let d = phi1_prime(t)?;
    Ok((-t + LN_SQRT_PI + p * p - d.ln()).abs())
}

/// `|t² − φ₂(t) + ln φ₂′(t) + ln√π|`.
pub fn phi2_identity_residual(t: f64) -> f64 {
    (t * t - phi2(t) + phi2_prime(t).ln() + LN_SQRT_PI).abs()
}
