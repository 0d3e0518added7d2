//! Closed-form volume bounds and verification reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, SOLVER_TOL};
use crate::polytope::{body_of, is_regular_simplex, polar_of, volume};

/// Relative slack in the inequality test.
pub const INEQUALITY_TOL: f64 = 1e-9;
/// Tolerance of the regular-simplex test behind the equality flag.
pub const EQUALITY_SIMPLEX_TOL: f64 = 1e-10;
/// An equality case must have `|gap| ≤ 1e-7·bound`.
pub const EQUALITY_GAP_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    /// Upper bound on the polar body `Z∞*`.
    T1,
    /// Lower bound on the body `Z∞`.
    T2,
}

/// `ln n!`
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn require_dim(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Precondition(format!("bounds need n >= 2, got {n}")));
    }
    Ok(n as f64)
}

/// `n^{n/2} (n+1)^{(n+1)/2} / n!`, the largest polar volume.
pub fn theorem1_bound(n: usize) -> Result<f64> {
    let nf = require_dim(n)?;
    Ok((0.5 * nf * nf.ln() + 0.5 * (nf + 1.0) * (nf + 1.0).ln() - ln_factorial(n)).exp())
}

/// `(n+1)^{(n+1)/2} n^{−n/2} / n!`, the smallest body volume.
pub fn theorem2_bound(n: usize) -> Result<f64> {
    let nf = require_dim(n)?;
    Ok((0.5 * (nf + 1.0) * (nf + 1.0).ln() - 0.5 * nf * nf.ln() - ln_factorial(n)).exp())
}

/// Thresholds used to build a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub isotropy: f64,
    pub inequality: f64,
    pub equality_simplex: f64,
    pub equality_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            isotropy: SOLVER_TOL,
            inequality: INEQUALITY_TOL,
            equality_simplex: EQUALITY_SIMPLEX_TOL,
            equality_gap: EQUALITY_GAP_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub theorem: Theorem,
    pub n: usize,
    pub volume: f64,
    pub bound: f64,
    /// `bound − volume` for [`Theorem::T1`], `volume − bound` for [`Theorem::T2`].
    pub gap: f64,
    pub holds: bool,
    pub equality: bool,
    pub tolerances: Tolerances,
}

impl VerificationReport {
    fn assemble(theorem: Theorem, measure: &DiscreteMeasure, volume: f64, bound: f64) -> Self {
        let tolerances = Tolerances::default();
        let gap = match theorem {
            Theorem::T1 => bound - volume,
            Theorem::T2 => volume - bound,
        };
        VerificationReport {
            theorem,
            n: measure.dim(),
            volume,
            bound,
            gap,
            holds: gap >= -tolerances.inequality * bound,
            equality: is_regular_simplex(measure, tolerances.equality_simplex),
            tolerances,
        }
    }

    /// An equality flag must come with a vanishing gap.
    pub fn is_consistent(&self) -> bool {
        !self.equality || self.gap.abs() <= self.tolerances.equality_gap * self.bound
    }
}

/// `|Z∞*|` against [`theorem1_bound`].
pub fn verify_theorem1(measure: &DiscreteMeasure) -> Result<VerificationReport> {
    measure.require_isotropic_centered(SOLVER_TOL)?;
    let v = volume(&polar_of(measure)?)?;
    Ok(VerificationReport::assemble(Theorem::T1, measure, v, theorem1_bound(measure.dim())?))
}

/// `|Z∞|` against [`theorem2_bound`].
pub fn verify_theorem2(measure: &DiscreteMeasure) -> Result<VerificationReport> {
    measure.require_isotropic_centered(SOLVER_TOL)?;
    let v = volume(&body_of(measure)?)?;
    Ok(VerificationReport::assemble(Theorem::T2, measure, v, theorem2_bound(measure.dim())?))
}
