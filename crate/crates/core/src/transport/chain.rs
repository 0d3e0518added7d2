//! Sampled verification of both transport arguments: every pointwise
//! inequality along the way, plus a Monte Carlo estimate of the cone
//! integral that closes each chain.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{in_cone_thm2_with, Rearrangement, TransportMap, BALL_BARTHE_TOL, LEMMA_STEP_TOL};
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::polytope::{body_of, bounding_box, polar_of, volume, ConvexPolytope};
use crate::rng::{chunked, MeanAccumulator};
use crate::special::LN_SQRT_PI;
use crate::verifier::{ln_factorial, Theorem, INEQUALITY_TOL};

pub const MIN_SAMPLES: usize = 10_000;
/// Relative slack for the exact identities checked at every point.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Relative slack for the assembled pointwise chain.
pub const CHAIN_TOL: f64 = 1e-9;
/// Radial cut-off is `R_MAX_SCALE / √(n+1)`.
pub const R_MAX_SCALE: f64 = 40.0;
/// Stream offset separating integral samples from pointwise samples.
const INTEGRAL_STREAM: u64 = 1 << 40;

/// Counts and worst cases over the sampled points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointwiseSummary {
    pub points: usize,
    /// Points where the map could not be evaluated.
    pub domain_failures: usize,
    pub ball_barthe_failures: usize,
    /// `min (ln lhs − ln rhs)`; never below `ln(1 − 1e-10)` when all pass.
    pub min_ball_barthe_log_margin: f64,
    /// `|Ty|² ≤ ∫φ²` for the first chain, `∫(y·w)² = |y|²` for the second.
    pub step_failures: usize,
    pub max_step_excess: f64,
    /// The rearrangement identity integrated against `Z̄`.
    pub identity_failures: usize,
    pub max_identity_residual: f64,
    /// The assembled chain of inequalities at the point.
    pub chain_failures: usize,
    /// `Ty ∉ C` (second chain only).
    pub cone_failures: usize,
}

impl PointwiseSummary {
    fn new() -> Self {
        PointwiseSummary {
            points: 0,
            domain_failures: 0,
            ball_barthe_failures: 0,
            min_ball_barthe_log_margin: f64::INFINITY,
            step_failures: 0,
            max_step_excess: f64::NEG_INFINITY,
            identity_failures: 0,
            max_identity_residual: 0.0,
            chain_failures: 0,
            cone_failures: 0,
        }
    }

    fn merge(&mut self, o: &PointwiseSummary) {
        self.points += o.points;
        self.domain_failures += o.domain_failures;
        self.ball_barthe_failures += o.ball_barthe_failures;
        self.min_ball_barthe_log_margin = self.min_ball_barthe_log_margin.min(o.min_ball_barthe_log_margin);
        self.step_failures += o.step_failures;
        self.max_step_excess = self.max_step_excess.max(o.max_step_excess);
        self.identity_failures += o.identity_failures;
        self.max_identity_residual = self.max_identity_residual.max(o.max_identity_residual);
        self.chain_failures += o.chain_failures;
        self.cone_failures += o.cone_failures;
    }

    pub fn passes(&self) -> bool {
        self.points > 0
            && self.domain_failures
                + self.ball_barthe_failures
                + self.step_failures
                + self.identity_failures
                + self.chain_failures
                + self.cone_failures
                == 0
    }

    fn ball_barthe(&mut self, log_det: f64, log_rhs: f64) {
        let margin = log_det - log_rhs;
        self.min_ball_barthe_log_margin = self.min_ball_barthe_log_margin.min(margin);
        if !(margin >= (-BALL_BARTHE_TOL).ln_1p()) {
            self.ball_barthe_failures += 1;
        }
    }

    fn identity(&mut self, lhs: f64, rhs: f64) {
        let r = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0);
        self.max_identity_residual = self.max_identity_residual.max(r);
        if !(r <= IDENTITY_TOL) {
            self.identity_failures += 1;
        }
    }

    fn chain(&mut self, low: f64, high: f64) {
        if !(low <= high + CHAIN_TOL * low.abs().max(high.abs()).max(1.0)) {
            self.chain_failures += 1;
        }
    }
}

/// Monte Carlo estimate of `∫_C exp(−√(n+1)·z_{n+1}) dz` by slicing the
/// cone at height `r ∈ [0, r_max]` and sampling each slice's bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeIntegral {
    pub samples: usize,
    pub hits: usize,
    pub r_max: f64,
    /// Volume of the bounding box of the unit slice.
    pub box_volume: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub closed_form: f64,
    /// `|estimate − closed_form| / stderr`
    pub deviation: f64,
    pub within_three_stderr: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub theorem: Theorem,
    pub n: usize,
    pub atoms: usize,
    pub samples: usize,
    pub seed: u64,
    /// `|Z∞*|` for the first chain, `|Z∞|` for the second.
    pub volume: f64,
    /// The value of the cone integral in closed form.
    pub closed_form: f64,
    /// `closed_form ≤ 1` (first chain) or `closed_form ≥ 1` (second), within `1e-9`.
    pub bound_holds: bool,
    pub pointwise: PointwiseSummary,
    pub integral: ConeIntegral,
    pub passed: bool,
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::Precondition(format!("chain verification needs >= {MIN_SAMPLES} samples, got {samples}")));
    }
    Ok(())
}

/// Shared slice sampler: `x` uniform in `scale(r)·box`, `r` uniform on
/// `[0, r_max]`, weight `hit · e^{−√(n+1) r} · r_max · |box| · scale(r)^n`.
#[allow(clippy::too_many_arguments)]
fn cone_integral<F, S, V>(
    n: usize,
    lo: &DVector<f64>,
    hi: &DVector<f64>,
    samples: usize,
    seed: u64,
    scale: S,
    visit: V,
    member: F,
    closed_form: f64,
) -> (ConeIntegral, Vec<PointwiseSummary>)
where
    F: Fn(&[f64]) -> bool + Sync,
    S: Fn(f64) -> f64 + Sync,
    V: FnMut(&[f64], &mut PointwiseSummary) + Sync + Clone,
{
    let root = ((n + 1) as f64).sqrt();
    let r_max = R_MAX_SCALE / root;
    let box_volume: f64 = (0..n).map(|i| hi[i] - lo[i]).product();
    let parts = chunked(samples, seed, INTEGRAL_STREAM, |rng, count| {
        let mut acc = MeanAccumulator::default();
        let mut summary = PointwiseSummary::new();
        let mut hits = 0usize;
        let mut y = vec![0.0; n + 1];
        let mut visit = visit.clone();
        for _ in 0..count {
            let r = r_max * rng.random::<f64>();
            let s = scale(r);
            for i in 0..n {
                y[i] = s * (lo[i] + (hi[i] - lo[i]) * rng.random::<f64>());
            }
            y[n] = r;
            if member(&y) {
                hits += 1;
                visit(&y, &mut summary);
                acc.push((-root * r).exp() * r_max * box_volume * s.powi(n as i32));
            } else {
                acc.push(0.0);
            }
        }
        (acc, summary, hits)
    });
    let mut acc = MeanAccumulator::default();
    let mut hits = 0;
    let mut summaries = Vec::with_capacity(parts.len());
    for (a, s, h) in &parts {
        acc.merge(a);
        hits += h;
        summaries.push(*s);
    }
    let estimate = acc.mean();
    let stderr = acc.stderr();
    let deviation = (estimate - closed_form).abs() / stderr;
    (
        ConeIntegral {
            samples,
            hits,
            r_max,
            box_volume,
            estimate,
            stderr,
            closed_form,
            deviation,
            within_three_stderr: (estimate - closed_form).abs() <= 3.0 * stderr,
        },
        summaries,
    )
}

/// First chain: for `y` in `C₁ = {y : y·s(u) > 0}`,
/// `e^{−∫y·w} = π^{−(n+1)/2} e^{−∫φ²} e^{∫ln φ′} ≤ π^{−(n+1)/2} e^{−|Ty|²} det dT`,
/// and `∫_{C₁} e^{−∫ y·w} = |Z∞*| n^{−n/2} n! (n+1)^{−(n+1)/2} ≤ 1`.
pub fn chain_verify_thm1(measure: &DiscreteMeasure, samples: usize, seed: u64) -> Result<ChainReport> {
    check_samples(samples)?;
    let map = TransportMap::for_measure(Rearrangement::ExponentialToGaussian, measure)?;
    let polar = polar_of(measure)?;
    let vol = volume(&polar)?;
    let n = measure.dim();
    let nf = n as f64;
    let half_dim_ln_pi = (nf + 1.0) * LN_SQRT_PI;
    let closed_form = (vol.ln() - 0.5 * nf * nf.ln() + ln_factorial(n) - 0.5 * (nf + 1.0) * (nf + 1.0).ln()).exp();
    let (lo, hi) = bounding_box(&polar);
    let root_n = nf.sqrt();

    let visit = {
        let map = &map;
        let mut ws = map.workspace();
        move |y: &[f64], s: &mut PointwiseSummary| {
            s.points += 1;
            let Some(e) = map.evaluate(y, &mut ws) else {
                s.domain_failures += 1;
                return;
            };
            s.ball_barthe(e.log_det, e.log_rhs);
            let excess = (e.ty_norm_sq - e.phi_square_mass) / e.phi_square_mass.max(1.0);
            s.max_step_excess = s.max_step_excess.max(excess);
            if !(excess <= LEMMA_STEP_TOL) {
                s.step_failures += 1;
            }
            // ∫ y·w = ∫ (ln√π + φ² − ln φ′)
            s.identity(e.dot_mass, half_dim_ln_pi + e.phi_square_mass - e.log_rhs);
            s.chain(-e.dot_mass, -half_dim_ln_pi - e.ty_norm_sq + e.log_det);
        }
    };
    let (integral, parts) =
        cone_integral(n, &lo, &hi, samples, seed, |r| r / root_n, visit, |y| map.in_domain(y), closed_form);
    let mut pointwise = PointwiseSummary::new();
    parts.iter().for_each(|p| pointwise.merge(p));
    let bound_holds = closed_form <= 1.0 + INEQUALITY_TOL;
    Ok(ChainReport {
        theorem: Theorem::T1,
        n,
        atoms: measure.len(),
        samples,
        seed,
        volume: vol,
        closed_form,
        bound_holds,
        passed: pointwise.passes() && integral.within_three_stderr && bound_holds,
        pointwise,
        integral,
    })
}

/// Second chain: for Gaussian `y`,
/// `e^{−|y|²} = π^{(n+1)/2} e^{−∫φ} e^{∫ln φ′} ≤ π^{(n+1)/2} e^{−√(n+1) Ty_{n+1}} det dT`
/// with `Ty ∈ C₂`, and `∫_{C₂} e^{−√(n+1) z_{n+1}} = n^{n/2} |Z∞| n! (n+1)^{−(n+1)/2} ≥ 1`.
///
/// Points are drawn from the density `π^{−(n+1)/2} e^{−|y|²}`.
pub fn chain_verify_thm2(measure: &DiscreteMeasure, samples: usize, seed: u64) -> Result<ChainReport> {
    check_samples(samples)?;
    let map = TransportMap::for_measure(Rearrangement::GaussianToExponential, measure)?;
    let body = body_of(measure)?;
    let vol = volume(&body)?;
    let n = measure.dim();
    let nf = n as f64;
    let dim = n + 1;
    let half_dim_ln_pi = (nf + 1.0) * LN_SQRT_PI;
    let root = (nf + 1.0).sqrt();
    let closed_form = (vol.ln() + 0.5 * nf * nf.ln() + ln_factorial(n) - 0.5 * (nf + 1.0) * (nf + 1.0).ln()).exp();
    let sigma = std::f64::consts::FRAC_1_SQRT_2;

    let parts = chunked(samples, seed, 0, |rng, count| {
        let mut s = PointwiseSummary::new();
        let mut ws = map.workspace();
        let mut y = vec![0.0; dim];
        for _ in 0..count {
            y.iter_mut().for_each(|v| *v = sigma * rng.sample::<f64, _>(StandardNormal));
            s.points += 1;
            let Some(e) = map.evaluate(&y, &mut ws) else {
                s.domain_failures += 1;
                continue;
            };
            let y_sq: f64 = y.iter().map(|v| v * v).sum();
            s.ball_barthe(e.log_det, e.log_rhs);
            let iso = (e.dot_square_mass - y_sq).abs() / y_sq.max(1.0);
            s.max_step_excess = s.max_step_excess.max(iso);
            if !(iso <= IDENTITY_TOL) {
                s.step_failures += 1;
            }
            // ∫ (y·w)² = ∫ (φ − ln φ′ − ln√π)
            s.identity(e.dot_square_mass, e.phi_mass - e.log_rhs - half_dim_ln_pi);
            // ∫ φ = √(n+1)·Ty_{n+1}
            s.identity(e.phi_mass, root * ws.ty[n]);
            let ty = DVector::from_column_slice(&ws.ty);
            if !in_cone_thm2_with(&ty, &body) {
                s.cone_failures += 1;
            }
            s.chain(-y_sq, half_dim_ln_pi - root * ws.ty[n] + e.log_det);
        }
        s
    });
    let mut pointwise = PointwiseSummary::new();
    parts.iter().for_each(|p| pointwise.merge(p));

    let (lo, hi) = bounding_box(&body);
    // Slice at height r is −r√n·Z∞, whose box is −r√n·[hi, lo].
    let (lo, hi) = (-hi, -lo);
    let root_n = nf.sqrt();
    let inv_root_n = 1.0 / root_n;
    let (integral, _) = cone_integral(
        n,
        &lo,
        &hi,
        samples,
        seed,
        |r| r * root_n,
        |_: &[f64], _: &mut PointwiseSummary| {},
        |z| {
            let r = z[n];
            r > 0.0 && {
                let p = DVector::from_fn(n, |i, _| -z[i] * inv_root_n / r);
                body.min_slack(&p) > 0.0
            }
        },
        closed_form,
    );
    let bound_holds = 1.0 <= closed_form + INEQUALITY_TOL;
    Ok(ChainReport {
        theorem: Theorem::T2,
        n,
        atoms: measure.len(),
        samples,
        seed,
        volume: vol,
        closed_form,
        bound_holds,
        passed: pointwise.passes() && integral.within_three_stderr && bound_holds,
        pointwise,
        integral,
    })
}
