//! Transport maps `T y = Σ c̄_k w_k φ(y·w_k)` over a lifted measure, the
//! cones they live on, and the Ball–Barthe determinant inequality.

pub mod chain;
pub mod gram;
pub mod rearrangement;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::ser::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::measure::{lift_point, DiscreteMeasure, LiftedMeasure, PRECONDITION_TOL};
use crate::polytope::{body_of, in_interior_polar, ConvexPolytope, VertexPolytope};

pub use chain::{chain_verify_thm1, chain_verify_thm2, ChainReport, ConeIntegral, PointwiseSummary};
pub use gram::GramDeterminant;
pub use rearrangement::{
    phi1, phi1_identity_residual, phi1_log_prime, phi1_prime, phi2, phi2_identity_residual, phi2_log_prime, phi2_prime,
    Rearrangement,
};

/// Relative slack allowed in `det ≥ exp ∫ log t`.
pub const BALL_BARTHE_TOL: f64 = 1e-10;
/// Relative tolerance for equality detection.
pub const EQUALITY_TOL: f64 = 1e-9;
/// Slack for `|Ty|² ≤ ∫ φ²`.
pub const LEMMA_STEP_TOL: f64 = 1e-10;
/// Agreement between the two formulas for the last component of `Ty`.
pub const COMPONENT_TOL: f64 = 1e-12;
/// Largest support handled by the brute-force equality test.
pub const MAX_BALL_BARTHE_SUPPORT: usize = 12;
/// `|det V_S|` above which a subset counts as linearly independent.
const INDEPENDENCE_TOL: f64 = 1e-9;

/// `y ∈ C₁` iff `y·s(u) > 0` for every atom.
pub fn in_cone_thm1(y: &DVector<f64>, measure: &DiscreteMeasure) -> bool {
    y.len() == measure.dim() + 1 && measure.directions().all(|u| y.dot(&lift_point(u)) > 0.0)
}

/// The same cone written as `r = y_{n+1} > 0` and `(√n/r)·x ∈ int Z∞*`.
pub fn in_cone_thm1_polar(y: &DVector<f64>, measure: &DiscreteMeasure) -> bool {
    let n = measure.dim();
    if y.len() != n + 1 {
        return false;
    }
    let r = y[n];
    if !(r > 0.0) {
        return false;
    }
    let x = y.rows(0, n) * ((n as f64).sqrt() / r);
    in_interior_polar(&x, measure)
}

/// `z ∈ C₂` iff `r = z_{n+1} > 0` and `−x/(√n·r) ∈ int Z∞`.
pub fn in_cone_thm2(z: &DVector<f64>, measure: &DiscreteMeasure) -> Result<bool> {
    Ok(in_cone_thm2_with(z, &body_of(measure)?))
}

/// [`in_cone_thm2`] against a precomputed body.
pub fn in_cone_thm2_with(z: &DVector<f64>, body: &VertexPolytope) -> bool {
    let n = body.dim();
    if z.len() != n + 1 {
        return false;
    }
    let r = z[n];
    if !(r > 0.0) {
        return false;
    }
    let p = z.rows(0, n) * (-1.0 / ((n as f64).sqrt() * r));
    body.min_slack(&p) > 0.0
}

/// Scalars from one evaluation of the map at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEval {
    /// `∫ φ(y·w)² dZ̄`
    pub phi_square_mass: f64,
    /// `∫ φ(y·w) dZ̄`
    pub phi_mass: f64,
    /// `∫ y·w dZ̄`
    pub dot_mass: f64,
    /// `∫ (y·w)² dZ̄`
    pub dot_square_mass: f64,
    /// `ln det dT(y)`
    pub log_det: f64,
    /// `∫ ln φ′(y·w) dZ̄`
    pub log_rhs: f64,
    /// `|Ty|²`
    pub ty_norm_sq: f64,
}

/// Reusable buffers for [`TransportMap::evaluate`].
#[derive(Debug, Clone)]
pub struct Workspace {
    pub dots: Vec<f64>,
    pub phi: Vec<f64>,
    pub log_prime: Vec<f64>,
    pub log_weights: Vec<f64>,
    pub ty: Vec<f64>,
}

/// Extra checks specific to the Gaussian-to-exponential map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentCheck {
    /// Largest deviation of `Ty|_ℝⁿ` from `−√((n+1)/n)·Σ c_k u_k φ(y·s(u_k))`.
    pub projection_error: f64,
    /// `√(n+1)/n · Σ c_k φ(y·s(u_k))`
    pub height_from_base: f64,
    /// `Σ c̄_k φ(y·w_k) / √(n+1)`
    pub height_from_lift: f64,
    /// `|Ty_{n+1} − height|` maximised over both heights.
    pub height_error: f64,
    pub image_in_cone: bool,
}

impl ComponentCheck {
    pub fn passes(&self, ty: &DVector<f64>) -> bool {
        let scale = ty.amax().max(1.0);
        self.projection_error <= COMPONENT_TOL * scale
            && (self.height_from_base - self.height_from_lift).abs() <= COMPONENT_TOL * scale
            && self.height_error <= COMPONENT_TOL * scale
            && self.image_in_cone
    }
}

/// Everything measured at one point: the image, the differential and both
/// sides of the Ball–Barthe inequality with `t = φ′(y·w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportProbe {
    pub kind: Rearrangement,
    pub y: DVector<f64>,
    pub ty: DVector<f64>,
    pub jacobian: DMatrix<f64>,
    /// LU determinant of the assembled jacobian.
    pub det_jacobian: f64,
    pub min_eigenvalue: f64,
    pub symmetry_error: f64,
    /// `det ∫ φ′ w⊗w dZ̄` by subset expansion.
    pub ball_barthe_lhs: f64,
    /// `exp ∫ ln φ′ dZ̄`
    pub ball_barthe_rhs: f64,
    pub log_ball_barthe_lhs: f64,
    pub log_ball_barthe_rhs: f64,
    pub phi: Vec<f64>,
    pub log_phi_prime: Vec<f64>,
    pub phi_square_mass: f64,
    pub components: Option<ComponentCheck>,
}

impl TransportProbe {
    pub fn ball_barthe_holds(&self) -> bool {
        self.log_ball_barthe_lhs - self.log_ball_barthe_rhs >= (-BALL_BARTHE_TOL).ln_1p()
    }

    /// `|Ty|² ≤ ∫ φ² dZ̄`.
    pub fn lemma_step_holds(&self) -> bool {
        self.ty.norm_squared() <= self.phi_square_mass + LEMMA_STEP_TOL * self.phi_square_mass.max(1.0)
    }

    pub fn positive_definite(&self) -> bool {
        self.min_eigenvalue > 0.0
    }
}

#[derive(serde::Serialize)]
struct ProbeRecord<'a> {
    kind: Rearrangement,
    y: Vec<f64>,
    ty: Vec<f64>,
    jacobian: Vec<Vec<f64>>,
    det_jacobian: f64,
    min_eigenvalue: f64,
    symmetry_error: f64,
    ball_barthe_lhs: f64,
    ball_barthe_rhs: f64,
    log_ball_barthe_lhs: f64,
    log_ball_barthe_rhs: f64,
    ball_barthe_holds: bool,
    lemma_step_holds: bool,
    phi: &'a [f64],
    log_phi_prime: &'a [f64],
    phi_square_mass: f64,
    projection_error: Option<f64>,
    height_from_base: Option<f64>,
    height_from_lift: Option<f64>,
    image_in_cone: Option<bool>,
}

impl Serialize for TransportProbe {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let c = self.components.as_ref();
        ProbeRecord {
            kind: self.kind,
            y: self.y.iter().copied().collect(),
            ty: self.ty.iter().copied().collect(),
            jacobian: self.jacobian.row_iter().map(|r| r.iter().copied().collect()).collect(),
            det_jacobian: self.det_jacobian,
            min_eigenvalue: self.min_eigenvalue,
            symmetry_error: self.symmetry_error,
            ball_barthe_lhs: self.ball_barthe_lhs,
            ball_barthe_rhs: self.ball_barthe_rhs,
            log_ball_barthe_lhs: self.log_ball_barthe_lhs,
            log_ball_barthe_rhs: self.log_ball_barthe_rhs,
            ball_barthe_holds: self.ball_barthe_holds(),
            lemma_step_holds: self.lemma_step_holds(),
            phi: &self.phi,
            log_phi_prime: &self.log_phi_prime,
            phi_square_mass: self.phi_square_mass,
            projection_error: c.map(|c| c.projection_error),
            height_from_base: c.map(|c| c.height_from_base),
            height_from_lift: c.map(|c| c.height_from_lift),
            image_in_cone: c.map(|c| c.image_in_cone),
        }
        .serialize(serializer)
    }
}

/// A transport map bound to one lifted measure, with the determinant
/// expansion precomputed.
#[derive(Debug, Clone)]
pub struct TransportMap {
    kind: Rearrangement,
    base_dim: usize,
    directions: Vec<DVector<f64>>,
    flat: Vec<f64>,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    gram: GramDeterminant,
    base_directions: Vec<DVector<f64>>,
    base_weights: Vec<f64>,
    body: Option<VertexPolytope>,
}

impl TransportMap {
    pub fn new(kind: Rearrangement, lifted: &LiftedMeasure) -> Result<Self> {
        let n = lifted.base_dim();
        let nf = n as f64;
        let directions: Vec<DVector<f64>> = lifted.atoms().iter().map(|a| a.direction.clone()).collect();
        let weights: Vec<f64> = lifted.atoms().iter().map(|a| a.weight).collect();
        let unscale = ((nf + 1.0) / nf).sqrt();
        let base_directions: Vec<DVector<f64>> = directions.iter().map(|w| w.rows(0, n) * -unscale).collect();
        let base_weights: Vec<f64> = weights.iter().map(|c| c * nf / (nf + 1.0)).collect();
        let body = match kind {
            Rearrangement::ExponentialToGaussian => None,
            Rearrangement::GaussianToExponential => {
                let base = DiscreteMeasure::new(
                    n,
                    base_directions.iter().zip(&base_weights).map(|(u, &c)| (u.iter().copied().collect(), c)).collect(),
                )?;
                Some(body_of(&base)?)
            }
        };
        Ok(TransportMap {
            kind,
            base_dim: n,
            flat: directions.iter().flat_map(|w| w.iter().copied()).collect(),
            gram: GramDeterminant::new(&directions),
            log_weights: weights.iter().map(|c| c.ln()).collect(),
            directions,
            weights,
            base_directions,
            base_weights,
            body,
        })
    }

    /// Lifts `measure` and binds the map to it.
    pub fn for_measure(kind: Rearrangement, measure: &DiscreteMeasure) -> Result<Self> {
        Self::new(kind, &measure.lift()?)
    }

    pub fn kind(&self) -> Rearrangement {
        self.kind
    }

    /// Ambient dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.base_dim + 1
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The body `Z∞` (only built for the Gaussian-to-exponential map).
    pub fn body(&self) -> Option<&VertexPolytope> {
        self.body.as_ref()
    }

    pub fn workspace(&self) -> Workspace {
        let m = self.len();
        Workspace {
            dots: vec![0.0; m],
            phi: vec![0.0; m],
            log_prime: vec![0.0; m],
            log_weights: vec![0.0; m],
            ty: vec![0.0; self.dim()],
        }
    }

    #[inline]
    fn dots_into(&self, y: &[f64], out: &mut [f64]) {
        let d = self.dim();
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.flat[k * d..(k + 1) * d].iter().zip(y).map(|(a, b)| a * b).sum();
        }
    }

    /// Whether every `y·w_k` lies in the domain of `φ`.
    pub fn in_domain(&self, y: &[f64]) -> bool {
        let d = self.dim();
        (0..self.len()).all(|k| {
            let t: f64 = self.flat[k * d..(k + 1) * d].iter().zip(y).map(|(a, b)| a * b).sum();
            self.kind.accepts(t)
        })
    }

    /// Evaluates the map at `y`, filling `ws`. Returns `None` outside the domain.
    pub fn evaluate(&self, y: &[f64], ws: &mut Workspace) -> Option<PointEval> {
        let d = self.dim();
        self.dots_into(y, &mut ws.dots);
        let mut e = PointEval {
            phi_square_mass: 0.0,
            phi_mass: 0.0,
            dot_mass: 0.0,
            dot_square_mass: 0.0,
            log_det: 0.0,
            log_rhs: 0.0,
            ty_norm_sq: 0.0,
        };
        ws.ty.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..self.len() {
            let t = ws.dots[k];
            let (p, lp) = self.kind.eval(t)?;
            let c = self.weights[k];
            ws.phi[k] = p;
            ws.log_prime[k] = lp;
            ws.log_weights[k] = self.log_weights[k] + lp;
            e.phi_square_mass += c * p * p;
            e.phi_mass += c * p;
            e.dot_mass += c * t;
            e.dot_square_mass += c * t * t;
            e.log_rhs += c * lp;
            let cp = c * p;
            for (tyi, wi) in ws.ty.iter_mut().zip(&self.flat[k * d..(k + 1) * d]) {
                *tyi += cp * wi;
            }
        }
        e.log_det = self.gram.log_det(&ws.log_weights);
        e.ty_norm_sq = ws.ty.iter().map(|v| v * v).sum();
        Some(e)
    }

    fn domain_error(&self, y: &DVector<f64>) -> Error {
        Error::Domain(format!("point {:?} lies outside the domain of the {:?} map", y.as_slice(), self.kind))
    }

    fn check_len(&self, y: &DVector<f64>) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::InvalidMeasure(format!(
                "point has dimension {}, map acts on R^{}",
                y.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `T y`.
    pub fn apply(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(y)?;
        let mut ws = self.workspace();
        self.evaluate(y.as_slice(), &mut ws).ok_or_else(|| self.domain_error(y))?;
        Ok(DVector::from_vec(ws.ty))
    }

    /// `dT(y) = Σ c̄_k φ′(y·w_k) w_k w_kᵀ`.
    pub fn jacobian(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_len(y)?;
        let mut ws = self.workspace();
        self.evaluate(y.as_slice(), &mut ws).ok_or_else(|| self.domain_error(y))?;
        Ok(self.assemble_jacobian(&ws))
    }

    fn assemble_jacobian(&self, ws: &Workspace) -> DMatrix<f64> {
        let d = self.dim();
        let mut jac = DMatrix::zeros(d, d);
        for (k, w) in self.directions.iter().enumerate() {
            jac.ger(self.weights[k] * ws.log_prime[k].exp(), w, w, 1.0);
        }
        jac
    }

    /// Full probe at `y`.
    pub fn probe(&self, y: &DVector<f64>) -> Result<TransportProbe> {
        self.check_len(y)?;
        let mut ws = self.workspace();
        let e = self.evaluate(y.as_slice(), &mut ws).ok_or_else(|| self.domain_error(y))?;
        let jacobian = self.assemble_jacobian(&ws);
        let symmetry_error = (&jacobian - jacobian.transpose()).amax();
        let min_eigenvalue =
            SymmetricEigen::new(jacobian.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let ty = DVector::from_column_slice(&ws.ty);
        let components = self.body.as_ref().map(|body| self.component_check(&ws, &e, &ty, body));
        Ok(TransportProbe {
            kind: self.kind,
            y: y.clone(),
            det_jacobian: jacobian.determinant(),
            jacobian,
            min_eigenvalue,
            symmetry_error,
            ball_barthe_lhs: e.log_det.exp(),
            ball_barthe_rhs: e.log_rhs.exp(),
            log_ball_barthe_lhs: e.log_det,
            log_ball_barthe_rhs: e.log_rhs,
            phi: ws.phi.clone(),
            log_phi_prime: ws.log_prime.clone(),
            phi_square_mass: e.phi_square_mass,
            ty,
            components,
        })
    }

    fn component_check(
        &self,
        ws: &Workspace,
        e: &PointEval,
        ty: &DVector<f64>,
        body: &VertexPolytope,
    ) -> ComponentCheck {
        let n = self.base_dim;
        let nf = n as f64;
        let mut projection = DVector::zeros(n);
        let mut base_mass = 0.0;
        for (k, u) in self.base_directions.iter().enumerate() {
            projection.axpy(self.base_weights[k] * ws.phi[k], u, 1.0);
            base_mass += self.base_weights[k] * ws.phi[k];
        }
        projection *= -((nf + 1.0) / nf).sqrt();
        let projection_error = (ty.rows(0, n) - &projection).amax();
        let height_from_base = (nf + 1.0).sqrt() / nf * base_mass;
        let height_from_lift = e.phi_mass / (nf + 1.0).sqrt();
        let height_error = (ty[n] - height_from_base).abs().max((ty[n] - height_from_lift).abs());
        ComponentCheck {
            projection_error,
            height_from_base,
            height_from_lift,
            height_error,
            image_in_cone: in_cone_thm2_with(ty, body),
        }
    }
}

/// Probe of `T₁` (exponential to Gaussian) at a cone point `y`.
pub fn transport1(y: &DVector<f64>, lifted: &LiftedMeasure) -> Result<TransportProbe> {
    TransportMap::new(Rearrangement::ExponentialToGaussian, lifted)?.probe(y)
}

/// Probe of `T₂` (Gaussian to exponential) at any `y ∈ ℝ^{n+1}`.
pub fn transport2(y: &DVector<f64>, lifted: &LiftedMeasure) -> Result<TransportProbe> {
    TransportMap::new(Rearrangement::GaussianToExponential, lifted)?.probe(y)
}

/// Outcome of [`ball_barthe_check`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BallBarthe {
    /// `det Σ c_i t_i u_i u_iᵀ`
    pub lhs: f64,
    /// `exp Σ c_i ln t_i`
    pub rhs: f64,
    pub log_lhs: f64,
    pub log_rhs: f64,
    pub holds: bool,
    /// Products of `t` over independent `n`-subsets agree within `1e-9`.
    pub equality_expected: bool,
    /// `|lhs − rhs| ≤ 1e-9·rhs`
    pub equality_observed: bool,
    /// `ln(max/min)` of those products.
    pub product_spread: f64,
    pub independent_subsets: usize,
}

/// Checks `det Σ c_i t_i u_i u_iᵀ ≥ exp Σ c_i ln t_i` for an isotropic `ν`
/// and decides whether equality is predicted and observed.
pub fn ball_barthe_check(nu: &DiscreteMeasure, values: &[f64]) -> Result<BallBarthe> {
    if values.len() != nu.len() {
        return Err(Error::Precondition(format!("{} values for a support of size {}", values.len(), nu.len())));
    }
    if values.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::Precondition("Ball-Barthe values must be positive and finite".into()));
    }
    if nu.len() > MAX_BALL_BARTHE_SUPPORT {
        return Err(Error::SupportTooLarge { size: nu.len(), limit: MAX_BALL_BARTHE_SUPPORT });
    }
    let report = nu.moment_report();
    if report.isotropy_residual > PRECONDITION_TOL {
        return Err(Error::NotIsotropic {
            isotropy_residual: report.isotropy_residual,
            first_moment_norm: report.first_moment_norm(),
            tolerance: PRECONDITION_TOL,
        });
    }
    let vectors: Vec<DVector<f64>> = nu.directions().cloned().collect();
    let gram = GramDeterminant::new(&vectors);
    let log_t: Vec<f64> = values.iter().map(|t| t.ln()).collect();
    let log_weighted: Vec<f64> = nu.weights().zip(&log_t).map(|(c, lt)| c.ln() + lt).collect();
    let log_lhs = gram.log_det(&log_weighted);
    let log_rhs: f64 = nu.weights().zip(&log_t).map(|(c, lt)| c * lt).sum();
    let sums = gram.independent_subset_sums(&log_t, INDEPENDENCE_TOL);
    let max = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = sums.iter().copied().fold(f64::INFINITY, f64::min);
    let product_spread = if sums.is_empty() { 0.0 } else { max - min };
    Ok(BallBarthe {
        lhs: log_lhs.exp(),
        rhs: log_rhs.exp(),
        log_lhs,
        log_rhs,
        holds: log_lhs - log_rhs >= (-BALL_BARTHE_TOL).ln_1p(),
        equality_expected: product_spread.exp_m1() <= EQUALITY_TOL,
        equality_observed: (log_lhs - log_rhs).exp_m1().abs() <= EQUALITY_TOL,
        product_spread,
        independent_subsets: sums.len(),
    })
}
