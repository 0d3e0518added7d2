//! Finitely supported measures on the unit sphere and the measure-level
//! quantities built from them: moments, isotropy, L_p norms, the vector
//! `t°`, and the lift onto the subsphere `D ⊂ S^n`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nnls::nnls;

/// Directions closer than this (Euclidean) are merged into one atom.
pub const MERGE_TOL: f64 = 1e-12;
/// Default isotropy tolerance for exact constructions.
pub const CONSTRUCTED_TOL: f64 = 1e-10;
/// Isotropy tolerance for measures produced by the weight solver.
pub const SOLVER_TOL: f64 = 1e-7;
/// Isotropy required by the norm comparison check and by the lift.
pub const PRECONDITION_TOL: f64 = 1e-8;
/// Residual threshold of the hemisphere feasibility problem.
pub const HEMISPHERE_TOL: f64 = 1e-9;

/// A point mass on the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub direction: DVector<f64>,
    pub weight: f64,
}

/// Finitely supported nonnegative measure on `S^{n-1}`.
///
/// Atoms are stored in lexicographic order of their directions; every
/// "values" slice passed to the methods below is aligned with that order.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

/// Weighted moments of a measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub moment_matrix: DMatrix<f64>,
    pub first_moment: DVector<f64>,
    pub total_mass: f64,
    /// `‖Σ c_i u_i⊗u_i − I‖_F`
    pub isotropy_residual: f64,
    pub centroid: DVector<f64>,
}

impl MomentReport {
    pub fn from_atoms<'a, I>(dim: usize, atoms: I) -> Self
    where
        I: IntoIterator<Item = &'a Atom>,
    {
        let mut moment_matrix = DMatrix::zeros(dim, dim);
        let mut first_moment = DVector::zeros(dim);
        let mut total_mass = 0.0;
        for atom in atoms {
            let u = &atom.direction;
            for j in 0..dim {
                for k in 0..=j {
                    moment_matrix[(j, k)] += atom.weight * u[j] * u[k];
                }
            }
            first_moment.axpy(atom.weight, u, 1.0);
            total_mass += atom.weight;
        }
        for j in 0..dim {
            for k in 0..j {
                moment_matrix[(k, j)] = moment_matrix[(j, k)];
            }
        }
        let isotropy_residual = (&moment_matrix - DMatrix::identity(dim, dim)).norm();
        let centroid = if total_mass > 0.0 { &first_moment / total_mass } else { DVector::zeros(dim) };
        MomentReport { moment_matrix, first_moment, total_mass, isotropy_residual, centroid }
    }

    pub fn first_moment_norm(&self) -> f64 {
        self.first_moment.norm()
    }
}

/// Result of comparing `|t°|` with `|t:Z|_2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Outcome {
    pub lhs: f64,
    pub rhs: f64,
    pub equality_gap: f64,
}

impl Lemma1Outcome {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + 1e-12 * self.rhs.max(1.0)
    }
}

fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

impl DiscreteMeasure {
    /// Builds a measure, re-normalizing directions and merging atoms whose
    /// directions agree within [`MERGE_TOL`].
    pub fn new(dim: usize, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidMeasure(format!("dimension must be >= 2, got {dim}")));
        }
        let mut normalized: Vec<Atom> = Vec::with_capacity(atoms.len());
        for (i, (u, c)) in atoms.into_iter().enumerate() {
            if u.len() != dim {
                return Err(Error::InvalidMeasure(format!("atom {i} has {} coordinates, expected {dim}", u.len())));
            }
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::InvalidMeasure(format!("atom {i} has non-positive weight {c}")));
            }
            let v = DVector::from_vec(u);
            let norm = v.norm();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::InvalidMeasure(format!("atom {i} has a zero or non-finite direction")));
            }
            let direction = v / norm;
            match normalized.iter_mut().find(|a| (&a.direction - &direction).norm() <= MERGE_TOL) {
                Some(existing) => existing.weight += c,
                None => normalized.push(Atom { direction, weight: c }),
            }
        }
        if normalized.is_empty() {
            return Err(Error::InvalidMeasure("measure has no atoms".into()));
        }
        normalized.sort_by(|a, b| lex_cmp(&a.direction, &b.direction));
        Ok(DiscreteMeasure { dim, atoms: normalized })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn directions(&self) -> impl Iterator<Item = &DVector<f64>> {
        self.atoms.iter().map(|a| &a.direction)
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.weight)
    }

    pub fn moment_report(&self) -> MomentReport {
        MomentReport::from_atoms(self.dim, &self.atoms)
    }

    /// Isotropic and centered: residual and first moment both within `tol`.
    pub fn is_isotropic_centered(&self, tol: f64) -> bool {
        let r = self.moment_report();
        r.isotropy_residual <= tol && r.first_moment_norm() <= tol
    }

    /// Errors with the measured residuals unless the measure is
    /// isotropic-centered within `tol`.
    pub fn require_isotropic_centered(&self, tol: f64) -> Result<MomentReport> {
        let r = self.moment_report();
        if r.isotropy_residual <= tol && r.first_moment_norm() <= tol {
            Ok(r)
        } else {
            Err(Error::NotIsotropic {
                isotropy_residual: r.isotropy_residual,
                first_moment_norm: r.first_moment_norm(),
                tolerance: tol,
            })
        }
    }

    fn require_isotropic(&self, tol: f64) -> Result<MomentReport> {
        let r = self.moment_report();
        if r.isotropy_residual <= tol {
            Ok(r)
        } else {
            Err(Error::NotIsotropic {
                isotropy_residual: r.isotropy_residual,
                first_moment_norm: r.first_moment_norm(),
                tolerance: tol,
            })
        }
    }

    /// True iff the support is not contained in any closed hemisphere,
    /// i.e. the origin is interior to the convex hull of the support.
    ///
    /// Decided as: the directions span `R^n` and `0 = Σ λ_i u_i` for some
    /// strictly positive `λ`. Writing `λ = 1 + μ`, the second condition is
    /// the NNLS problem `Σ μ_i u_i = −Σ u_i`, `μ ≥ 0` with zero residual.
    pub fn hemisphere_check(&self) -> bool {
        let n = self.dim;
        let m = self.atoms.len();
        if m <= n {
            return false;
        }
        let a = DMatrix::from_fn(n, m, |r, c| self.atoms[c].direction[r]);
        if a.clone().svd(false, false).rank(1e-9) < n {
            return false;
        }
        let rhs: DVector<f64> = -a.column_sum();
        let (_, residual) = nnls(&a, &rhs);
        residual <= HEMISPHERE_TOL * rhs.norm().max(1.0)
    }

    fn check_values(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.atoms.len() {
            return Err(Error::Precondition(format!(
                "{} values supplied for {} atoms",
                values.len(),
                self.atoms.len()
            )));
        }
        if values.iter().any(|t| !t.is_finite()) {
            return Err(Error::Precondition("values must be finite".into()));
        }
        Ok(())
    }

    /// `|t:Z|_p = (Σ c_i |t_i|^p)^{1/p}`.
    pub fn lp_norm(&self, values: &[f64], p: f64) -> Result<f64> {
        self.check_values(values)?;
        if !(p >= 1.0) {
            return Err(Error::Domain(format!("L_p norm needs p >= 1, got {p}")));
        }
        let s: f64 = self.atoms.iter().zip(values).map(|(a, t)| a.weight * t.abs().powf(p)).sum();
        Ok(s.powf(1.0 / p))
    }

    /// `t° = Σ c_i t_i u_i`.
    pub fn t_circle(&self, values: &[f64]) -> Result<DVector<f64>> {
        self.check_values(values)?;
        let mut out = DVector::zeros(self.dim);
        for (a, t) in self.atoms.iter().zip(values) {
            out.axpy(a.weight * t, &a.direction, 1.0);
        }
        Ok(out)
    }

    /// `|t°| ≤ |t:Z|_2` for isotropic measures.
    pub fn lemma1_check(&self, values: &[f64]) -> Result<Lemma1Outcome> {
        self.require_isotropic(PRECONDITION_TOL)?;
        let lhs = self.t_circle(values)?.norm();
        let rhs = self.lp_norm(values, 2.0)?;
        Ok(Lemma1Outcome { lhs, rhs, equality_gap: rhs - lhs })
    }

    /// An isotropic measure with exactly `n` atoms has unit weights on an
    /// orthonormal basis. Returns whether that holds for this measure.
    pub fn orthogonality_observation(&self) -> Result<bool> {
        if self.atoms.len() != self.dim {
            return Err(Error::Domain(format!(
                "orthogonality observation needs exactly {} atoms, got {}",
                self.dim,
                self.atoms.len()
            )));
        }
        self.require_isotropic(PRECONDITION_TOL)?;
        let weights_ok = self.atoms.iter().all(|a| (a.weight - 1.0).abs() <= 1e-8);
        let orthogonal = self
            .atoms
            .iter()
            .enumerate()
            .all(|(i, a)| self.atoms[i + 1..].iter().all(|b| a.direction.dot(&b.direction).abs() <= 1e-8));
        Ok(weights_ok && orthogonal)
    }

    /// The induced measure on `S^n`: atoms `s(u_i)` with weights `(n+1)/n · c_i`.
    pub fn lift(&self) -> Result<LiftedMeasure> {
        self.require_isotropic_centered(PRECONDITION_TOL)?;
        let n = self.dim as f64;
        let scale = -(n / (n + 1.0)).sqrt();
        let top = 1.0 / (n + 1.0).sqrt();
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom { direction: lift_direction(&a.direction, scale, top), weight: (n + 1.0) / n * a.weight })
            .collect();
        Ok(LiftedMeasure { base_dim: self.dim, atoms })
    }

    pub fn to_file(&self) -> MeasureFile {
        MeasureFile {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomFile { u: a.direction.iter().copied().collect(), c: a.weight })
                .collect(),
        }
    }

    pub fn from_file(file: MeasureFile) -> Result<Self> {
        DiscreteMeasure::new(file.dim, file.atoms.into_iter().map(|a| (a.u, a.c)).collect())
    }

    pub fn to_json(&self) -> String {
        // MeasureFile only holds numbers and vectors; serialization cannot fail.
        serde_json::to_string_pretty(&self.to_file()).expect("measure serialization")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(s)?)
    }
}

/// `s(u) = (−√(n/(n+1))·u, 1/√(n+1))`.
pub fn lift_point(u: &DVector<f64>) -> DVector<f64> {
    let n = u.len() as f64;
    lift_direction(u, -(n / (n + 1.0)).sqrt(), 1.0 / (n + 1.0).sqrt())
}

fn lift_direction(u: &DVector<f64>, scale: f64, top: f64) -> DVector<f64> {
    let n = u.len();
    DVector::from_fn(n + 1, |i, _| if i < n { scale * u[i] } else { top })
}

/// The measure `Z̄` on `S^n`, concentrated on `D = {w : w·e_{n+1} = 1/√(n+1)}`.
///
/// Atom `k` is the image of atom `k` of the base measure.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedMeasure {
    base_dim: usize,
    atoms: Vec<Atom>,
}

/// Outcome of the three lift checks: isotropy on `S^n`, total mass `n+1`,
/// and first moment `√(n+1)·e_{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftVerification {
    pub report: MomentReport,
    pub mass_error: f64,
    pub first_moment_error: f64,
    pub isotropy_ok: bool,
    pub mass_ok: bool,
    pub centroid_ok: bool,
    pub tolerance: f64,
}

impl LiftVerification {
    pub fn passes(&self) -> bool {
        self.isotropy_ok && self.mass_ok && self.centroid_ok
    }
}

impl LiftedMeasure {
    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    /// Ambient dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.base_dim + 1
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn moment_report(&self) -> MomentReport {
        MomentReport::from_atoms(self.dim(), &self.atoms)
    }

    /// Runs the isotropy, mass and centroid checks at tolerance `1e-10`.
    pub fn verify(&self) -> LiftVerification {
        self.verify_with_tol(CONSTRUCTED_TOL)
    }

    pub fn verify_with_tol(&self, tol: f64) -> LiftVerification {
        let report = self.moment_report();
        let np1 = self.dim() as f64;
        let mut expected = DVector::zeros(self.dim());
        expected[self.base_dim] = np1.sqrt();
        let first_moment_error = (&report.first_moment - expected).norm();
        let mass_error = (report.total_mass - np1).abs();
        LiftVerification {
            isotropy_ok: report.isotropy_residual <= tol,
            mass_ok: mass_error <= tol,
            centroid_ok: first_moment_error <= tol,
            mass_error,
            first_moment_error,
            report,
            tolerance: tol,
        }
    }

    /// Every atom lies on the subsphere `D` within `tol`.
    pub fn on_subsphere(&self, tol: f64) -> bool {
        let top = 1.0 / (self.dim() as f64).sqrt();
        self.atoms
            .iter()
            .all(|a| (a.direction.norm() - 1.0).abs() <= tol && (a.direction[self.base_dim] - top).abs() <= tol)
    }

    pub fn to_file(&self) -> LiftedFile {
        LiftedFile {
            base_dim: self.base_dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomFile { u: a.direction.iter().copied().collect(), c: a.weight })
                .collect(),
        }
    }
}

/// `{"dim": n, "atoms": [{"u": [...], "c": f64}, ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub dim: usize,
    pub atoms: Vec<AtomFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomFile {
    pub u: Vec<f64>,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedFile {
    pub base_dim: usize,
    pub atoms: Vec<AtomFile>,
}
