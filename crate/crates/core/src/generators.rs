//! Isotropic, centered test measures: closed-form families and seeded
//! random ones whose weights are solved by nonnegative least squares.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, SOLVER_TOL};
use crate::nnls::nnls;
use crate::rng::{stream_rng, unit_vector};

/// Weights at or below this are dropped from solver output.
pub const DROP_WEIGHT: f64 = 1e-9;
/// Resampling budget of the random generators.
pub const MAX_ATTEMPTS: usize = 50;

/// Vertices of the regular simplex inscribed in `S^{n-1}`, each with weight `n/(n+1)`.
///
/// Uses `v_i = α e_i + β 𝟙` for `i ≤ n` and `v_{n+1} = −𝟙/√n`, with
/// `α = √((n+1)/n)` and `β = (1/√n − α)/n` so that the vertices sum to zero.
pub fn regular_simplex_measure(n: usize) -> Result<DiscreteMeasure> {
    if n < 2 {
        return Err(Error::Precondition(format!("simplex needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    let alpha = ((nf + 1.0) / nf).sqrt();
    let beta = (1.0 / nf.sqrt() - alpha) / nf;
    let weight = nf / (nf + 1.0);
    let mut atoms: Vec<(Vec<f64>, f64)> = (0..n)
        .map(|i| {
            let v = (0..n).map(|j| if i == j { alpha + beta } else { beta }).collect();
            (v, weight)
        })
        .collect();
    atoms.push((vec![-1.0 / nf.sqrt(); n], weight));
    DiscreteMeasure::new(n, atoms)
}

/// `±f_i` for the columns of `frame` (identity by default), weight 1/2 each.
pub fn cross_polytope_measure(n: usize, frame: Option<&DMatrix<f64>>) -> Result<DiscreteMeasure> {
    if n < 2 {
        return Err(Error::Precondition(format!("cross-polytope needs n >= 2, got {n}")));
    }
    let identity = DMatrix::identity(n, n);
    let frame = frame.unwrap_or(&identity);
    if frame.shape() != (n, n) {
        return Err(Error::Precondition(format!("frame must be {n}x{n}")));
    }
    let defect = (frame.tr_mul(frame) - &identity).amax();
    if defect > 1e-10 {
        return Err(Error::Precondition(format!("frame is not orthogonal (defect {defect:e})")));
    }
    let mut atoms = Vec::with_capacity(2 * n);
    for col in frame.column_iter() {
        let v: Vec<f64> = col.iter().copied().collect();
        atoms.push((v.iter().map(|x| -x).collect(), 0.5));
        atoms.push((v, 0.5));
    }
    DiscreteMeasure::new(n, atoms)
}

/// Stacked linear system `Σ c_i (u_i⊗u_i, u_i) = (I, 0)`.
///
/// Off-diagonal moment rows are scaled by `√2` so that the residual norm
/// equals `sqrt(‖M − I‖_F² + ‖Σ c_i u_i‖²)`.
fn isotropy_system(directions: &[DVector<f64>]) -> (DMatrix<f64>, DVector<f64>) {
    let n = directions[0].len();
    let rows = n * (n + 1) / 2 + n;
    let mut a = DMatrix::zeros(rows, directions.len());
    let mut b = DVector::zeros(rows);
    let mut r = 0;
    for j in 0..n {
        for k in j..n {
            let s = if j == k { 1.0 } else { std::f64::consts::SQRT_2 };
            for (i, u) in directions.iter().enumerate() {
                a[(r, i)] = s * u[j] * u[k];
            }
            b[r] = if j == k { 1.0 } else { 0.0 };
            r += 1;
        }
    }
    for j in 0..n {
        for (i, u) in directions.iter().enumerate() {
            a[(r, i)] = u[j];
        }
        r += 1;
    }
    (a, b)
}

/// Nonnegative weights making the given unit directions isotropic and
/// centered, in the least-squares sense. Returns `(weights, residual)`.
pub fn solve_isotropic_weights(directions: &[DVector<f64>]) -> (DVector<f64>, f64) {
    let (a, b) = isotropy_system(directions);
    nnls(&a, &b)
}

/// Measure from directions and solved weights, or `None` when the solution
/// is not admissible at [`SOLVER_TOL`].
fn admissible(n: usize, directions: &[DVector<f64>], weights: &DVector<f64>) -> Option<DiscreteMeasure> {
    let atoms: Vec<(Vec<f64>, f64)> = directions
        .iter()
        .zip(weights.iter())
        .filter(|(_, &c)| c > DROP_WEIGHT)
        .map(|(u, &c)| (u.iter().copied().collect(), c))
        .collect();
    if atoms.len() < n + 1 {
        return None;
    }
    let measure = DiscreteMeasure::new(n, atoms).ok()?;
    (measure.is_isotropic_centered(SOLVER_TOL) && measure.hemisphere_check()).then_some(measure)
}

/// Residual of the nonlinear isotropy system in directions and weights,
/// including the unit-norm constraints `(|u_i|² − 1)/2 = 0`.
fn nonlinear_residual(n: usize, u: &[DVector<f64>], c: &[f64]) -> DVector<f64> {
    let m = u.len();
    let rows = n * (n + 1) / 2 + n + m;
    let mut f = DVector::zeros(rows);
    let mut r = 0;
    for j in 0..n {
        for k in j..n {
            let s = if j == k { 1.0 } else { std::f64::consts::SQRT_2 };
            let sum: f64 = u.iter().zip(c).map(|(ui, ci)| ci * ui[j] * ui[k]).sum();
            f[r] = s * (sum - if j == k { 1.0 } else { 0.0 });
            r += 1;
        }
    }
    for j in 0..n {
        f[r] = u.iter().zip(c).map(|(ui, ci)| ci * ui[j]).sum();
        r += 1;
    }
    for ui in u {
        f[r] = 0.5 * (ui.norm_squared() - 1.0);
        r += 1;
    }
    f
}

fn nonlinear_jacobian(n: usize, u: &[DVector<f64>], c: &[f64]) -> DMatrix<f64> {
    let m = u.len();
    let rows = n * (n + 1) / 2 + n + m;
    // Columns: u_1 (n entries), ..., u_m, then c_1..c_m.
    let mut jac = DMatrix::zeros(rows, m * (n + 1));
    let wcol = m * n;
    let mut r = 0;
    for j in 0..n {
        for k in j..n {
            let s = if j == k { 1.0 } else { std::f64::consts::SQRT_2 };
            for i in 0..m {
                jac[(r, i * n + j)] += s * c[i] * u[i][k];
                jac[(r, i * n + k)] += s * c[i] * u[i][j];
                jac[(r, wcol + i)] = s * u[i][j] * u[i][k];
            }
            r += 1;
        }
    }
    for j in 0..n {
        for i in 0..m {
            jac[(r, i * n + j)] = c[i];
            jac[(r, wcol + i)] = u[i][j];
        }
        r += 1;
    }
    for i in 0..m {
        for l in 0..n {
            jac[(r, i * n + l)] = u[i][l];
        }
        r += 1;
    }
    jac
}

/// Moves directions (and provisional weights) the minimum-norm distance
/// onto the isotropic-centered variety using damped Gauss–Newton steps.
/// Returns the unit directions, or `None` when the iteration stalls.
fn project_directions(n: usize, start: &[DVector<f64>], weights: &[f64]) -> Option<Vec<DVector<f64>>> {
    let m = start.len();
    let mut u: Vec<DVector<f64>> = start.to_vec();
    let mut c: Vec<f64> = weights.to_vec();
    let mut f = nonlinear_residual(n, &u, &c);
    for _ in 0..200 {
        if f.norm() <= 1e-14 {
            break;
        }
        let jac = nonlinear_jacobian(n, &u, &c);
        let step = jac.svd(true, true).solve(&(-&f), 1e-12).ok()?;
        let mut lambda = 1.0;
        loop {
            let trial_u: Vec<DVector<f64>> = (0..m).map(|i| &u[i] + step.rows(i * n, n) * lambda).collect();
            let trial_c: Vec<f64> = (0..m).map(|i| c[i] + lambda * step[m * n + i]).collect();
            let trial_f = nonlinear_residual(n, &trial_u, &trial_c);
            if trial_f.norm() < f.norm() {
                u = trial_u;
                c = trial_c;
                f = trial_f;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return None;
            }
        }
    }
    if f.norm() > 1e-10 {
        return None;
    }
    Some(
        u.into_iter()
            .map(|v| {
                let norm = v.norm();
                v / norm
            })
            .collect(),
    )
}

/// Tries plain weight solving on `directions`, then weight solving after
/// projecting the directions onto the feasible variety.
fn repair(n: usize, directions: &[DVector<f64>], start_weights: &[f64]) -> (Option<DiscreteMeasure>, f64) {
    let (w, residual) = solve_isotropic_weights(directions);
    if residual <= SOLVER_TOL {
        if let Some(m) = admissible(n, directions, &w) {
            return (Some(m), residual);
        }
    }
    let Some(projected) = project_directions(n, directions, start_weights) else {
        return (None, residual);
    };
    let (w, residual) = solve_isotropic_weights(&projected);
    if residual > SOLVER_TOL {
        return (None, residual);
    }
    (admissible(n, &projected, &w), residual)
}

/// A seeded random isotropic centered measure with at most `m` atoms.
///
/// Draws `m` uniform directions (ChaCha20 stream = attempt index) and solves
/// the weights by NNLS. When the sampled directions admit no exact
/// solution, they are first moved onto the solution variety by a
/// minimum-norm Gauss–Newton projection and the weights re-solved.
pub fn random_isotropic_measure(n: usize, m: usize, seed: u64) -> Result<DiscreteMeasure> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    if m < n + 1 {
        return Err(Error::Precondition(format!(
            "need at least n+1 = {} atoms for a centered isotropic measure, got {m}",
            n + 1
        )));
    }
    let start_weights = vec![n as f64 / m as f64; m];
    let mut last_residual = f64::INFINITY;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = stream_rng(seed, attempt as u64);
        let directions: Vec<DVector<f64>> = (0..m).map(|_| unit_vector(&mut rng, n)).collect();
        let (measure, residual) = repair(n, &directions, &start_weights);
        last_residual = residual;
        if let Some(measure) = measure {
            return Ok(measure);
        }
    }
    Err(Error::Infeasible { attempts: MAX_ATTEMPTS, last_residual })
}

/// Splits every atom into two directions `u ± eps·ξ` (ξ a random tangent
/// vector with `|ξ| ∈ [1/2, 1]`), renormalizes, and re-solves the weights.
///
/// Splitting keeps the support from collapsing back onto `n+1` points: the
/// only centered isotropic measures with `n+1` atoms are regular simplices.
pub fn perturb_and_repair(measure: &DiscreteMeasure, eps: f64, seed: u64) -> Result<DiscreteMeasure> {
    if !(eps > 0.0 && eps < 0.3) {
        return Err(Error::Precondition(format!("eps must lie in (0, 0.3), got {eps}")));
    }
    let n = measure.dim();
    let mut last_residual = f64::INFINITY;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = stream_rng(seed, attempt as u64);
        let mut directions = Vec::with_capacity(2 * measure.len());
        let mut weights = Vec::with_capacity(2 * measure.len());
        for atom in measure.atoms() {
            let u = &atom.direction;
            let g = unit_vector(&mut rng, n);
            let tangent = &g - u * u.dot(&g);
            let norm = tangent.norm();
            if norm < 1e-8 {
                continue;
            }
            let radius: f64 = rng.random_range(0.5..=1.0);
            let xi = tangent * (eps * radius / norm);
            for sign in [1.0, -1.0] {
                let v = u + &xi * sign;
                let len = v.norm();
                directions.push(v / len);
                weights.push(atom.weight / 2.0);
            }
        }
        if directions.len() < 2 * measure.len() {
            continue;
        }
        let (out, residual) = repair(n, &directions, &weights);
        last_residual = residual;
        if let Some(out) = out {
            return Ok(out);
        }
    }
    Err(Error::Infeasible { attempts: MAX_ATTEMPTS, last_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_has_expected_geometry() {
        for n in 2..=8 {
            let z = regular_simplex_measure(n).unwrap();
            assert_eq!(z.len(), n + 1);
            let r = z.moment_report();
            assert!(r.isotropy_residual <= 1e-12, "n={n}: {}", r.isotropy_residual);
            assert!(r.first_moment_norm() <= 1e-12);
            assert!((r.total_mass - n as f64).abs() <= 1e-12);
            let atoms = z.atoms();
            for i in 0..atoms.len() {
                for j in i + 1..atoms.len() {
                    let d = atoms[i].direction.dot(&atoms[j].direction);
                    assert!((d + 1.0 / n as f64).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn triangle_angles() {
        let z = regular_simplex_measure(2).unwrap();
        for a in z.atoms() {
            assert!((a.weight - 2.0 / 3.0).abs() < 1e-15);
        }
        let cos = z.atoms()[0].direction.dot(&z.atoms()[1].direction);
        assert!((cos.acos().to_degrees() - 120.0).abs() < 1e-10);
    }

    #[test]
    fn cross_with_rotation() {
        let theta: f64 = 0.3;
        let frame = DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
        let z = cross_polytope_measure(2, Some(&frame)).unwrap();
        assert!(z.moment_report().isotropy_residual <= 1e-14);
        assert!((z.moment_report().total_mass - 2.0).abs() <= 1e-15);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(cross_polytope_measure(2, Some(&bad)).is_err());
    }

    #[test]
    fn weights_recovered_on_simplex_support() {
        let z = regular_simplex_measure(3).unwrap();
        let dirs: Vec<DVector<f64>> = z.directions().cloned().collect();
        let (w, residual) = solve_isotropic_weights(&dirs);
        assert!(residual <= 1e-12);
        for c in w.iter() {
            assert!((c - 0.75).abs() <= 1e-12);
        }
    }

    #[test]
    fn random_measure_contract() {
        for seed in 0..5 {
            let z = random_isotropic_measure(2, 4, seed).unwrap();
            assert!(z.is_isotropic_centered(SOLVER_TOL));
            assert!(z.hemisphere_check());
            assert!(z.len() <= 4);
        }
        assert!(matches!(random_isotropic_measure(3, 3, 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn random_measure_is_deterministic() {
        let a = random_isotropic_measure(3, 8, 7).unwrap().to_json();
        let b = random_isotropic_measure(3, 8, 7).unwrap().to_json();
        assert_eq!(a, b);
        let c = random_isotropic_measure(3, 8, 8).unwrap().to_json();
        assert_ne!(a, c);
    }

    #[test]
    fn perturbation_stays_close() {
        let z = regular_simplex_measure(3).unwrap();
        for &eps in &[1e-4, 1e-2] {
            let p = perturb_and_repair(&z, eps, 1).unwrap();
            assert!(p.is_isotropic_centered(SOLVER_TOL));
            for a in p.atoms() {
                let nearest = z.directions().map(|u| (u - &a.direction).norm()).fold(f64::INFINITY, f64::min);
                assert!(nearest <= 5.0 * eps, "eps={eps}: {nearest}");
            }
        }
        assert!(perturb_and_repair(&z, 0.3, 1).is_err());
        assert!(perturb_and_repair(&z, 0.0, 1).is_err());
    }
}
