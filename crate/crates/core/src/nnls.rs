//! Lawson–Hanson active-set nonnegative least squares.

use nalgebra::{DMatrix, DVector};

/// Solves `min ‖A x − b‖₂` subject to `x ≥ 0`.
///
/// Returns the minimizer and the residual norm `‖A x − b‖₂`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let (m, n) = a.shape();
    assert_eq!(b.len(), m, "nnls: right-hand side length mismatch");
    let mut x = DVector::zeros(n);
    if n == 0 {
        return (x, b.norm());
    }
    let tol = 10.0 * f64::EPSILON * a.norm().max(1.0) * (m.max(n) as f64);
    let mut passive = vec![false; n];
    let max_outer = 3 * n + 10;

    for _ in 0..max_outer {
        let w = a.tr_mul(&(b - a * &x));
        let candidate = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;

        // Inner loop: keep the passive least-squares solution feasible.
        let mut stalled = false;
        for _ in 0..=n {
            let z = passive_solve(a, b, &passive);
            let infeasible: Vec<usize> = (0..n).filter(|&q| passive[q] && z[q] <= tol).collect();
            if infeasible.is_empty() {
                x = z;
                break;
            }
            let alpha = infeasible.iter().map(|&q| x[q] / (x[q] - z[q])).fold(f64::INFINITY, f64::min);
            if !alpha.is_finite() {
                stalled = true;
                break;
            }
            x += (z - &x) * alpha;
            for q in 0..n {
                if passive[q] && x[q] <= tol {
                    passive[q] = false;
                    x[q] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
        if stalled {
            passive[j] = false;
            break;
        }
    }
    for v in x.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let residual = (a * &x - b).norm();
    (x, residual)
}

fn passive_solve(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&j| passive[j]).collect();
    let sub = a.select_columns(&cols);
    let sol = sub.svd(true, true).solve(b, 1e-14).unwrap_or_else(|_| DVector::zeros(cols.len()));
    let mut z = DVector::zeros(passive.len());
    for (k, &j) in cols.iter().enumerate() {
        z[j] = sol[k];
    }
    z
}
