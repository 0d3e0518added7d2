//! `det Σ a_k v_k v_kᵀ` through the Cauchy–Binet expansion.
//!
//! With `V` the matrix of the vectors, `det(V diag(a) Vᵀ) = Σ_S det(V_S)² Π_{k∈S} a_k`
//! over `d`-subsets `S`. Every term is non-negative, so the sum keeps full
//! relative precision even when the `a_k` span many orders of magnitude.

use nalgebra::{DMatrix, DVector};

/// Beyond this many subsets the expansion falls back to a Cholesky factor.
pub const MAX_SUBSETS: usize = 4096;
/// Subsets with `|det V_S|` below this are treated as dependent.
const DEPENDENT_DET: f64 = 1e-14;

/// All `k`-subsets of `0..m` in lexicographic order.
pub fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > m {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + m - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn binomial(m: usize, k: usize) -> usize {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(m - i) / (i + 1))
}

fn subset_det(vectors: &[DVector<f64>], subset: &[usize]) -> f64 {
    let d = subset.len();
    DMatrix::from_fn(d, d, |r, c| vectors[subset[c]][r]).determinant()
}

#[derive(Debug, Clone)]
enum Strategy {
    /// `(members, ln det(V_S)²)` for every independent subset.
    Expansion {
        members: Vec<usize>,
        log_sq_det: Vec<f64>,
    },
    Cholesky,
}

/// Precomputed weighted Gram determinant for a fixed set of vectors in `ℝ^d`.
#[derive(Debug, Clone)]
pub struct GramDeterminant {
    dim: usize,
    vectors: Vec<DVector<f64>>,
    strategy: Strategy,
}

impl GramDeterminant {
    pub fn new(vectors: &[DVector<f64>]) -> Self {
        let dim = vectors.first().map_or(0, |v| v.len());
        let vectors = vectors.to_vec();
        if binomial(vectors.len(), dim) > MAX_SUBSETS {
            return GramDeterminant { dim, vectors, strategy: Strategy::Cholesky };
        }
        let mut members = Vec::new();
        let mut log_sq_det = Vec::new();
        for s in combinations(vectors.len(), dim) {
            let det = subset_det(&vectors, &s);
            if det.abs() > DEPENDENT_DET {
                members.extend_from_slice(&s);
                log_sq_det.push(2.0 * det.abs().ln());
            }
        }
        GramDeterminant { dim, vectors, strategy: Strategy::Expansion { members, log_sq_det } }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether the exact subset expansion is in use.
    pub fn is_expansion(&self) -> bool {
        matches!(self.strategy, Strategy::Expansion { .. })
    }

    /// `ln det Σ a_k v_k v_kᵀ` from `ln a_k`. Returns `−∞` for a singular sum.
    pub fn log_det(&self, log_weights: &[f64]) -> f64 {
        debug_assert_eq!(log_weights.len(), self.vectors.len());
        match &self.strategy {
            Strategy::Expansion { members, log_sq_det } => {
                let d = self.dim;
                let mut max = f64::NEG_INFINITY;
                let terms = log_sq_det
                    .iter()
                    .enumerate()
                    .map(|(k, &g)| g + members[k * d..(k + 1) * d].iter().map(|&i| log_weights[i]).sum::<f64>());
                let mut buf = Vec::with_capacity(log_sq_det.len());
                for t in terms {
                    max = max.max(t);
                    buf.push(t);
                }
                if max == f64::NEG_INFINITY {
                    return max;
                }
                max + buf.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
            }
            Strategy::Cholesky => {
                let shift = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut m = DMatrix::zeros(self.dim, self.dim);
                for (v, &lw) in self.vectors.iter().zip(log_weights) {
                    m.ger((lw - shift).exp(), v, v, 1.0);
                }
                match m.cholesky() {
                    Some(ch) => 2.0 * ch.l().diagonal().iter().map(|x| x.ln()).sum::<f64>() + self.dim as f64 * shift,
                    None => f64::NEG_INFINITY,
                }
            }
        }
    }

    /// `ln Π_{k∈S} t_k` over the independent `d`-subsets `S` (threshold
    /// `|det V_S| > tol`), used for equality detection.
    pub fn independent_subset_sums(&self, log_values: &[f64], tol: f64) -> Vec<f64> {
        combinations(self.vectors.len(), self.dim)
            .into_iter()
            .filter(|s| subset_det(&self.vectors, s).abs() > tol)
            .map(|s| s.iter().map(|&i| log_values[i]).sum())
            .collect()
    }
}
