#![allow(dead_code)]

use isomeasure::polytope::{bounding_box, polar_of};
use isomeasure::rng::{gaussian_vector, stream_rng};
use isomeasure::{
    cross_polytope_measure, in_cone_thm1, random_isotropic_measure, regular_simplex_measure, DiscreteMeasure,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    stream_rng(seed, 0xacce)
}

/// Haar-ish orthonormal frame from the QR factor of a Gaussian matrix.
pub fn random_frame(n: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    let g = DMatrix::from_fn(n, n, |_, _| r.sample::<f64, _>(rand_distr::StandardNormal));
    g.qr().q()
}

/// Unit weights on the columns of a random orthonormal frame.
pub fn orthonormal_basis_measure(n: usize, seed: u64) -> DiscreteMeasure {
    let q = random_frame(n, seed);
    DiscreteMeasure::new(n, (0..n).map(|j| (q.column(j).iter().copied().collect(), 1.0)).collect()).unwrap()
}

/// Simplex, axis cross, rotated cross and two random measures in dimension `n`.
pub fn families(n: usize, seed: u64) -> Vec<(String, DiscreteMeasure)> {
    vec![
        (format!("simplex{n}"), regular_simplex_measure(n).unwrap()),
        (format!("cross{n}"), cross_polytope_measure(n, None).unwrap()),
        (format!("rotated-cross{n}"), cross_polytope_measure(n, Some(&random_frame(n, seed))).unwrap()),
        (format!("random{n}a"), random_isotropic_measure(n, (n + 4).min(12), seed).unwrap()),
        (format!("random{n}b"), random_isotropic_measure(n, 12, seed + 1).unwrap()),
    ]
}

/// Points of the open cone `{y : y·s(u) > margin}` drawn by rejection from
/// slices of the polar body.
pub fn cone_points(measure: &DiscreteMeasure, count: usize, margin: f64, seed: u64) -> Vec<DVector<f64>> {
    let n = measure.dim();
    let polar = polar_of(measure).unwrap();
    let (lo, hi) = bounding_box(&polar);
    let lifted: Vec<DVector<f64>> = measure.directions().map(isomeasure::lift_point).collect();
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let height = 0.05 + 3.0 * r.random::<f64>();
        let s = height / (n as f64).sqrt();
        let y =
            DVector::from_fn(
                n + 1,
                |i, _| if i == n { height } else { s * (lo[i] + (hi[i] - lo[i]) * r.random::<f64>()) },
            );
        if in_cone_thm1(&y, measure) && lifted.iter().all(|w| y.dot(w) > margin) {
            out.push(y);
        }
    }
    out
}

/// Samples from the density proportional to `e^{−|y|²}`.
pub fn gaussian_points(dim: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut r = rng(seed);
    (0..count).map(|_| gaussian_vector(&mut r, dim) * std::f64::consts::FRAC_1_SQRT_2).collect()
}

/// `(1/√π) ∫_{−∞}^{x} e^{−s²} ds` by composite Simpson on `[0, x]`.
pub fn gaussian_cdf_oracle(x: f64) -> f64 {
    let steps = 4000;
    let h = x / steps as f64;
    let f = |s: f64| (-s * s).exp();
    let mut acc = f(0.0) + f(x);
    for k in 1..steps {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(k as f64 * h);
    }
    0.5 + acc * h / 3.0 / std::f64::consts::PI.sqrt()
}
