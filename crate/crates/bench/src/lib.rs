//! Fixtures shared by the benchmarks.

use isomeasure::{cross_polytope_measure, random_isotropic_measure, regular_simplex_measure, DiscreteMeasure};

/// Simplex, cross and a 12-atom random measure in dimension `n`.
pub fn fixtures(n: usize) -> Vec<(&'static str, DiscreteMeasure)> {
    vec![
        ("simplex", regular_simplex_measure(n).expect("simplex")),
        ("cross", cross_polytope_measure(n, None).expect("cross")),
        ("random12", random_isotropic_measure(n, 12, 1).expect("random")),
    ]
}
