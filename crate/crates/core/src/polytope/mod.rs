//! The body `Z∞ = conv(supp Z)` and its polar `Z∞* = {x : x·v ≤ 1, v ∈ supp Z}`,
//! support functions, interior tests, volumes, and simplex detection.

pub mod hull;
mod volume;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use hull::convex_hull;

pub use volume::{bounding_box, mc_volume, volume, McVolume};

/// Polytope routines accept dimensions up to this cap.
pub const MAX_DIM: usize = 8;
/// Strict-interior margin for facet slacks and polar membership.
pub const INTERIOR_EPS: f64 = 1e-12;
/// Vertex–facet incidence tolerance (scaled by the magnitude involved).
pub const INCIDENCE_TOL: f64 = 1e-9;

/// `normal·x ≤ offset` together with the ids of the vertices on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: DVector<f64>,
    pub offset: f64,
    pub vertices: Vec<usize>,
}

impl Facet {
    pub fn slack(&self, x: &DVector<f64>) -> f64 {
        self.offset - self.normal.dot(x)
    }
}

/// Common read access to both polytope representations.
pub trait ConvexPolytope {
    fn dim(&self) -> usize;
    fn vertices(&self) -> &[DVector<f64>];
    fn facets(&self) -> &[Facet];

    fn contains(&self, x: &DVector<f64>) -> bool {
        self.facets().iter().all(|f| f.normal.dot(x) <= f.offset)
    }

    /// Smallest facet slack; positive iff `x` is interior.
    fn min_slack(&self, x: &DVector<f64>) -> f64 {
        self.facets().iter().map(|f| f.slack(x)).fold(f64::INFINITY, f64::min)
    }

    fn is_interior(&self, x: &DVector<f64>) -> bool {
        self.min_slack(x) > INTERIOR_EPS
    }

    /// `h_P(u) = max_{x ∈ P} u·x`.
    fn support_function(&self, u: &DVector<f64>) -> f64 {
        self.vertices().iter().map(|v| u.dot(v)).fold(f64::NEG_INFINITY, f64::max)
    }

    fn to_file(&self) -> PolytopeFile {
        PolytopeFile {
            dim: self.dim(),
            vertices: self.vertices().iter().map(|v| v.iter().copied().collect()).collect(),
            halfspaces: self
                .facets()
                .iter()
                .map(|f| HalfspaceFile { a: f.normal.iter().copied().collect(), b: f.offset })
                .collect(),
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        return Err(Error::DimensionTooLarge { dim, max: MAX_DIM });
    }
    if dim < 2 {
        return Err(Error::Precondition(format!("polytopes need dimension >= 2, got {dim}")));
    }
    Ok(())
}

/// Polytope given by its extreme points (facets computed by the hull).
#[derive(Debug, Clone, PartialEq)]
pub struct VertexPolytope {
    dim: usize,
    vertices: Vec<DVector<f64>>,
    facets: Vec<Facet>,
}

impl VertexPolytope {
    /// Convex hull of `points`; non-extreme points are discarded.
    pub fn from_points(points: &[DVector<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.len());
        check_dim(dim)?;
        let hull = convex_hull(points)?;
        let remap: std::collections::HashMap<usize, usize> =
            hull.vertices.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let vertices = hull.vertices.iter().map(|&i| points[i].clone()).collect();
        let facets = hull
            .facets
            .into_iter()
            .map(|f| Facet {
                normal: f.normal,
                offset: f.offset,
                vertices: f.members.iter().map(|i| remap[i]).collect(),
            })
            .collect();
        Ok(VertexPolytope { dim, vertices, facets })
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        let pts: Vec<DVector<f64>> = self.vertices.iter().map(|v| v * lambda).collect();
        Self::from_points(&pts)
    }

    /// The polar `{x : x·v ≤ 1 for all vertices v}`. Its vertices are
    /// `a/b` for the facets `a·x ≤ b` of this polytope.
    pub fn polar(&self) -> Result<FacetPolytope> {
        let halfspaces: Vec<Halfspace> = self.vertices.iter().map(|v| Halfspace { a: v.clone(), b: 1.0 }).collect();
        FacetPolytope::from_parts(self.dim, halfspaces, self)
    }
}

impl ConvexPolytope for VertexPolytope {
    fn dim(&self) -> usize {
        self.dim
    }
    fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }
    fn facets(&self) -> &[Facet] {
        &self.facets
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub a: DVector<f64>,
    pub b: f64,
}

/// Polytope given by halfspaces `a·x ≤ b` with the origin strictly inside;
/// vertices are enumerated through the dual hull.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetPolytope {
    dim: usize,
    halfspaces: Vec<Halfspace>,
    vertices: Vec<DVector<f64>>,
    facets: Vec<Facet>,
}

impl FacetPolytope {
    /// Normalizes each halfspace to `|a| = 1` and requires `b > 0`.
    pub fn from_halfspaces(dim: usize, halfspaces: Vec<Halfspace>) -> Result<Self> {
        check_dim(dim)?;
        let mut normalized = Vec::with_capacity(halfspaces.len());
        for h in halfspaces {
            if h.a.len() != dim {
                return Err(Error::Precondition(format!("halfspace normal has {} entries, expected {dim}", h.a.len())));
            }
            let norm = h.a.norm();
            if !(norm > 0.0) {
                return Err(Error::Precondition("halfspace with zero normal".into()));
            }
            if !(h.b / norm > INTERIOR_EPS) {
                return Err(Error::Unbounded("origin is not strictly inside every halfspace".into()));
            }
            normalized.push(Halfspace { a: h.a / norm, b: h.b / norm });
        }
        let dual_points: Vec<DVector<f64>> = normalized.iter().map(|h| &h.a / h.b).collect();
        let dual = VertexPolytope::from_points(&dual_points).map_err(|e| match e {
            Error::Degenerate(msg) => Error::Unbounded(format!("dual hull is degenerate: {msg}")),
            other => other,
        })?;
        FacetPolytope::from_parts(dim, normalized, &dual)
    }

    /// Builds the polytope `{a_i·x ≤ b_i}` whose dual points `a_i/b_i` have
    /// hull `dual`.
    fn from_parts(dim: usize, halfspaces: Vec<Halfspace>, dual: &VertexPolytope) -> Result<Self> {
        let mut vertices = Vec::with_capacity(dual.facets.len());
        for f in &dual.facets {
            if !(f.offset > INTERIOR_EPS) {
                return Err(Error::Unbounded("origin is not interior to the dual hull".into()));
            }
            vertices.push(&f.normal / f.offset);
        }
        let facets = halfspaces
            .iter()
            .map(|h| {
                let ids = vertices
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| (h.a.dot(x) - h.b).abs() <= INCIDENCE_TOL * h.b.abs().max(x.norm()).max(1.0))
                    .map(|(k, _)| k)
                    .collect();
                Facet { normal: h.a.clone(), offset: h.b, vertices: ids }
            })
            .collect();
        Ok(FacetPolytope { dim, halfspaces, vertices, facets })
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }
}

impl ConvexPolytope for FacetPolytope {
    fn dim(&self) -> usize {
        self.dim
    }
    fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }
    fn facets(&self) -> &[Facet] {
        &self.facets
    }
}

/// `{"dim": n, "vertices": [[...]], "halfspaces": [{"a": [...], "b": f}]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeFile {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub halfspaces: Vec<HalfspaceFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceFile {
    pub a: Vec<f64>,
    pub b: f64,
}

fn require_not_in_hemisphere(measure: &DiscreteMeasure) -> Result<()> {
    if measure.hemisphere_check() {
        Ok(())
    } else {
        Err(Error::Precondition("support is contained in a closed hemisphere".into()))
    }
}

/// `Z∞`, the convex hull of the support.
pub fn body_of(measure: &DiscreteMeasure) -> Result<VertexPolytope> {
    check_dim(measure.dim())?;
    require_not_in_hemisphere(measure)?;
    let points: Vec<DVector<f64>> = measure.directions().cloned().collect();
    VertexPolytope::from_points(&points)
}

/// `Z∞*`, the polar of the body.
pub fn polar_of(measure: &DiscreteMeasure) -> Result<FacetPolytope> {
    body_of(measure)?.polar()
}

/// `h_{Z∞}(u) = max_{v ∈ supp Z} u·v`, by scanning atoms.
pub fn measure_support_function(measure: &DiscreteMeasure, u: &DVector<f64>) -> f64 {
    measure.directions().map(|v| u.dot(v)).fold(f64::NEG_INFINITY, f64::max)
}

/// `x ∈ int Z∞*`: `x·v < 1 − 1e-12` for every atom.
pub fn in_interior_polar(x: &DVector<f64>, measure: &DiscreteMeasure) -> bool {
    measure.directions().all(|v| x.dot(v) < 1.0 - INTERIOR_EPS)
}

/// For positive `t` with `|t:Z|_1 = 1`, whether `t°` lies in `int Z∞`
/// (facet slacks above `1e-12`).
pub fn lemma2_check(values: &[f64], measure: &DiscreteMeasure) -> Result<bool> {
    let body = body_of(measure)?;
    lemma2_check_with(values, measure, &body)
}

/// [`lemma2_check`] against a precomputed body.
pub fn lemma2_check_with(values: &[f64], measure: &DiscreteMeasure, body: &VertexPolytope) -> Result<bool> {
    Ok(lemma2_slack(values, measure, body)? > INTERIOR_EPS)
}

/// Smallest facet slack of `t°` in the body.
pub fn lemma2_slack(values: &[f64], measure: &DiscreteMeasure, body: &VertexPolytope) -> Result<f64> {
    if values.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::Precondition("values must be strictly positive".into()));
    }
    let l1 = measure.lp_norm(values, 1.0)?;
    if (l1 - 1.0).abs() > 1e-10 {
        return Err(Error::Normalization(l1));
    }
    let t_circle = measure.t_circle(values)?;
    Ok(body.min_slack(&t_circle))
}

/// `n+1` atoms, pairwise inner products `−1/n` and weights `n/(n+1)`, all within `tol`.
pub fn is_regular_simplex(measure: &DiscreteMeasure, tol: f64) -> bool {
    let n = measure.dim();
    if measure.len() != n + 1 {
        return false;
    }
    let nf = n as f64;
    let atoms = measure.atoms();
    let weights_ok = atoms.iter().all(|a| (a.weight - nf / (nf + 1.0)).abs() <= tol);
    let angles_ok = (0..atoms.len())
        .all(|i| (i + 1..atoms.len()).all(|j| (atoms[i].direction.dot(&atoms[j].direction) + 1.0 / nf).abs() <= tol));
    weights_ok && angles_ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cross_polytope_measure, regular_simplex_measure};

    fn cube(n: usize) -> VertexPolytope {
        let pts: Vec<DVector<f64>> = (0..1u32 << n)
            .map(|mask| DVector::from_fn(n, |i, _| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }))
            .collect();
        VertexPolytope::from_points(&pts).unwrap()
    }

    #[test]
    fn simplex_body_combinatorics() {
        let body = body_of(&regular_simplex_measure(3).unwrap()).unwrap();
        assert_eq!(body.vertices().len(), 4);
        assert_eq!(body.facets().len(), 4);
    }

    #[test]
    fn octahedron_combinatorics() {
        let body = body_of(&cross_polytope_measure(3, None).unwrap()).unwrap();
        assert_eq!(body.vertices().len(), 6);
        assert_eq!(body.facets().len(), 8);
    }

    #[test]
    fn interior_atom_does_not_change_vertices() {
        let z = cross_polytope_measure(3, None).unwrap();
        let body = body_of(&z).unwrap();
        let mut pts: Vec<DVector<f64>> = z.directions().cloned().collect();
        pts.push(DVector::from_vec(vec![0.1, 0.2, -0.1]));
        let grown = VertexPolytope::from_points(&pts).unwrap();
        assert_eq!(grown.vertices(), body.vertices());
    }

    #[test]
    fn polar_of_cross_is_cube() {
        for n in 2..=4 {
            let polar = polar_of(&cross_polytope_measure(n, None).unwrap()).unwrap();
            assert_eq!(polar.vertices().len(), 1 << n);
            for v in polar.vertices() {
                assert!(v.iter().all(|x| (x.abs() - 1.0).abs() < 1e-12));
            }
            for f in polar.facets() {
                assert_eq!(f.vertices.len(), 1 << (n - 1));
            }
        }
    }

    #[test]
    fn polar_of_simplex_is_scaled_reflection() {
        let z = regular_simplex_measure(3).unwrap();
        let polar = polar_of(&z).unwrap();
        assert_eq!(polar.vertices().len(), 4);
        for u in z.directions() {
            let target = u * -3.0;
            assert!(polar.vertices().iter().any(|v| (v - &target).norm() < 1e-12));
        }
    }

    #[test]
    fn support_functions() {
        let c = cube(3);
        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert_eq!(c.support_function(&e1), 1.0);
        let z = regular_simplex_measure(3).unwrap();
        let body = body_of(&z).unwrap();
        let u = DVector::from_vec(vec![0.3, -0.4, 0.5]).normalize();
        assert!((body.support_function(&u) - measure_support_function(&z, &u)).abs() < 1e-15);
        assert!(body.support_function(&u) >= 0.0 && body.support_function(&(-&u)) >= 0.0);
    }

    #[test]
    fn polar_interior_edge_cases() {
        let z = regular_simplex_measure(2).unwrap();
        assert!(in_interior_polar(&DVector::zeros(2), &z));
        let v0 = z.atoms()[0].direction.clone();
        assert!(!in_interior_polar(&v0, &z));
    }

    #[test]
    fn volumes_of_standard_bodies() {
        assert!((volume(&cube(3)).unwrap() - 8.0).abs() < 1e-12);
        let oct = body_of(&cross_polytope_measure(3, None).unwrap()).unwrap();
        assert!((volume(&oct).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        let tri = polar_of(&regular_simplex_measure(2).unwrap()).unwrap();
        assert!((volume(&tri).unwrap() - 3.0 * 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mc_volume_edge_cases() {
        let sq = cube(2);
        let mc = mc_volume(&sq, 10_000, 1).unwrap();
        assert_eq!(mc.estimate, 4.0);
        assert_eq!(mc.stderr, 0.0);
        assert!(mc_volume(&sq, 999, 1).is_err());
        let oct = body_of(&cross_polytope_measure(3, None).unwrap()).unwrap();
        assert_eq!(mc_volume(&oct, 5000, 9).unwrap(), mc_volume(&oct, 5000, 9).unwrap());
    }

    #[test]
    fn regular_simplex_detection() {
        assert!(is_regular_simplex(&regular_simplex_measure(4).unwrap(), 1e-10));
        assert!(!is_regular_simplex(&cross_polytope_measure(4, None).unwrap(), 1e-10));
    }

    #[test]
    fn lemma2_cases() {
        let z = cross_polytope_measure(2, None).unwrap();
        let body = body_of(&z).unwrap();
        assert!(lemma2_check_with(&[0.5; 4], &z, &body).unwrap());
        assert!(matches!(lemma2_check_with(&[1.0; 4], &z, &body), Err(Error::Normalization(_))));
        assert!(lemma2_check_with(&[0.5, 0.5, -0.5, 0.5], &z, &body).is_err());
    }

    #[test]
    fn unbounded_polar_rejected() {
        let hs = vec![
            Halfspace { a: DVector::from_vec(vec![1.0, 0.0]), b: 1.0 },
            Halfspace { a: DVector::from_vec(vec![0.0, 1.0]), b: 1.0 },
            Halfspace { a: DVector::from_vec(vec![-1.0, 0.0]), b: 1.0 },
        ];
        assert!(matches!(FacetPolytope::from_halfspaces(2, hs), Err(Error::Unbounded(_))));
    }

    #[test]
    fn dimension_cap() {
        let pts = vec![DVector::zeros(9); 10];
        assert!(matches!(VertexPolytope::from_points(&pts), Err(Error::DimensionTooLarge { .. })));
    }
}
