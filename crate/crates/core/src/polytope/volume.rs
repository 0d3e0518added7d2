//! Volumes: exact central triangulation and a Monte Carlo cross-check.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::hull::rank_of;
use super::ConvexPolytope;
use crate::error::{Error, Result};
use crate::rng::chunked;

/// Rank tolerance used when measuring the affine dimension of a face.
const FACE_RANK_TOL: f64 = 1e-9;

fn affine_dim(vertices: &[DVector<f64>], ids: &[usize]) -> usize {
    if ids.len() <= 1 {
        return 0;
    }
    let base = &vertices[ids[0]];
    let diffs: Vec<DVector<f64>> = ids[1..].iter().map(|&i| &vertices[i] - base).collect();
    let refs: Vec<&DVector<f64>> = diffs.iter().collect();
    rank_of(&refs, FACE_RANK_TOL)
}

fn lex_min(vertices: &[DVector<f64>], ids: &[usize]) -> usize {
    *ids.iter()
        .min_by(|&&i, &&j| {
            vertices[i]
                .iter()
                .zip(vertices[j].iter())
                .map(|(a, b)| a.total_cmp(b))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("non-empty face")
}

/// Triangulates a `d`-dimensional face (given by its vertex ids) into
/// `d`-simplices by fanning from its lexicographically smallest vertex over
/// the triangulated sub-faces that avoid it. Sub-faces of a face `S` are the
/// sets `S ∩ G` of affine dimension `d − 1`, `G` ranging over the facets.
fn triangulate_face(
    vertices: &[DVector<f64>],
    facet_sets: &[Vec<usize>],
    face: &[usize],
    d: usize,
) -> Result<Vec<Vec<usize>>> {
    if face.len() < d + 1 || affine_dim(vertices, face) != d {
        return Err(Error::Degenerate(format!("face with {} vertices does not span {d} dimensions", face.len())));
    }
    if face.len() == d + 1 {
        return Ok(vec![face.to_vec()]);
    }
    let apex = lex_min(vertices, face);
    let face_set: BTreeSet<usize> = face.iter().copied().collect();
    let mut subfaces: BTreeSet<Vec<usize>> = BTreeSet::new();
    for g in facet_sets {
        let inter: Vec<usize> = g.iter().copied().filter(|v| face_set.contains(v)).collect();
        if inter.len() >= d
            && inter.len() < face.len()
            && !inter.contains(&apex)
            && affine_dim(vertices, &inter) == d - 1
        {
            subfaces.insert(inter);
        }
    }
    if subfaces.is_empty() {
        return Err(Error::Degenerate("face has no boundary opposite its apex".into()));
    }
    let mut out = Vec::new();
    for sub in subfaces {
        for mut simplex in triangulate_face(vertices, facet_sets, &sub, d - 1)? {
            simplex.push(apex);
            out.push(simplex);
        }
    }
    Ok(out)
}

/// Volume by central triangulation: every facet is fan-triangulated and
/// each `(n−1)`-simplex is coned to the vertex centroid.
pub fn volume<P: ConvexPolytope + ?Sized>(polytope: &P) -> Result<f64> {
    let n = polytope.dim();
    let vertices = polytope.vertices();
    if vertices.is_empty() {
        return Err(Error::Degenerate("polytope has no vertices".into()));
    }
    let center = vertices.iter().sum::<DVector<f64>>() / vertices.len() as f64;
    let facet_sets: Vec<Vec<usize>> = polytope.facets().iter().map(|f| f.vertices.clone()).collect();
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    let mut total = 0.0;
    for facet in &facet_sets {
        for simplex in triangulate_face(vertices, &facet_sets, facet, n - 1)? {
            let m = DMatrix::from_fn(n, n, |r, c| vertices[simplex[c]][r] - center[r]);
            total += m.determinant().abs();
        }
    }
    Ok(total / factorial)
}

/// Rejection-sampling volume estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McVolume {
    pub estimate: f64,
    pub stderr: f64,
    pub hits: usize,
    pub samples: usize,
    pub box_volume: f64,
}

/// Axis-aligned bounding box from the support function along `±e_i`.
pub fn bounding_box<P: ConvexPolytope + ?Sized>(polytope: &P) -> (DVector<f64>, DVector<f64>) {
    let n = polytope.dim();
    let mut lo = DVector::from_element(n, f64::INFINITY);
    let mut hi = DVector::from_element(n, f64::NEG_INFINITY);
    for v in polytope.vertices() {
        for i in 0..n {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    (lo, hi)
}

/// Uniform samples in the tight bounding box; estimate = box volume × hit rate.
pub fn mc_volume<P: ConvexPolytope + Sync + ?Sized>(polytope: &P, samples: usize, seed: u64) -> Result<McVolume> {
    if samples < 1000 {
        return Err(Error::Precondition(format!("mc_volume needs >= 1000 samples, got {samples}")));
    }
    let n = polytope.dim();
    let (lo, hi) = bounding_box(polytope);
    let box_volume: f64 = (0..n).map(|i| hi[i] - lo[i]).product();
    let hits: usize = chunked(samples, seed, 0, |rng, count| {
        let mut x = DVector::zeros(n);
        let mut hits = 0usize;
        for _ in 0..count {
            for i in 0..n {
                x[i] = lo[i] + (hi[i] - lo[i]) * rng.random::<f64>();
            }
            if polytope.contains(&x) {
                hits += 1;
            }
        }
        hits
    })
    .into_iter()
    .sum();
    let p = hits as f64 / samples as f64;
    Ok(McVolume {
        estimate: box_volume * p,
        stderr: box_volume * (p * (1.0 - p) / samples as f64).sqrt(),
        hits,
        samples,
        box_volume,
    })
}
