//! Incremental (beneath–beyond) convex hull in arbitrary dimension.
//!
//! Points are inserted in lexicographic order. The boundary is kept as a
//! set of simplicial facets; coplanar simplices are merged afterwards into
//! the true facets of the polytope.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Visibility threshold for the normalized plane distance.
pub const VISIBILITY_EPS: f64 = 1e-12;
/// Two simplicial facets lie on the same hyperplane when their unit
/// normals and offsets agree within this tolerance.
pub const COPLANAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
struct Simplex {
    verts: Vec<usize>,
    normal: DVector<f64>,
    offset: f64,
    alive: bool,
}

/// A facet of the hull: `normal·x ≤ offset` with `|normal| = 1`, plus the
/// indices (into the hull input) of the extreme points on it.
#[derive(Debug, Clone, PartialEq)]
pub struct HullFacet {
    pub normal: DVector<f64>,
    pub offset: f64,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Hull {
    /// Input indices of the extreme points, ascending.
    pub vertices: Vec<usize>,
    pub facets: Vec<HullFacet>,
    /// Simplicial boundary triangulation (input indices).
    pub simplices: Vec<Vec<usize>>,
}

pub(crate) fn lex_order(points: &[DVector<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        points[i]
            .iter()
            .zip(points[j].iter())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    order
}

/// Unit normal of the hyperplane through `pts` (exactly `n` points in `R^n`)
/// via signed cofactors of the difference matrix.
fn hyperplane_normal(pts: &[&DVector<f64>]) -> Option<DVector<f64>> {
    let n = pts[0].len();
    if n == 1 {
        return Some(DVector::from_element(1, 1.0));
    }
    let diffs = DMatrix::from_fn(n - 1, n, |r, c| pts[r + 1][c] - pts[0][c]);
    let mut normal = DVector::zeros(n);
    for j in 0..n {
        let minor = diffs.clone().remove_column(j);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        normal[j] = sign * minor.determinant();
    }
    let scale: f64 = (1..n).map(|r| diffs.row(r - 1).norm()).product();
    let norm = normal.norm();
    if !(norm > 1e-13 * scale.max(1e-300)) {
        return None;
    }
    Some(normal / norm)
}

fn make_simplex(verts: Vec<usize>, points: &[DVector<f64>], interior: &DVector<f64>) -> Result<Simplex> {
    let pts: Vec<&DVector<f64>> = verts.iter().map(|&i| &points[i]).collect();
    let mut normal =
        hyperplane_normal(&pts).ok_or_else(|| Error::Degenerate("hull produced a flat simplicial facet".into()))?;
    let mut offset = normal.dot(pts[0]);
    if normal.dot(interior) > offset {
        normal = -normal;
        offset = -offset;
    }
    Ok(Simplex { verts, normal, offset, alive: true })
}

/// Orthonormal-residual distance of `p − base` from the span of `basis`.
fn residual(p: &DVector<f64>, base: &DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    let mut r = p - base;
    for b in basis {
        let c = r.dot(b);
        r.axpy(-c, b, 1.0);
    }
    r
}

/// Rank of a set of row vectors.
pub(crate) fn rank_of(rows: &[&DVector<f64>], tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let n = rows[0].len();
    let m = DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]);
    m.svd(false, false).rank(tol)
}

/// Convex hull of `points` in `R^n`. Requires the points to span `R^n` affinely.
pub fn convex_hull(points: &[DVector<f64>]) -> Result<Hull> {
    let Some(first) = points.first() else {
        return Err(Error::Degenerate("empty point set".into()));
    };
    let n = first.len();
    if points.len() < n + 1 {
        return Err(Error::Degenerate(format!("{} points cannot span R^{n}", points.len())));
    }
    let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
    let eps = VISIBILITY_EPS * scale;
    let order = lex_order(points);

    // Initial simplex: greedily farthest from the current affine hull.
    let base = points[order[0]].clone();
    let mut chosen = vec![order[0]];
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, f64, DVector<f64>)> = None;
        for &i in &order {
            if chosen.contains(&i) {
                continue;
            }
            let r = residual(&points[i], &base, &basis);
            let d = r.norm();
            if best.as_ref().is_none_or(|(_, bd, _)| d > *bd) {
                best = Some((i, d, r));
            }
        }
        match best {
            Some((i, d, r)) if d > 1e-10 * scale => {
                chosen.push(i);
                basis.push(r / d);
            }
            _ => return Err(Error::Degenerate("points span a proper affine subspace".into())),
        }
    }
    let interior = chosen.iter().map(|&i| &points[i]).sum::<DVector<f64>>() / (n + 1) as f64;

    let mut simplices = Vec::new();
    for skip in 0..=n {
        let mut verts: Vec<usize> = chosen.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &i)| i).collect();
        verts.sort_unstable();
        simplices.push(make_simplex(verts, points, &interior)?);
    }

    for &p in &order {
        if chosen.contains(&p) {
            continue;
        }
        let visible: Vec<usize> = simplices
            .iter()
            .enumerate()
            .filter(|(_, s)| s.alive && s.normal.dot(&points[p]) - s.offset > eps)
            .map(|(k, _)| k)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
        for &k in &visible {
            let verts = &simplices[k].verts;
            for drop in 0..verts.len() {
                let ridge: Vec<usize> = verts.iter().enumerate().filter(|&(q, _)| q != drop).map(|(_, &v)| v).collect();
                *ridges.entry(ridge).or_insert(0) += 1;
            }
        }
        for &k in &visible {
            simplices[k].alive = false;
        }
        let mut horizon: Vec<Vec<usize>> =
            ridges.into_iter().filter(|(_, count)| *count == 1).map(|(r, _)| r).collect();
        horizon.sort();
        for mut ridge in horizon {
            ridge.push(p);
            ridge.sort_unstable();
            simplices.push(make_simplex(ridge, points, &interior)?);
        }
    }
    let simplices: Vec<Simplex> = simplices.into_iter().filter(|s| s.alive).collect();

    // Merge coplanar simplices into true facets.
    let mut facets: Vec<HullFacet> = Vec::new();
    for s in &simplices {
        let found = facets.iter_mut().find(|f| {
            (&f.normal - &s.normal).amax() <= COPLANAR_TOL && (f.offset - s.offset).abs() <= COPLANAR_TOL * scale
        });
        match found {
            Some(f) => f.members.extend(s.verts.iter().copied()),
            None => facets.push(HullFacet { normal: s.normal.clone(), offset: s.offset, members: s.verts.clone() }),
        }
    }

    // A boundary point is a vertex iff the normals of the facets through it
    // have full rank.
    let mut candidates: Vec<usize> = facets.iter().flat_map(|f| f.members.iter().copied()).collect();
    candidates.sort_unstable();
    candidates.dedup();
    let on_tol = COPLANAR_TOL * scale;
    let vertices: Vec<usize> = candidates
        .into_iter()
        .filter(|&v| {
            let active: Vec<&DVector<f64>> = facets
                .iter()
                .filter(|f| (f.normal.dot(&points[v]) - f.offset).abs() <= on_tol)
                .map(|f| &f.normal)
                .collect();
            rank_of(&active, 1e-9) == n
        })
        .collect();
    for f in &mut facets {
        f.members =
            vertices.iter().copied().filter(|&v| (f.normal.dot(&points[v]) - f.offset).abs() <= on_tol).collect();
    }

    Ok(Hull { vertices, facets, simplices: simplices.into_iter().map(|s| s.verts).collect() })
}
