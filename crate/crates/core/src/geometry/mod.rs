//! Hyperplanes, affine flats, convex windows and halfspace polytopes.
//!
//! All predicates are floating point with explicit tolerances. Offsets and
//! point coordinates share length units; tolerances on lengths are scaled
//! by the magnitude of the coordinates involved.

mod body;
mod flat;
mod polytope;

pub use body::{BodySpec, ConvexBody};
pub use flat::{clip_flat, flat_measure_in_window, intersect_hyperplanes, Flat, Section};
pub use polytope::{enclosure_checks, halfspace_polytope, Face, Polytope};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, generalized_cross, norm, sub};

/// A point in `R^d`.
pub type Point = Vec<f64>;

/// Default relative tolerance for geometric predicates.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Coordinates smaller than this (relative to the unit normal) are treated as
/// zero when choosing the canonical sign of a hyperplane.
const CANONICAL_EPS: f64 = 1e-12;

/// The hyperplane `{x : <x, u> = s}` with `|u| = 1`.
///
/// Stored in canonical form: the first non-negligible coordinate of `u` is
/// positive, which picks one of the two representations `(u, s)` and
/// `(-u, -s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    u: Vec<f64>,
    s: f64,
}

impl Hyperplane {
    /// Builds a hyperplane from any nonzero normal; the normal is rescaled to
    /// unit length (and `s` with it) and the result canonicalized.
    pub fn new(u: Vec<f64>, s: f64) -> Result<Self> {
        let n = norm(&u);
        if !(n.is_finite() && n > 0.0) || !s.is_finite() {
            return Err(Error::InvalidParams(
                "hyperplane normal must be finite and nonzero".into(),
            ));
        }
        // Fix the sign before rescaling so that both representations go
        // through bit-identical arithmetic.
        let Self { u, s } = Self { u, s }.canonical();
        if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(Self { u, s });
        }
        Ok(Self {
            u: u.iter().map(|x| x / n).collect(),
            s: s / n,
        })
    }

    pub(crate) fn from_unit(u: Vec<f64>, s: f64) -> Self {
        Self { u, s }.canonical()
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn normal(&self) -> &[f64] {
        &self.u
    }

    pub fn offset(&self) -> f64 {
        self.s
    }

    /// Canonical representative of `{(u, s), (-u, -s)}`.
    pub fn canonical(mut self) -> Self {
        let flip = self
            .u
            .iter()
            .find(|c| c.abs() > CANONICAL_EPS)
            .is_some_and(|c| *c < 0.0);
        if flip {
            self.u.iter_mut().for_each(|c| *c = -*c);
            self.s = -self.s;
        }
        // No negative zeros in the stored form.
        self.u.iter_mut().for_each(|c| *c += 0.0);
        self.s += 0.0;
        self
    }

    /// The other representation `(-u, -s)`, not canonicalized.
    pub fn twin(&self) -> (Vec<f64>, f64) {
        (self.u.iter().map(|c| -c).collect(), -self.s)
    }

    /// `<x, u> - s`.
    #[inline]
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        dot(x, &self.u) - self.s
    }

    /// Whether `x` lies within `tol * max(1, |x|)` of the hyperplane.
    #[inline]
    pub fn is_incident(&self, x: &[f64], tol: f64) -> bool {
        self.signed_distance(x).abs() <= tol * norm(x).max(1.0)
    }

    /// Sign-invariant distance between two hyperplanes:
    /// `min_σ max(|u - σu'|, |s - σs'|)`.
    pub fn distance_to(&self, other: &Hyperplane) -> f64 {
        let one = |sign: f64| {
            let du = self
                .u
                .iter()
                .zip(&other.u)
                .map(|(a, b)| (a - sign * b).powi(2))
                .sum::<f64>()
                .sqrt();
            du.max((self.s - sign * other.s).abs())
        };
        one(1.0).min(one(-1.0))
    }

    pub fn approx_eq(&self, other: &Hyperplane, tol: f64) -> bool {
        self.dim() == other.dim() && self.distance_to(other) <= tol
    }

    /// The closed halfspace bounded by `self` that contains `body`, or `None`
    /// when the hyperplane meets the body.
    pub fn halfspace_containing(&self, body: &ConvexBody, tol: f64) -> Option<Halfspace> {
        if body.hits(self, tol) {
            return None;
        }
        if body.support(&self.u) < self.s {
            Some(Halfspace::new(self.u.clone(), self.s))
        } else {
            let (u, s) = self.twin();
            Some(Halfspace::new(u, s))
        }
    }

    /// `u_1, ..., u_d, s`
    pub fn to_row(&self) -> Vec<f64> {
        let mut row = self.u.clone();
        row.push(self.s);
        row
    }
}

/// The closed halfspace `{x : <x, normal> <= offset}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// `<x, normal> - offset`; non-positive inside.
    #[inline]
    pub fn excess(&self, x: &[f64]) -> f64 {
        dot(x, &self.normal) - self.offset
    }

    /// Same halfspace with a unit normal.
    pub fn normalized(&self) -> Self {
        let n = norm(&self.normal);
        Self {
            normal: self.normal.iter().map(|c| c / n).collect(),
            offset: self.offset / n,
        }
    }

    pub fn boundary(&self) -> Result<Hyperplane> {
        Hyperplane::new(self.normal.clone(), self.offset)
    }
}

/// Largest length scale of a point configuration: the larger of the maximal
/// coordinate norm and the maximal distance to the first point.
fn config_scale(pts: &[&[f64]]) -> f64 {
    let p0 = pts[0];
    pts.iter()
        .map(|p| norm(p).max(crate::linalg::dist(p, p0)))
        .fold(0.0, f64::max)
}

/// `(k-1)`-volume of the parallelotope spanned by `p_i - p_0`, from the Gram
/// determinant (or the cross product when `k = d`).
fn affine_volume(pts: &[&[f64]]) -> f64 {
    let k = pts.len();
    if k <= 1 {
        return 1.0;
    }
    let d = pts[0].len();
    let diffs: Vec<Vec<f64>> = pts[1..].iter().map(|p| sub(p, pts[0])).collect();
    if k == d {
        return norm(&generalized_cross(&diffs));
    }
    if k == 2 {
        return norm(&diffs[0]);
    }
    let gram = nalgebra::DMatrix::from_fn(k - 1, k - 1, |i, j| dot(&diffs[i], &diffs[j]));
    gram.determinant().max(0.0).sqrt()
}

/// Whether the `k <= d` points are affinely independent: the volume they span
/// must exceed `tol * scale^(k-1)`.
pub fn affinely_independent(pts: &[&[f64]], tol: f64) -> bool {
    let k = pts.len();
    if k <= 1 {
        return true;
    }
    if k > pts[0].len() + 1 {
        return false;
    }
    let scale = config_scale(pts);
    scale > 0.0 && affine_volume(pts) > tol * scale.powi(k as i32 - 1)
}

/// The hyperplane through `d` affinely independent points of `R^d`.
pub fn hyperplane_through_points<P: AsRef<[f64]>>(pts: &[P], tol: f64) -> Result<Hyperplane> {
    let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_ref()).collect();
    hyperplane_through(&refs, tol)
}

pub(crate) fn hyperplane_through(pts: &[&[f64]], tol: f64) -> Result<Hyperplane> {
    let Some(first) = pts.first() else {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    };
    let d = first.len();
    if let Some(p) = pts.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: p.len(),
        });
    }
    if pts.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: pts.len(),
        });
    }
    let diffs: Vec<Vec<f64>> = pts[1..].iter().map(|p| sub(p, first)).collect();
    let n = generalized_cross(&diffs);
    let vol = norm(&n);
    let scale = config_scale(pts);
    if !(scale > 0.0 && vol > tol * scale.powi(d as i32 - 1)) {
        return Err(Error::AffinelyDependent);
    }
    let u: Vec<f64> = n.iter().map(|c| c / vol).collect();
    let s = pts.iter().map(|p| dot(p, &u)).sum::<f64>() / d as f64;
    Ok(Hyperplane::from_unit(u, s))
}

/// Whether `n >= d` points are in general hyperplane position: every `d` of
/// them are affinely independent and all of them span the same hyperplane.
///
/// When every `d`-subset is independent, "all subsets span the same
/// hyperplane" is equivalent to "every point lies on the hyperplane spanned
/// by the first `d`", which is the form checked here.
pub fn in_general_hyperplane_position<P: AsRef<[f64]>>(pts: &[P], tol: f64) -> Result<bool> {
    let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_ref()).collect();
    let d = refs.first().map_or(0, |p| p.len());
    if d == 0 || refs.len() < d {
        return Err(Error::TooFewPoints {
            needed: d.max(1),
            got: refs.len(),
        });
    }
    let h = match hyperplane_through(&refs[..d], tol) {
        Ok(h) => h,
        Err(Error::AffinelyDependent) => return Ok(false),
        Err(e) => return Err(e),
    };
    let scale = config_scale(&refs);
    if refs.iter().any(|p| h.signed_distance(p).abs() > tol * scale) {
        return Ok(false);
    }
    Ok(all_subsets_independent(&refs, d, tol))
}

fn all_subsets_independent(pts: &[&[f64]], d: usize, tol: f64) -> bool {
    (0..pts.len()).combinations(d).all(|idx| {
        let sub: Vec<&[f64]> = idx.iter().map(|&i| pts[i]).collect();
        affinely_independent(&sub, tol)
    })
}

/// Searches for `k` of the given points (all assumed to lie on one common
/// hyperplane) such that every `d` of the chosen points are affinely
/// independent. Returns their indices.
///
/// Depth-first search with pruning: a partial selection is extended only
/// while all of its `d`-subsets remain independent (and, for smaller
/// subsets, while no `d-1` chosen points are dependent inside the hyperplane).
pub fn find_general_position_subset(pts: &[&[f64]], k: usize, tol: f64) -> Option<Vec<usize>> {
    let d = pts.first()?.len();
    if pts.len() < k {
        return None;
    }
    if d == 2 {
        // On a line, any k pairwise distinct points qualify.
        let mut chosen: Vec<usize> = Vec::with_capacity(k);
        for (i, p) in pts.iter().enumerate() {
            if chosen.iter().all(|&j| affinely_independent(&[pts[j], p], tol)) {
                chosen.push(i);
                if chosen.len() == k {
                    return Some(chosen);
                }
            }
        }
        return None;
    }
    let mut chosen = Vec::with_capacity(k);
    fn extend(
        pts: &[&[f64]],
        d: usize,
        k: usize,
        tol: f64,
        start: usize,
        chosen: &mut Vec<usize>,
    ) -> bool {
        if chosen.len() == k {
            return true;
        }
        let remaining = k - chosen.len();
        for i in start..pts.len() {
            if pts.len() - i < remaining {
                break;
            }
            // Every new (d-1)-subset or d-subset containing i must stay
            // independent; checking the subsets of size min(d, |chosen|+1).
            let size = d.min(chosen.len() + 1);
            let ok = chosen.iter().copied().combinations(size - 1).all(|c| {
                let mut sub: Vec<&[f64]> = c.iter().map(|&j| pts[j]).collect();
                sub.push(pts[i]);
                affinely_independent(&sub, tol)
            });
            if ok {
                chosen.push(i);
                if extend(pts, d, k, tol, i + 1, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    extend(pts, d, k, tol, 0, &mut chosen).then_some(chosen)
}
