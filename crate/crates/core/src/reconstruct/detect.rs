//! Hyperplane detection from observed intersection points.
//!
//! A candidate hyperplane is spanned by `d` affinely independent points. It
//! is accepted when at least `min_points` observed points lie on it and some
//! `min_points` of those are in general hyperplane position.
//!
//! Each geometric hyperplane is examined once per scan: a spanning subset is
//! processed only when it equals the greedy basis of the hyperplane's
//! incident points (first point in scan order, then every later point that
//! keeps the chosen set independent).

use itertools::Itertools;
use nalgebra::DMatrix;

use super::ResolvedParams;
use crate::geometry::{affinely_independent, find_general_position_subset, hyperplane_through_points, ConvexBody, Hyperplane, Point};
use crate::linalg::dot;

/// Accepted hyperplanes are deduplicated at this sign-invariant distance.
const SAME_HYPERPLANE: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Keep {
    /// Hyperplanes missing the body (the `ξ` side).
    Missing,
    /// Hyperplanes meeting the body (the `χ` side).
    Hitting,
}

fn wanted(body: &ConvexBody, h: &Hyperplane, keep: Keep) -> bool {
    body.hits(h, 0.0) == (keep == Keep::Hitting)
}

fn greedy_basis(points: &[Point], order: &[usize], d: usize, tol: f64) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::with_capacity(d);
    for &i in order {
        let mut trial: Vec<&[f64]> = chosen.iter().map(|&j| points[j].as_slice()).collect();
        trial.push(&points[i]);
        if affinely_independent(&trial, tol) {
            chosen.push(i);
            if chosen.len() == d {
                break;
            }
        }
    }
    chosen
}

/// Total least squares hyperplane through more than `d` points.
fn refit(pts: &[&[f64]]) -> Option<Hyperplane> {
    let d = pts[0].len();
    let n = pts.len();
    let mut c = vec![0.0; d];
    for p in pts {
        c.iter_mut().zip(p.iter()).for_each(|(a, b)| *a += b / n as f64);
    }
    let m = DMatrix::from_fn(n, d, |r, k| pts[r][k] - c[k]);
    let svd = m.svd(false, true);
    let v_t = svd.v_t?;
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?
        .0;
    let u: Vec<f64> = v_t.row(k).iter().copied().collect();
    let s = dot(&c, &u);
    Hyperplane::new(u, s).ok()
}

/// Examines the hyperplane spanned by `subset`; `order` lists the points
/// allowed to take part, in scan order.
fn examine(
    points: &[Point],
    order: &[usize],
    subset: &[usize],
    body: &ConvexBody,
    params: &ResolvedParams,
    keep: Keep,
) -> Option<Hyperplane> {
    let d = body.dim();
    let refs: Vec<&[f64]> = subset.iter().map(|&i| points[i].as_slice()).collect();
    if !affinely_independent(&refs, params.gp_tol) {
        return None;
    }
    let h = hyperplane_through_points(&refs, params.gp_tol).ok()?;
    if !wanted(body, &h, keep) {
        return None;
    }
    let incident: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| h.is_incident(&points[i], params.incident_tol))
        .collect();
    if incident.len() < params.min_points {
        return None;
    }
    let mut basis = greedy_basis(points, &incident, d, params.gp_tol);
    let mut sorted = subset.to_vec();
    basis.sort_unstable();
    sorted.sort_unstable();
    if basis != sorted {
        return None;
    }
    let on: Vec<&[f64]> = incident.iter().map(|&i| points[i].as_slice()).collect();
    find_general_position_subset(&on, params.min_points, params.gp_tol)?;
    let fitted = refit(&on).unwrap_or(h);
    wanted(body, &fitted, keep).then_some(fitted)
}

/// Angular gap below which two directions from a planar anchor are grouped
/// before the exact incidence test.
const ANGLE_GROUPING: f64 = 1e-6;

/// Members of `candidates` that share a line through `points[anchor]` with
/// at least `at_least - 1` other candidates, found by sorting directions.
fn collinear_partners(points: &[Point], anchor: usize, candidates: &[usize], at_least: usize) -> Vec<usize> {
    use std::f64::consts::PI;
    let a = &points[anchor];
    let mut dirs: Vec<(f64, usize)> = candidates
        .iter()
        .map(|&j| {
            let v = [points[j][0] - a[0], points[j][1] - a[1]];
            (v[1].atan2(v[0]).rem_euclid(PI), j)
        })
        .collect();
    if dirs.len() < at_least.max(1) {
        return Vec::new();
    }
    dirs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = dirs.len();
    // Rotate so that a group never straddles the wrap-around at angle π.
    let start = (0..n)
        .find(|&k| {
            let prev = dirs[(k + n - 1) % n].0 - if k == 0 { PI } else { 0.0 };
            dirs[k].0 - prev > ANGLE_GROUPING
        })
        .unwrap_or(0);
    let mut out = Vec::new();
    let mut group: Vec<usize> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for k in 0..n {
        let (theta, j) = dirs[(start + k) % n];
        let theta = if start + k >= n { theta + PI } else { theta };
        if theta - last > ANGLE_GROUPING {
            if group.len() >= at_least {
                out.append(&mut group);
            }
            group.clear();
        }
        group.push(j);
        last = theta;
    }
    if group.len() >= at_least {
        out.append(&mut group);
    }
    out
}

fn push_unique(out: &mut Vec<Hyperplane>, h: Hyperplane) -> bool {
    if out.iter().any(|g| g.approx_eq(&h, SAME_HYPERPLANE)) {
        return false;
    }
    out.push(h);
    true
}

/// Every qualifying hyperplane spanned by the points.
pub(crate) fn scan_all(points: &[Point], body: &ConvexBody, params: &ResolvedParams, keep: Keep) -> Vec<Hyperplane> {
    let d = body.dim();
    let order: Vec<usize> = (0..points.len()).collect();
    let mut out = Vec::new();
    if d == 2 {
        for i in 0..points.len() {
            let others: Vec<usize> = (0..points.len()).filter(|&j| j != i).collect();
            for j in collinear_partners(points, i, &others, params.min_points - 1) {
                if j > i {
                    if let Some(h) = examine(points, &order, &[i, j], body, params, keep) {
                        push_unique(&mut out, h);
                    }
                }
            }
        }
        return out;
    }
    for subset in (0..points.len()).combinations(d) {
        if let Some(h) = examine(points, &order, &subset, body, params, keep) {
            push_unique(&mut out, h);
        }
    }
    out
}

/// Qualifying hyperplanes through `points[new]`, using only the points up
/// to and including `new`.
pub(crate) fn scan_through(
    points: &[Point],
    new: usize,
    body: &ConvexBody,
    params: &ResolvedParams,
    keep: Keep,
) -> Vec<Hyperplane> {
    let d = body.dim();
    let order: Vec<usize> = std::iter::once(new).chain(0..new).collect();
    let mut out = Vec::new();
    if d == 2 {
        let earlier: Vec<usize> = (0..new).collect();
        for j in collinear_partners(points, new, &earlier, params.min_points - 1) {
            if let Some(h) = examine(points, &order, &[j, new], body, params, keep) {
                push_unique(&mut out, h);
            }
        }
        return out;
    }
    for rest in (0..new).combinations(d - 1) {
        let mut subset = rest;
        subset.push(new);
        if let Some(h) = examine(points, &order, &subset, body, params, keep) {
            push_unique(&mut out, h);
        }
    }
    out
}

/// Incrementally maintained set `ξ` of detected hyperplanes missing the body.
pub(crate) struct Detector<'a> {
    body: &'a ConvexBody,
    params: &'a ResolvedParams,
    points: Vec<Point>,
    xi: Vec<Hyperplane>,
}

impl<'a> Detector<'a> {
    pub fn new(body: &'a ConvexBody, params: &'a ResolvedParams) -> Self {
        Self {
            body,
            params,
            points: Vec::new(),
            xi: Vec::new(),
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn xi(&self) -> &[Hyperplane] {
        &self.xi
    }

    /// Adds an observed point; returns the newly admitted hyperplanes.
    pub fn add_point(&mut self, p: Point) -> Vec<Hyperplane> {
        self.points.push(p);
        let new = self.points.len() - 1;
        if self.params.full_recompute {
            let all = scan_all(&self.points, self.body, self.params, Keep::Missing);
            return self.merge(all);
        }
        let found = scan_through(&self.points, new, self.body, self.params, Keep::Missing);
        self.merge(found)
    }

    fn merge(&mut self, found: Vec<Hyperplane>) -> Vec<Hyperplane> {
        let mut admitted = Vec::new();
        for h in found {
            if push_unique(&mut self.xi, h.clone()) {
                admitted.push(h);
            }
        }
        admitted
    }
}
