//! Enclosing polytope families built from detected hyperplanes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{enclosure_checks, halfspace_polytope, ConvexBody, Halfspace, Hyperplane, Polytope};

const POLYTOPE_TOL: f64 = 1e-9;

/// A family of bounded polytopes around the body, built from pairwise
/// disjoint sets of hyperplanes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub polytopes: Vec<Polytope>,
    /// For each polytope, the indices (into `ξ`) of its facet hyperplanes.
    pub hyperplanes: Vec<Vec<usize>>,
    /// Smallest `r` for which every polytope has its boundary in `K_r`.
    pub required_radius: f64,
}

fn sides(xi: &[Hyperplane], body: &ConvexBody) -> Result<Vec<Halfspace>> {
    xi.iter()
        .map(|h| {
            h.halfspace_containing(body, 0.0)
                .ok_or_else(|| Error::InvalidParams("hyperplane meets the body".into()))
        })
        .collect()
}

/// Greedy peeling: intersect all unused halfspaces, keep the resulting
/// polytope, retire its facet hyperplanes and repeat `count` times.
/// Returns `None` when some layer is unbounded.
pub fn peel(xi: &[Hyperplane], body: &ConvexBody, count: usize) -> Result<Option<Certificate>> {
    let hs = sides(xi, body)?;
    let mut available: Vec<usize> = (0..xi.len()).collect();
    let mut cert = Certificate {
        polytopes: Vec::new(),
        hyperplanes: Vec::new(),
        required_radius: 0.0,
    };
    for _ in 0..count {
        if available.len() <= body.dim() {
            return Ok(None);
        }
        let chosen: Vec<Halfspace> = available.iter().map(|&i| hs[i].clone()).collect();
        let p = halfspace_polytope(&chosen, POLYTOPE_TOL)?;
        if !p.bounded {
            return Ok(None);
        }
        let facets: Vec<usize> = p.facet_halfspaces().into_iter().map(|k| available[k]).collect();
        let reduced: Vec<Halfspace> = facets.iter().map(|&i| hs[i].clone()).collect();
        let p = halfspace_polytope(&reduced, POLYTOPE_TOL)?;
        cert.required_radius = cert.required_radius.max(p.max_vertex_distance(body));
        available.retain(|i| !facets.contains(i));
        cert.polytopes.push(p);
        cert.hyperplanes.push(facets);
    }
    Ok(Some(cert))
}

/// `count` polytopes from disjoint subsets of `ξ` whose boundaries lie in
/// `K_r`, found by greedy peeling; `None` when peeling does not certify.
pub fn certify_enclosure(xi: &[Hyperplane], body: &ConvexBody, r: f64, count: usize) -> Result<Option<Certificate>> {
    let Some(cert) = peel(xi, body, count)? else {
        return Ok(None);
    };
    for p in &cert.polytopes {
        if !enclosure_checks(p, body, r)? {
            return Ok(None);
        }
    }
    Ok(Some(cert))
}

/// Facet-minimal subsets of `ξ` (as bit masks) that bound a polytope with
/// the body in its interior, each with the radius at which it certifies.
/// Limited to 16 hyperplanes.
pub fn exhaustive_candidates(xi: &[Hyperplane], body: &ConvexBody) -> Result<Vec<(u32, f64)>> {
    if xi.len() > 16 {
        return Err(Error::InvalidParams(format!(
            "exhaustive certification limited to 16 hyperplanes, got {}",
            xi.len()
        )));
    }
    let hs = sides(xi, body)?;
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << xi.len()) {
        if (mask.count_ones() as usize) <= body.dim() {
            continue;
        }
        let idx: Vec<usize> = (0..xi.len()).filter(|i| mask >> i & 1 == 1).collect();
        let chosen: Vec<Halfspace> = idx.iter().map(|&i| hs[i].clone()).collect();
        let p = halfspace_polytope(&chosen, POLYTOPE_TOL)?;
        // A certifying set with redundant members certifies with them
        // dropped too, so only facet-minimal sets are kept.
        if p.bounded && p.facet_halfspaces().len() == idx.len() && enclosure_checks(&p, body, f64::INFINITY)? {
            out.push((mask, p.max_vertex_distance(body)));
        }
    }
    Ok(out)
}

/// `count` pairwise disjoint candidate sets certifying at radius `r`.
pub fn select_disjoint(candidates: &[(u32, f64)], r: f64, count: usize) -> Option<Vec<Vec<usize>>> {
    let good: Vec<u32> = candidates.iter().filter(|c| c.1 <= r).map(|c| c.0).collect();
    fn pick(good: &[u32], from: usize, used: u32, left: usize, acc: &mut Vec<u32>) -> bool {
        if left == 0 {
            return true;
        }
        for k in from..good.len() {
            if good[k] & used == 0 {
                acc.push(good[k]);
                if pick(good, k + 1, used | good[k], left - 1, acc) {
                    return true;
                }
                acc.pop();
            }
        }
        false
    }
    let mut acc = Vec::new();
    if !pick(&good, 0, 0, count, &mut acc) {
        return None;
    }
    Some(
        acc.iter()
            .map(|m| (0..32).filter(|i| m >> i & 1 == 1).collect())
            .collect(),
    )
}

/// Exhaustive search over subsets of `ξ` (at most 16 hyperplanes): returns
/// `count` pairwise disjoint index sets whose polytopes certify at radius
/// `r`, if any exist.
pub fn certify_exhaustive(xi: &[Hyperplane], body: &ConvexBody, r: f64, count: usize) -> Result<Option<Vec<Vec<usize>>>> {
    Ok(select_disjoint(&exhaustive_candidates(xi, body)?, r, count))
}
