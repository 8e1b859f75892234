use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{halfspace_polytope, Halfspace, Hyperplane, Point, Polytope, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{dist, dot, norm, solve_affine, unit_ball_volume};

/// A nonempty convex compact window.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexBody {
    Ball { center: Point, radius: f64 },
    Cuboid { lo: Point, hi: Point },
    Polytope(Box<Polytope>),
}

/// Serializable description of a [`ConvexBody`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BodySpec {
    Ball { center: Point, radius: f64 },
    Cuboid { lo: Point, hi: Point },
    Polytope { halfspaces: Vec<Halfspace> },
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody> {
        match self {
            BodySpec::Ball { center, radius } => ConvexBody::ball(center.clone(), *radius),
            BodySpec::Cuboid { lo, hi } => ConvexBody::cuboid(lo.clone(), hi.clone()),
            BodySpec::Polytope { halfspaces } => ConvexBody::polytope(halfspaces.clone()),
        }
    }
}

impl ConvexBody {
    /// A closed ball. A zero radius (a single point) is allowed.
    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidBody("ball center must be finite".into()));
        }
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::InvalidBody(format!("ball radius {radius} must be >= 0")));
        }
        Ok(ConvexBody::Ball { center, radius })
    }

    pub fn unit_ball(d: usize) -> Self {
        ConvexBody::Ball {
            center: vec![0.0; d],
            radius: 1.0,
        }
    }

    /// Axis-parallel box `[lo, hi]`.
    pub fn cuboid(lo: Point, hi: Point) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidBody("box corners must have equal, nonzero length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b && a.is_finite() && b.is_finite())) {
            return Err(Error::InvalidBody("box needs lo < hi componentwise".into()));
        }
        Ok(ConvexBody::Cuboid { lo, hi })
    }

    /// Bounded intersection of halfspaces (d = 2 or 3).
    pub fn polytope(halfspaces: Vec<Halfspace>) -> Result<Self> {
        let p = halfspace_polytope(&halfspaces, DEFAULT_TOL).map_err(|e| match e {
            Error::EmptyIntersection => Error::InvalidBody("polytope is empty".into()),
            other => other,
        })?;
        if !p.bounded {
            return Err(Error::InvalidBody("polytope is unbounded".into()));
        }
        Ok(ConvexBody::Polytope(Box::new(p)))
    }

    pub fn spec(&self) -> BodySpec {
        match self {
            ConvexBody::Ball { center, radius } => BodySpec::Ball {
                center: center.clone(),
                radius: *radius,
            },
            ConvexBody::Cuboid { lo, hi } => BodySpec::Cuboid {
                lo: lo.clone(),
                hi: hi.clone(),
            },
            ConvexBody::Polytope(p) => BodySpec::Polytope {
                halfspaces: p.halfspaces.clone(),
            },
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ball { center, .. } => center.len(),
            ConvexBody::Cuboid { lo, .. } => lo.len(),
            ConvexBody::Polytope(p) => p.dim(),
        }
    }

    /// Closed membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            ConvexBody::Ball { center, radius } => dist(x, center) <= *radius,
            ConvexBody::Cuboid { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (a, b))| *a <= *v && *v <= *b),
            ConvexBody::Polytope(p) => {
                let tol = 1e-12 * self.outradius().max(1.0);
                p.halfspaces.iter().all(|h| h.excess(x) <= tol * norm(&h.normal))
            }
        }
    }

    /// Support function `max_{x in K} <x, u>`.
    pub fn support(&self, u: &[f64]) -> f64 {
        match self {
            ConvexBody::Ball { center, radius } => dot(center, u) + radius * norm(u),
            ConvexBody::Cuboid { lo, hi } => u
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(c, (a, b))| (c * a).max(c * b))
                .sum(),
            ConvexBody::Polytope(p) => p
                .vertices
                .iter()
                .map(|v| dot(v, u))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Whether the hyperplane meets the body, with slack `tol` on the offset.
    pub fn hits(&self, h: &Hyperplane, tol: f64) -> bool {
        match self {
            ConvexBody::Ball { center, radius } => {
                (h.offset() - dot(center, h.normal())).abs() <= radius + tol
            }
            _ => {
                let neg: Vec<f64> = h.normal().iter().map(|c| -c).collect();
                let lo = -self.support(&neg);
                let hi = self.support(h.normal());
                lo - tol <= h.offset() && h.offset() <= hi + tol
            }
        }
    }

    /// Radius of the smallest origin-centred ball containing the body.
    pub fn outradius(&self) -> f64 {
        match self {
            ConvexBody::Ball { center, radius } => norm(center) + radius,
            ConvexBody::Cuboid { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| (a * a).max(b * b))
                .sum::<f64>()
                .sqrt(),
            ConvexBody::Polytope(p) => p.vertices.iter().map(|v| norm(v)).fold(0.0, f64::max),
        }
    }

    /// Lebesgue volume.
    pub fn volume(&self) -> f64 {
        match self {
            ConvexBody::Ball { center, radius } => {
                unit_ball_volume(center.len()) * radius.powi(center.len() as i32)
            }
            ConvexBody::Cuboid { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            ConvexBody::Polytope(p) => p.volume(),
        }
    }

    /// Bounding halfspaces (empty for balls).
    pub fn halfspaces(&self) -> Vec<Halfspace> {
        match self {
            ConvexBody::Ball { .. } => Vec::new(),
            ConvexBody::Cuboid { lo, hi } => {
                let d = lo.len();
                let mut hs = Vec::with_capacity(2 * d);
                for k in 0..d {
                    let mut e = vec![0.0; d];
                    e[k] = 1.0;
                    hs.push(Halfspace::new(e.clone(), hi[k]));
                    e[k] = -1.0;
                    hs.push(Halfspace::new(e, -lo[k]));
                }
                hs
            }
            ConvexBody::Polytope(p) => p.halfspaces.clone(),
        }
    }

    /// The dilation `r K` about the origin.
    pub fn scaled(&self, r: f64) -> Result<Self> {
        match self {
            ConvexBody::Ball { center, radius } => {
                Self::ball(center.iter().map(|c| c * r).collect(), radius * r)
            }
            ConvexBody::Cuboid { lo, hi } => Self::cuboid(
                lo.iter().map(|c| c * r).collect(),
                hi.iter().map(|c| c * r).collect(),
            ),
            ConvexBody::Polytope(p) => Self::polytope(
                p.halfspaces
                    .iter()
                    .map(|h| Halfspace::new(h.normal.clone(), h.offset * r))
                    .collect(),
            ),
        }
    }

    /// Euclidean distance from `x` to the body (zero inside).
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            ConvexBody::Ball { center, radius } => (dist(x, center) - radius).max(0.0),
            ConvexBody::Cuboid { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (a, b))| (a - v).max(0.0).max(v - b).powi(2))
                .sum::<f64>()
                .sqrt(),
            ConvexBody::Polytope(p) => polytope_distance(p, x),
        }
    }
}

/// Distance to a bounded polytope by enumerating candidate faces: the nearest
/// point is the projection of `x` onto the affine hull of some face, and every
/// feasible projection bounds the distance from above.
fn polytope_distance(p: &Polytope, x: &[f64]) -> f64 {
    let tol = 1e-12 * p.vertices.iter().map(|v| norm(v)).fold(1.0, f64::max);
    let hs: Vec<Halfspace> = p.halfspaces.iter().map(Halfspace::normalized).collect();
    if hs.iter().all(|h| h.excess(x) <= tol) {
        return 0.0;
    }
    let facets: Vec<usize> = p.facet_halfspaces();
    let d = x.len();
    let mut best = p
        .vertices
        .iter()
        .map(|v| dist(v, x))
        .fold(f64::INFINITY, f64::min);
    for k in 1..d {
        for subset in facets.iter().copied().combinations(k) {
            let rows: Vec<&[f64]> = subset.iter().map(|&i| hs[i].normal.as_slice()).collect();
            // Project x onto {y : <y, n_i> = c_i, i in subset}.
            let rhs: Vec<f64> = subset
                .iter()
                .map(|&i| hs[i].offset - dot(x, &hs[i].normal))
                .collect();
            let sol = solve_affine(&rows, &rhs, 1e-12);
            if sol.rank < k || sol.residual > tol {
                continue;
            }
            let y: Vec<f64> = x.iter().zip(&sol.x).map(|(a, b)| a + b).collect();
            if hs.iter().all(|h| h.excess(&y) <= tol * 10.0) {
                best = best.min(norm(&sol.x));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances() {
        let disk = ConvexBody::unit_ball(2);
        assert!((disk.distance(&[3.0, 0.0]) - 2.0).abs() < 1e-15);
        assert_eq!(disk.distance(&[0.0, 0.0]), 0.0);
        let unit = ConvexBody::cuboid(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!((unit.distance(&[2.0, 2.0]) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn polytope_distance_matches_box_distance() {
        let lo = vec![-1.0, 0.0, 0.5];
        let hi = vec![2.0, 1.0, 1.5];
        let boxed = ConvexBody::cuboid(lo, hi).unwrap();
        let poly = ConvexBody::polytope(boxed.halfspaces()).unwrap();
        let probes = [
            [3.0, 2.0, 2.0],
            [0.0, 0.5, 1.0],
            [0.5, -2.0, 1.0],
            [-3.0, 0.5, -1.0],
            [5.0, 5.0, 1.0],
        ];
        for x in probes {
            assert!((boxed.distance(&x) - poly.distance(&x)).abs() < 1e-9, "{x:?}");
        }
        assert!((boxed.volume() - poly.volume()).abs() < 1e-9);
        assert!((boxed.outradius() - poly.outradius()).abs() < 1e-12);
    }

    #[test]
    fn triangle_distance_to_edge_and_vertex() {
        let tri = ConvexBody::polytope(vec![
            Halfspace::new(vec![0.0, -1.0], 0.0),
            Halfspace::new(vec![-1.0, 0.0], 0.0),
            Halfspace::new(vec![1.0, 1.0], 1.0),
        ])
        .unwrap();
        assert!((tri.distance(&[1.0, 1.0]) - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((tri.distance(&[-1.0, -1.0]) - 2f64.sqrt()).abs() < 1e-12);
        assert!((tri.distance(&[0.5, -2.0]) - 2.0).abs() < 1e-12);
        assert!((tri.volume() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hitting_tests() {
        let disk = ConvexBody::unit_ball(2);
        let x3 = Hyperplane::new(vec![1.0, 0.0], 3.0).unwrap();
        assert!(!disk.hits(&x3, 0.0));
        let unit = ConvexBody::cuboid(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let diag = Hyperplane::new(vec![1.0, 1.0], 1.9).unwrap();
        assert!(unit.hits(&diag, 0.0));
        let far = Hyperplane::new(vec![1.0, 1.0], 2.1).unwrap();
        assert!(!unit.hits(&far, 0.0));
        assert!(far.halfspace_containing(&unit, 0.0).unwrap().excess(&[0.5, 0.5]) < 0.0);
    }

    #[test]
    fn invalid_bodies_are_rejected() {
        assert!(ConvexBody::ball(vec![0.0], -1.0).is_err());
        assert!(ConvexBody::cuboid(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(ConvexBody::polytope(vec![Halfspace::new(vec![0.0, 1.0], 0.0)]).is_err());
    }
}
