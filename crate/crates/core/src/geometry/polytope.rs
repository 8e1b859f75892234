//! Vertex enumeration of halfspace intersections in two and three dimensions.
//!
//! The intersection is built by clipping a large bounding box (polygon or
//! polyhedron) successively with every halfspace. Boundedness is decided
//! independently from the recession cone `{v : <v, n_i> <= 0}`.

use serde::{Deserialize, Serialize};

use super::{ConvexBody, Halfspace, Point};
use crate::error::{Error, Result};
use crate::linalg::{dist, dot, norm, sub};

/// A face of a polytope: an edge in 2D, a polygon in 3D.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Face {
    /// Indices of the input halfspaces whose boundary contains the face.
    pub halfspaces: Vec<usize>,
    /// Vertex indices in boundary order.
    pub vertices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub halfspaces: Vec<Halfspace>,
    /// Empty when the polytope is unbounded.
    pub vertices: Vec<Point>,
    pub bounded: bool,
    pub faces: Vec<Face>,
}

impl Polytope {
    pub fn dim(&self) -> usize {
        self.halfspaces.first().map_or(0, |h| h.dim())
    }

    /// Indices of the halfspaces that support a face (the non-redundant ones).
    pub fn facet_halfspaces(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = self
            .faces
            .iter()
            .flat_map(|f| f.halfspaces.iter().copied())
            .collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }

    /// Pairs of vertex indices spanning the edges (1-faces).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for f in &self.faces {
            let vs = &f.vertices;
            let pairs: Vec<(usize, usize)> = if vs.len() == 2 {
                vec![(vs[0], vs[1])]
            } else {
                (0..vs.len()).map(|i| (vs[i], vs[(i + 1) % vs.len()])).collect()
            };
            for (a, b) in pairs {
                edges.push((a.min(b), a.max(b)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    pub fn volume(&self) -> f64 {
        if !self.bounded || self.vertices.len() <= self.dim() {
            return if self.bounded { 0.0 } else { f64::INFINITY };
        }
        let centroid = centroid(&self.vertices);
        match self.dim() {
            2 => self
                .faces
                .iter()
                .map(|f| {
                    let a = sub(&self.vertices[f.vertices[0]], &centroid);
                    let b = sub(&self.vertices[f.vertices[1]], &centroid);
                    0.5 * (a[0] * b[1] - a[1] * b[0]).abs()
                })
                .sum(),
            _ => self
                .faces
                .iter()
                .map(|f| {
                    let p0 = sub(&self.vertices[f.vertices[0]], &centroid);
                    f.vertices[1..]
                        .windows(2)
                        .map(|w| {
                            let a = sub(&self.vertices[w[0]], &centroid);
                            let b = sub(&self.vertices[w[1]], &centroid);
                            let c = crate::linalg::generalized_cross(&[a, b]);
                            dot(&p0, &c).abs() / 6.0
                        })
                        .sum::<f64>()
                })
                .sum(),
        }
    }

    /// Largest distance from a vertex to `body`.
    pub fn max_vertex_distance(&self, body: &ConvexBody) -> f64 {
        self.vertices
            .iter()
            .map(|v| body.distance(v))
            .fold(0.0, f64::max)
    }
}

fn centroid(pts: &[Point]) -> Point {
    let d = pts[0].len();
    let mut c = vec![0.0; d];
    for p in pts {
        for (ci, pi) in c.iter_mut().zip(p) {
            *ci += pi;
        }
    }
    c.iter_mut().for_each(|ci| *ci /= pts.len() as f64);
    c
}

/// Sutherland-Hodgman clip of a convex polygon (in any ambient dimension)
/// against `<x, normal> <= offset`. Points within `eps` of the boundary count
/// as inside.
pub(crate) fn clip_polygon(poly: &[Point], normal: &[f64], offset: f64, eps: f64) -> Vec<Point> {
    let n = poly.len();
    let mut out: Vec<Point> = Vec::with_capacity(n + 1);
    if n == 0 {
        return out;
    }
    let ex: Vec<f64> = poly.iter().map(|p| dot(p, normal) - offset).collect();
    if ex.iter().all(|e| *e <= eps) {
        return poly.to_vec();
    }
    for i in 0..n {
        let j = (i + 1) % n;
        let (a, b) = (&poly[i], &poly[j]);
        let (da, db) = (ex[i], ex[j]);
        if da <= eps {
            out.push(a.clone());
        }
        if (da < -eps && db > eps) || (da > eps && db < -eps) {
            let t = da / (da - db);
            out.push(a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect());
        }
        if n == 2 {
            break;
        }
    }
    dedup_cycle(&mut out, eps);
    out
}

pub(crate) fn clip_polygon_2d(poly: &[Point], normal: &[f64; 2], offset: f64, eps: f64) -> Vec<Point> {
    clip_polygon(poly, normal, offset, eps)
}

fn dedup_cycle(pts: &mut Vec<Point>, eps: f64) {
    pts.dedup_by(|a, b| dist(a, b) <= eps);
    while pts.len() > 1 && dist(&pts[0], pts.last().unwrap()) <= eps {
        pts.pop();
    }
}

fn box_polygon(m: f64) -> Vec<Point> {
    vec![vec![-m, -m], vec![m, -m], vec![m, m], vec![-m, m]]
}

fn box_polyhedron(m: f64) -> Vec<Vec<Point>> {
    let v = |x: f64, y: f64, z: f64| vec![x * m, y * m, z * m];
    vec![
        vec![v(-1., -1., -1.), v(-1., 1., -1.), v(1., 1., -1.), v(1., -1., -1.)],
        vec![v(-1., -1., 1.), v(1., -1., 1.), v(1., 1., 1.), v(-1., 1., 1.)],
        vec![v(-1., -1., -1.), v(1., -1., -1.), v(1., -1., 1.), v(-1., -1., 1.)],
        vec![v(-1., 1., -1.), v(-1., 1., 1.), v(1., 1., 1.), v(1., 1., -1.)],
        vec![v(-1., -1., -1.), v(-1., -1., 1.), v(-1., 1., 1.), v(-1., 1., -1.)],
        vec![v(1., -1., -1.), v(1., 1., -1.), v(1., 1., 1.), v(1., -1., 1.)],
    ]
}

/// Clips a convex polyhedron (list of planar faces) against a halfspace.
fn clip_polyhedron(faces: &[Vec<Point>], normal: &[f64], offset: f64, eps: f64) -> Vec<Vec<Point>> {
    let mut any_out = false;
    let mut any_in = false;
    for p in faces.iter().flatten() {
        let e = dot(p, normal) - offset;
        any_out |= e > eps;
        any_in |= e <= eps;
    }
    if !any_out {
        return faces.to_vec();
    }
    if !any_in {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(faces.len() + 1);
    let mut cap: Vec<Point> = Vec::new();
    let mut coplanar_face = false;
    for face in faces {
        let clipped = clip_polygon(face, normal, offset, eps);
        let on: Vec<&Point> = clipped
            .iter()
            .filter(|p| (dot(p, normal) - offset).abs() <= eps)
            .collect();
        if clipped.len() >= 3 && on.len() == clipped.len() {
            coplanar_face = true;
        }
        for p in on {
            if cap.iter().all(|q| dist(p, q) > eps) {
                cap.push(p.clone());
            }
        }
        if clipped.len() >= 3 {
            out.push(clipped);
        }
    }
    if cap.len() >= 3 && !coplanar_face {
        out.push(order_planar(cap, normal));
    }
    out
}

/// Orders coplanar points of a convex polygon by angle about their centroid.
fn order_planar(mut pts: Vec<Point>, normal: &[f64]) -> Vec<Point> {
    let c = centroid(&pts);
    let e1 = {
        let far = pts
            .iter()
            .map(|p| sub(p, &c))
            .max_by(|a, b| norm(a).total_cmp(&norm(b)))
            .unwrap();
        let n = norm(&far);
        far.iter().map(|x| x / n).collect::<Vec<f64>>()
    };
    let e2 = crate::linalg::generalized_cross(&[normal.to_vec(), e1.clone()]);
    pts.sort_by(|a, b| {
        let (ra, rb) = (sub(a, &c), sub(b, &c));
        let ta = dot(&ra, &e2).atan2(dot(&ra, &e1));
        let tb = dot(&rb, &e2).atan2(dot(&rb, &e1));
        ta.total_cmp(&tb)
    });
    pts
}

/// Whether the cone `{v : <v, n_i> <= 0 for all i}` is `{0}`, checked by
/// clipping the cube `[-1, 1]^d` with the homogeneous constraints.
fn recession_cone_is_trivial(hs: &[Halfspace]) -> bool {
    const EPS: f64 = 1e-12;
    let d = hs[0].dim();
    let pts: Vec<Point> = if d == 2 {
        let mut poly = box_polygon(1.0);
        for h in hs {
            poly = clip_polygon(&poly, &h.normal, 0.0, EPS);
            if poly.is_empty() {
                break;
            }
        }
        poly
    } else {
        let mut faces = box_polyhedron(1.0);
        for h in hs {
            faces = clip_polyhedron(&faces, &h.normal, 0.0, EPS);
            if faces.is_empty() {
                break;
            }
        }
        faces.into_iter().flatten().collect()
    };
    pts.iter().all(|p| norm(p) <= 1e-9)
}

/// Vertex enumeration of `∩ {x : <x, n_i> <= c_i}` for `d ∈ {2, 3}`.
pub fn halfspace_polytope(halfspaces: &[Halfspace], tol: f64) -> Result<Polytope> {
    let Some(first) = halfspaces.first() else {
        return Err(Error::InvalidParams("halfspace list is empty".into()));
    };
    let d = first.dim();
    if d != 2 && d != 3 {
        return Err(Error::UnsupportedDimension(format!(
            "vertex enumeration needs d = 2 or 3, got {d}"
        )));
    }
    if let Some(h) = halfspaces.iter().find(|h| h.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: h.dim(),
        });
    }
    if halfspaces.iter().any(|h| !(norm(&h.normal) > 0.0)) {
        return Err(Error::InvalidParams("halfspace normal must be nonzero".into()));
    }
    let unit: Vec<Halfspace> = halfspaces.iter().map(Halfspace::normalized).collect();
    let scale = unit.iter().fold(1.0f64, |a, h| a.max(h.offset.abs()));
    let bounded = recession_cone_is_trivial(&unit);
    let eps = tol * scale;

    let mut m = 1e3 * scale;
    let cap = 1e12 * scale;
    loop {
        let cell: Vec<Vec<Point>> = if d == 2 {
            let mut poly = box_polygon(m);
            for h in &unit {
                poly = clip_polygon(&poly, &h.normal, h.offset, eps);
                if poly.is_empty() {
                    break;
                }
            }
            if poly.is_empty() { Vec::new() } else { vec![poly] }
        } else {
            let mut faces = box_polyhedron(m);
            for h in &unit {
                faces = clip_polyhedron(&faces, &h.normal, h.offset, eps);
                if faces.is_empty() {
                    break;
                }
            }
            faces
        };
        if cell.is_empty() {
            if m >= cap {
                return Err(Error::EmptyIntersection);
            }
            m *= 1e3;
            continue;
        }
        if !bounded {
            return Ok(Polytope {
                halfspaces: halfspaces.to_vec(),
                vertices: Vec::new(),
                bounded: false,
                faces: Vec::new(),
            });
        }
        let touches = cell
            .iter()
            .flatten()
            .any(|p| p.iter().any(|x| x.abs() >= m * (1.0 - 1e-9)));
        if touches && m < cap {
            m *= 1e3;
            continue;
        }
        return Ok(assemble(halfspaces, &unit, cell, d, eps));
    }
}

fn assemble(
    original: &[Halfspace],
    unit: &[Halfspace],
    cell: Vec<Vec<Point>>,
    d: usize,
    eps: f64,
) -> Polytope {
    let merge = 10.0 * eps;
    let mut vertices: Vec<Point> = Vec::new();
    let index_of = |p: &Point, vertices: &mut Vec<Point>| -> usize {
        if let Some(i) = vertices.iter().position(|q| dist(p, q) <= merge) {
            i
        } else {
            vertices.push(p.clone());
            vertices.len() - 1
        }
    };
    let mut polys: Vec<Vec<usize>> = Vec::new();
    for face in &cell {
        let mut idx: Vec<usize> = face.iter().map(|p| index_of(p, &mut vertices)).collect();
        idx.dedup();
        while idx.len() > 1 && idx.first() == idx.last() {
            idx.pop();
        }
        polys.push(idx);
    }
    let label = |vs: &[usize], vertices: &[Point]| -> Vec<usize> {
        unit.iter()
            .enumerate()
            .filter(|(_, h)| vs.iter().all(|&v| h.excess(&vertices[v]).abs() <= merge))
            .map(|(i, _)| i)
            .collect()
    };
    let mut faces = Vec::new();
    if d == 2 {
        let ring = &polys[0];
        if ring.len() >= 2 {
            let k = ring.len();
            let count = if k == 2 { 1 } else { k };
            for i in 0..count {
                let vs = vec![ring[i], ring[(i + 1) % k]];
                faces.push(Face {
                    halfspaces: label(&vs, &vertices),
                    vertices: vs,
                });
            }
        }
    } else {
        for vs in polys.into_iter().filter(|vs| vs.len() >= 3) {
            faces.push(Face {
                halfspaces: label(&vs, &vertices),
                vertices: vs,
            });
        }
    }
    Polytope {
        halfspaces: original.to_vec(),
        vertices,
        bounded: true,
        faces,
    }
}

/// Certifies that `body ⊂ int P` and that every vertex of `P` lies within
/// distance `r` of `body`. Since `d(·, K)` is convex its maximum over `P` is
/// attained at a vertex, so together with the first condition this places
/// the whole boundary of `P` in the outer parallel set `K_r`.
pub fn enclosure_checks(p: &Polytope, body: &ConvexBody, r: f64) -> Result<bool> {
    if !p.bounded {
        return Err(Error::Unbounded);
    }
    let inside = p
        .halfspaces
        .iter()
        .all(|h| body.support(&h.normal) < h.offset);
    Ok(inside && p.max_vertex_distance(body) <= r)
}
