use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{ConvexBody, Hyperplane, Point};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, solve_affine, sub, unit_ball_volume};

/// An affine flat `anchor + span(directions)` with orthonormal directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flat {
    pub anchor: Point,
    pub directions: Vec<Vec<f64>>,
    /// Set when the flat came from a rank-deficient (but consistent) system,
    /// so its dimension exceeds `d - m`.
    pub degenerate: bool,
}

impl Flat {
    pub fn point(x: Point) -> Self {
        Self {
            anchor: x,
            directions: Vec::new(),
            degenerate: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.anchor.len()
    }

    /// Orthogonal projection of `x` onto the flat.
    pub fn project(&self, x: &[f64]) -> Point {
        let rel = sub(x, &self.anchor);
        self.directions
            .iter()
            .fold(self.anchor.clone(), |acc, e| axpy(&acc, dot(&rel, e), e))
    }

    /// `anchor + Σ coords_i e_i`
    pub fn embed(&self, coords: &[f64]) -> Point {
        self.directions
            .iter()
            .zip(coords)
            .fold(self.anchor.clone(), |acc, (e, c)| axpy(&acc, *c, e))
    }
}

/// Intersects `1 <= m <= d` hyperplanes.
///
/// Returns `None` when the system is inconsistent. The anchor of the result is
/// the minimum-norm solution; a rank-deficient but consistent system yields a
/// flat of dimension `d - rank` flagged as degenerate.
pub fn intersect_hyperplanes(hs: &[Hyperplane], tol: f64) -> Result<Option<Flat>> {
    let Some(first) = hs.first() else {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    };
    let d = first.dim();
    if hs.len() > d {
        return Err(Error::InvalidParams(format!(
            "cannot intersect {} hyperplanes in dimension {d}",
            hs.len()
        )));
    }
    if let Some(h) = hs.iter().find(|h| h.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: h.dim(),
        });
    }
    let rows: Vec<&[f64]> = hs.iter().map(|h| h.normal()).collect();
    let rhs: Vec<f64> = hs.iter().map(|h| h.offset()).collect();
    let sol = solve_affine(&rows, &rhs, tol);
    let scale = rhs.iter().fold(1.0f64, |a, s| a.max(s.abs()));
    if sol.residual > tol * scale {
        return Ok(None);
    }
    Ok(Some(Flat {
        anchor: sol.x,
        directions: sol.null_space,
        degenerate: sol.rank < hs.len(),
    }))
}

/// The intersection of a flat with a convex window, in a form that supports
/// both its Hausdorff measure and uniform sampling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Section {
    Empty,
    Point(Point),
    Segment(Point, Point),
    /// Convex polygon inside a 2-flat, vertices in order.
    Polygon(Vec<Point>),
    /// A `k`-ball inside a `k`-flat: center, radius and orthonormal directions.
    Disk {
        center: Point,
        radius: f64,
        directions: Vec<Vec<f64>>,
    },
}

impl Section {
    /// Hausdorff measure in the dimension of the section's flat.
    pub fn measure(&self) -> f64 {
        match self {
            Section::Empty => 0.0,
            Section::Point(_) => 1.0,
            Section::Segment(a, b) => crate::linalg::dist(a, b),
            Section::Polygon(vs) => polygon_area(vs),
            Section::Disk {
                radius, directions, ..
            } => {
                let k = directions.len();
                unit_ball_volume(k) * radius.powi(k as i32)
            }
        }
    }

    /// A uniformly distributed point of the section; `None` when empty.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Point> {
        match self {
            Section::Empty => None,
            Section::Point(p) => Some(p.clone()),
            Section::Segment(a, b) => {
                let t: f64 = rng.random();
                Some(axpy(a, t, &sub(b, a)))
            }
            Section::Polygon(vs) => sample_polygon(vs, rng),
            Section::Disk {
                center,
                radius,
                directions,
            } => {
                let k = directions.len();
                if k == 0 {
                    return Some(center.clone());
                }
                // Uniform direction times radius * U^(1/k).
                let g: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
                let gn = norm(&g);
                let r = radius * rng.random::<f64>().powf(1.0 / k as f64);
                Some(
                    directions
                        .iter()
                        .zip(&g)
                        .fold(center.clone(), |acc, (e, c)| axpy(&acc, r * c / gn, e)),
                )
            }
        }
    }
}

fn polygon_area(vs: &[Point]) -> f64 {
    if vs.len() < 3 {
        return 0.0;
    }
    // Area of a planar polygon in R^d via the fan of triangles at vs[0].
    let mut area = 0.0;
    for w in vs[1..].windows(2) {
        area += triangle_area(&vs[0], &w[0], &w[1]);
    }
    area
}

fn triangle_area(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let ab = sub(b, a);
    let ac = sub(c, a);
    let g11 = dot(&ab, &ab);
    let g22 = dot(&ac, &ac);
    let g12 = dot(&ab, &ac);
    0.5 * (g11 * g22 - g12 * g12).max(0.0).sqrt()
}

fn sample_polygon<R: Rng + ?Sized>(vs: &[Point], rng: &mut R) -> Option<Point> {
    if vs.len() < 3 {
        return vs.first().cloned();
    }
    let areas: Vec<f64> = vs[1..]
        .windows(2)
        .map(|w| triangle_area(&vs[0], &w[0], &w[1]))
        .collect();
    let total: f64 = areas.iter().sum();
    let mut target = rng.random::<f64>() * total;
    let mut idx = areas.len() - 1;
    for (i, a) in areas.iter().enumerate() {
        if target < *a {
            idx = i;
            break;
        }
        target -= a;
    }
    let (a, b, c) = (&vs[0], &vs[idx + 1], &vs[idx + 2]);
    let (mut u, mut v): (f64, f64) = (rng.random(), rng.random());
    if u + v > 1.0 {
        u = 1.0 - u;
        v = 1.0 - v;
    }
    Some(axpy(&axpy(a, u, &sub(b, a)), v, &sub(c, a)))
}

/// Clips a flat against a window.
///
/// Supports flats of dimension 0, 1 and 2 against any window and flats of any
/// dimension against balls.
pub fn clip_flat(f: &Flat, window: &ConvexBody) -> Result<Section> {
    if f.dim() == 0 {
        return Ok(if window.contains(&f.anchor) {
            Section::Point(f.anchor.clone())
        } else {
            Section::Empty
        });
    }
    if let ConvexBody::Ball { center, radius } = window {
        let foot = f.project(center);
        let delta2 = dot(&sub(&foot, center), &sub(&foot, center));
        let r2 = radius * radius - delta2;
        if r2 <= 0.0 {
            return Ok(Section::Empty);
        }
        return Ok(Section::Disk {
            center: foot,
            radius: r2.sqrt(),
            directions: f.directions.clone(),
        });
    }
    let halfspaces = window.halfspaces();
    match f.dim() {
        1 => {
            let e = &f.directions[0];
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for h in &halfspaces {
                // <anchor + t e, n> <= c
                let a = dot(e, &h.normal);
                let b = h.offset - dot(&f.anchor, &h.normal);
                if a.abs() < 1e-300 {
                    if b < 0.0 {
                        return Ok(Section::Empty);
                    }
                } else if a > 0.0 {
                    hi = hi.min(b / a);
                } else {
                    lo = lo.max(b / a);
                }
            }
            if !(lo < hi) {
                return Ok(Section::Empty);
            }
            Ok(Section::Segment(
                axpy(&f.anchor, lo, e),
                axpy(&f.anchor, hi, e),
            ))
        }
        2 => {
            let bound = norm(&f.anchor) + window.outradius() + 1.0;
            let mut poly = vec![
                vec![-bound, -bound],
                vec![bound, -bound],
                vec![bound, bound],
                vec![-bound, bound],
            ];
            for h in &halfspaces {
                let n2 = [dot(&f.directions[0], &h.normal), dot(&f.directions[1], &h.normal)];
                let c2 = h.offset - dot(&f.anchor, &h.normal);
                poly = super::polytope::clip_polygon_2d(&poly, &n2, c2, 0.0);
                if poly.is_empty() {
                    return Ok(Section::Empty);
                }
            }
            if poly.len() < 3 {
                return Ok(Section::Empty);
            }
            Ok(Section::Polygon(poly.iter().map(|c| f.embed(c)).collect()))
        }
        k => Err(Error::UnsupportedDimension(format!(
            "Hausdorff measure of a {k}-flat is only supported in ball windows"
        ))),
    }
}

/// Hausdorff measure of `f ∩ window` in dimension `f.dim()`.
pub fn flat_measure_in_window(f: &Flat, window: &ConvexBody) -> Result<f64> {
    Ok(clip_flat(f, window)?.measure())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Hyperplane;
    use rand::SeedableRng;

    fn line(u: [f64; 2], s: f64) -> Flat {
        let h = Hyperplane::new(u.to_vec(), s).unwrap();
        intersect_hyperplanes(&[h], 1e-12).unwrap().unwrap()
    }

    #[test]
    fn two_axes_meet_at_origin() {
        let x0 = Hyperplane::new(vec![1.0, 0.0], 0.0).unwrap();
        let y0 = Hyperplane::new(vec![0.0, 1.0], 0.0).unwrap();
        let f = intersect_hyperplanes(&[x0, y0], 1e-12).unwrap().unwrap();
        assert_eq!(f.dim(), 0);
        assert!(norm(&f.anchor) < 1e-15);
        assert!(!f.degenerate);
    }

    #[test]
    fn parallel_lines_do_not_meet() {
        let a = Hyperplane::new(vec![1.0, 0.0], 0.0).unwrap();
        let b = Hyperplane::new(vec![1.0, 0.0], 1.0).unwrap();
        assert!(intersect_hyperplanes(&[a, b], 1e-12).unwrap().is_none());
    }

    #[test]
    fn coincident_planes_give_a_degenerate_flat() {
        let a = Hyperplane::new(vec![0.0, 0.0, 1.0], 2.0).unwrap();
        let f = intersect_hyperplanes(&[a.clone(), a], 1e-12).unwrap().unwrap();
        assert!(f.degenerate);
        assert_eq!(f.dim(), 2);
    }

    #[test]
    fn single_plane_is_a_two_flat() {
        let z0 = Hyperplane::new(vec![0.0, 0.0, 1.0], 0.0).unwrap();
        let f = intersect_hyperplanes(&[z0], 1e-12).unwrap().unwrap();
        assert_eq!(f.dim(), 2);
        assert!(norm(&f.anchor) < 1e-15);
        for e in &f.directions {
            assert!(e[2].abs() < 1e-15);
            assert!((norm(e) - 1.0).abs() < 1e-12);
        }
        assert!(dot(&f.directions[0], &f.directions[1]).abs() < 1e-12);
    }

    #[test]
    fn chord_lengths() {
        let disk = ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!((flat_measure_in_window(&line([0.0, 1.0], 0.0), &disk).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(flat_measure_in_window(&line([0.0, 1.0], 2.0), &disk).unwrap(), 0.0);
        let unit = ConvexBody::cuboid(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!((flat_measure_in_window(&line([1.0, 0.0], 0.5), &unit).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plane_section_of_a_cube_and_a_ball() {
        let cube = ConvexBody::cuboid(vec![-1.0; 3], vec![1.0; 3]).unwrap();
        let z = Hyperplane::new(vec![0.0, 0.0, 1.0], 0.3).unwrap();
        let f = intersect_hyperplanes(&[z], 1e-12).unwrap().unwrap();
        assert!((flat_measure_in_window(&f, &cube).unwrap() - 4.0).abs() < 1e-9);
        let ball = ConvexBody::ball(vec![0.0; 3], 1.0).unwrap();
        let area = flat_measure_in_window(&f, &ball).unwrap();
        assert!((area - std::f64::consts::PI * (1.0 - 0.09)).abs() < 1e-12);
    }

    #[test]
    fn three_flat_in_a_box_is_unsupported() {
        let h = Hyperplane::new(vec![0.0, 0.0, 0.0, 1.0], 0.0).unwrap();
        let f = intersect_hyperplanes(&[h], 1e-12).unwrap().unwrap();
        let boxed = ConvexBody::cuboid(vec![-1.0; 4], vec![1.0; 4]).unwrap();
        assert!(matches!(
            flat_measure_in_window(&f, &boxed),
            Err(Error::UnsupportedDimension(_))
        ));
        let ball = ConvexBody::ball(vec![0.0; 4], 1.0).unwrap();
        let vol = flat_measure_in_window(&f, &ball).unwrap();
        assert!((vol - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    /// Quadrature oracle: the chord length is the hit rate of points spread
    /// along a long segment times the segment length.
    #[test]
    fn chord_lengths_match_hit_rate_quadrature() {
        let mut rng = crate::seed::Rng::seed_from_u64(11);
        let disk = ConvexBody::ball(vec![0.2, -0.1], 1.3).unwrap();
        let square = ConvexBody::cuboid(vec![-1.0, -0.5], vec![1.5, 1.0]).unwrap();
        for window in [&disk, &square] {
            for _ in 0..100 {
                let theta: f64 = rng.random::<f64>() * std::f64::consts::PI;
                let s: f64 = rng.random::<f64>() * 2.0 - 1.0;
                let f = line([theta.cos(), theta.sin()], s);
                let exact = flat_measure_in_window(&f, window).unwrap();
                // Jittered regular grid along a segment covering the window.
                let half = 5.0;
                let n = 100_000;
                let step = 2.0 * half / n as f64;
                let jitter: f64 = rng.random();
                let hits = (0..n)
                    .filter(|i| {
                        let t = -half + (*i as f64 + jitter) * step;
                        window.contains(&axpy(&f.anchor, t, &f.directions[0]))
                    })
                    .count();
                let estimate = step * hits as f64;
                // 1% relative, with an absolute floor for near-tangent chords.
                assert!(
                    (estimate - exact).abs() <= 0.01 * exact + 2.0 * step,
                    "estimate {estimate} vs exact {exact}"
                );
            }
        }
    }

    #[test]
    fn samples_fall_inside_the_section() {
        let mut rng = crate::seed::Rng::seed_from_u64(3);
        let cube = ConvexBody::cuboid(vec![-1.0; 3], vec![1.0; 3]).unwrap();
        let h = Hyperplane::new(vec![1.0, 1.0, 1.0], 0.5).unwrap();
        let f = intersect_hyperplanes(std::slice::from_ref(&h), 1e-12).unwrap().unwrap();
        let sec = clip_flat(&f, &cube).unwrap();
        for _ in 0..1000 {
            let p = sec.sample(&mut rng).unwrap();
            assert!(cube.distance(&p) < 1e-9);
            assert!(h.signed_distance(&p).abs() < 1e-9);
        }
    }
}
