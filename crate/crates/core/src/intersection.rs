//! Intersection processes of a hyperplane realization: the points where `d`
//! hyperplanes meet, and the Hausdorff measures `Φ_m(B)` of `m`-fold
//! intersection flats clipped to a window.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{clip_flat, intersect_hyperplanes, BodySpec, ConvexBody, Hyperplane, Point, Section};
use crate::linalg::solve_square;
use crate::process::WorldOracle;
use crate::reconstruct::PointSource;
use crate::report::fmt_f64;

/// Normal matrices with `|det|` at or below this are treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// A point of `Φ = Φ_d` with the indices of the hyperplanes meeting there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionPoint {
    pub x: Point,
    pub parents: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntersectionPoints {
    /// Sorted lexicographically by `parents`.
    pub points: Vec<IntersectionPoint>,
    /// `d`-subsets skipped because their normals were (nearly) dependent.
    pub singular_skipped: usize,
}

/// `Φ_m(B)` for one realization, with the contribution of every `m`-subset
/// whose intersection flat meets the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionMeasureSample {
    pub m: usize,
    pub window: BodySpec,
    pub total: f64,
    pub contributions: Vec<(Vec<usize>, f64)>,
    /// Clipped sections, aligned with `contributions`.
    #[serde(skip)]
    pub sections: Vec<Section>,
    pub singular_skipped: usize,
}

fn hitting_indices(hs: &[Hyperplane], window: &ConvexBody) -> Vec<usize> {
    let tol = 1e-12 * window.outradius().max(1.0);
    (0..hs.len()).filter(|&i| window.hits(&hs[i], tol)).collect()
}

/// Runs `f` on every `k`-subset of `idx` (as sorted index tuples), in
/// parallel over the leading element. Results come back in lexicographic
/// order of the tuples regardless of scheduling.
fn for_each_subset<T, F>(idx: &[usize], k: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[usize]) -> Option<T> + Sync,
{
    if k == 0 || idx.len() < k {
        return Vec::new();
    }
    (0..=idx.len() - k)
        .into_par_iter()
        .map(|lead| {
            let mut out = Vec::new();
            let mut tuple = vec![idx[lead]; k];
            for rest in idx[lead + 1..].iter().combinations(k - 1) {
                for (slot, &&j) in tuple[1..].iter_mut().zip(&rest) {
                    *slot = j;
                }
                if let Some(t) = f(&tuple) {
                    out.push(t);
                }
            }
            out
        })
        .flatten_iter()
        .collect()
}

/// All points where `d` of the hyperplanes meet inside `window`.
///
/// Only hyperplanes meeting the window can carry a point of it, so the
/// enumeration is restricted to those.
pub fn intersection_points(hs: &[Hyperplane], window: &ConvexBody) -> IntersectionPoints {
    let Some(d) = hs.first().map(|h| h.dim()) else {
        return IntersectionPoints::default();
    };
    let idx = hitting_indices(hs, window);
    let raw = for_each_subset(&idx, d, |tuple| {
        let rows: Vec<&[f64]> = tuple.iter().map(|&i| hs[i].normal()).collect();
        let b: Vec<f64> = tuple.iter().map(|&i| hs[i].offset()).collect();
        match solve_square(&rows, &b, SINGULAR_DET) {
            None => Some(None),
            Some(x) if window.contains(&x) => Some(Some(IntersectionPoint {
                x,
                parents: tuple.to_vec(),
            })),
            Some(_) => None,
        }
    });
    let mut out = IntersectionPoints::default();
    for r in raw {
        match r {
            Some(p) => out.points.push(p),
            None => out.singular_skipped += 1,
        }
    }
    out
}

/// `Φ_m(B)`: the sum over unordered `m`-subsets of the `(d-m)`-dimensional
/// measure of `B ∩ H_1 ∩ ... ∩ H_m`.
pub fn phi_m_measure(hs: &[Hyperplane], m: usize, window: &ConvexBody) -> Result<IntersectionMeasureSample> {
    let d = window.dim();
    if m == 0 || m > d {
        return Err(Error::InvalidParams(format!("order m={m} must lie in 1..={d}")));
    }
    if let Some(h) = hs.iter().find(|h| h.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: h.dim(),
        });
    }
    let mut sample = IntersectionMeasureSample {
        m,
        window: window.spec(),
        total: 0.0,
        contributions: Vec::new(),
        sections: Vec::new(),
        singular_skipped: 0,
    };
    if m == d {
        let pts = intersection_points(hs, window);
        sample.singular_skipped = pts.singular_skipped;
        for p in pts.points {
            sample.contributions.push((p.parents, 1.0));
            sample.sections.push(Section::Point(p.x));
        }
    } else {
        let idx = hitting_indices(hs, window);
        let tol = 1e-9 * window.outradius().max(1.0);
        let raw = for_each_subset(&idx, m, |tuple| {
            let chosen: Vec<Hyperplane> = tuple.iter().map(|&i| hs[i].clone()).collect();
            let flat = match intersect_hyperplanes(&chosen, tol) {
                Ok(Some(f)) if !f.degenerate => f,
                Ok(Some(_)) => return Some(Err(None)),
                Ok(None) => return None,
                Err(e) => return Some(Err(Some(e))),
            };
            match clip_flat(&flat, window) {
                Ok(sec) if sec.measure() > 0.0 => Some(Ok((tuple.to_vec(), sec))),
                Ok(_) => None,
                Err(e) => Some(Err(Some(e))),
            }
        });
        for r in raw {
            match r {
                Ok((tuple, sec)) => {
                    sample.contributions.push((tuple, sec.measure()));
                    sample.sections.push(sec);
                }
                Err(None) => sample.singular_skipped += 1,
                Err(Some(e)) => return Err(e),
            }
        }
    }
    sample.total = sample.contributions.iter().map(|c| c.1).sum();
    Ok(sample)
}

/// Points of `Φ` whose distance to `body` lies in `(r_lo, r_hi]`.
///
/// The oracle is first extended to radius `outradius(body) + r_hi`: a point
/// within `r_hi` of the body lies in that ball, hence so do its parents.
pub fn points_in_annulus(
    oracle: &mut WorldOracle,
    body: &ConvexBody,
    r_lo: f64,
    r_hi: f64,
) -> Result<Vec<IntersectionPoint>> {
    if !(0.0 <= r_lo && r_lo <= r_hi) {
        return Err(Error::InvalidParams(format!(
            "annulus bounds must satisfy 0 <= {r_lo} <= {r_hi}"
        )));
    }
    if r_lo == r_hi {
        return Ok(Vec::new());
    }
    let reach = body.outradius() + r_hi;
    if reach > oracle.current_radius() {
        oracle.extend_to(reach)?;
    }
    let hs: Vec<Hyperplane> = oracle.hyperplanes().iter().map(|h| h.hyperplane.clone()).collect();
    let ball = ConvexBody::ball(vec![0.0; body.dim()], reach)?;
    Ok(intersection_points(&hs, &ball)
        .points
        .into_iter()
        .filter(|p| {
            let t = body.distance(&p.x);
            r_lo < t && t <= r_hi
        })
        .collect())
}

/// CSV `x_1,...,x_d`, with a trailing `parents` column (indices joined by
/// `;`) when `with_parents` is set.
pub fn points_csv(points: &[IntersectionPoint], d: usize, with_parents: bool) -> String {
    let mut header: Vec<String> = (1..=d).map(|i| format!("x_{i}")).collect();
    if with_parents {
        header.push("parents".into());
    }
    let mut out = header.join(",");
    out.push('\n');
    for p in points {
        let mut cells: Vec<String> = p.x.iter().map(|v| fmt_f64(*v)).collect();
        if with_parents {
            cells.push(p.parents.iter().map(|i| i.to_string()).join(";"));
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Serves the points of `Φ` to the reconstructor in order of increasing
/// distance to the body, fetching from the oracle in growing annuli.
///
/// Only positions cross the [`PointSource`] interface; parent indices are
/// retained for validation through [`OracleSource::revealed`].
pub struct OracleSource {
    oracle: WorldOracle,
    body: ConvexBody,
    fetched: f64,
    queue: Vec<(f64, IntersectionPoint)>,
    cursor: usize,
    first_fetch: f64,
}

impl OracleSource {
    pub fn new(oracle: WorldOracle, body: ConvexBody) -> Self {
        let first_fetch = (0.25 * body.outradius()).max(1.0);
        Self {
            oracle,
            body,
            fetched: 0.0,
            queue: Vec::new(),
            cursor: 0,
            first_fetch,
        }
    }

    pub fn oracle(&self) -> &WorldOracle {
        &self.oracle
    }

    /// Points handed out so far, with their parents.
    pub fn revealed(&self) -> impl Iterator<Item = &IntersectionPoint> {
        self.queue[..self.cursor].iter().map(|(_, p)| p)
    }

    fn fetch_to(&mut self, radius: f64) -> Result<()> {
        let mut found = points_in_annulus(&mut self.oracle, &self.body, self.fetched, radius)?
            .into_iter()
            .map(|p| (self.body.distance(&p.x), p))
            .collect::<Vec<_>>();
        found.sort_by(|a, b| {
            a.0.total_cmp(&b.0).then_with(|| {
                a.1.x
                    .iter()
                    .zip(&b.1.x)
                    .map(|(u, v)| u.total_cmp(v))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        });
        self.queue.extend(found);
        self.fetched = radius;
        Ok(())
    }
}

impl PointSource for OracleSource {
    fn dim(&self) -> usize {
        self.body.dim()
    }

    fn next_shell(&mut self, after: f64, limit: f64) -> Result<Option<(f64, Vec<Point>)>> {
        while self.cursor < self.queue.len() && self.queue[self.cursor].0 <= after {
            self.cursor += 1;
        }
        loop {
            if let Some(&(t, _)) = self.queue.get(self.cursor) {
                if t > limit {
                    return Ok(None);
                }
                let mut shell = Vec::new();
                while self.cursor < self.queue.len() && self.queue[self.cursor].0 == t {
                    shell.push(self.queue[self.cursor].1.x.clone());
                    self.cursor += 1;
                }
                return Ok(Some((t, shell)));
            }
            if self.fetched >= limit {
                return Ok(None);
            }
            let next = (2.0 * self.fetched).max(self.fetched + self.first_fetch).min(limit);
            self.fetch_to(next)?;
        }
    }
}
