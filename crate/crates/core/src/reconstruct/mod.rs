//! Recovery of every hyperplane hitting a convex body `K` from the
//! intersection points observed outside of it.
//!
//! Points are consumed in order of increasing distance to `K`. After each
//! new distance `T_n` the detector updates the set `ξ_n` of hyperplanes that
//! miss `K` and carry `2d-1` observed points in general hyperplane position.
//! Once `2d-1` polytopes with disjoint facet sets drawn from `ξ_n` enclose
//! `K` with their boundaries inside `K_{T_n}`, every hyperplane hitting `K`
//! is read off from the observed points and the run stops.

mod certify;
mod detect;

pub use certify::{certify_enclosure, certify_exhaustive, exhaustive_candidates, peel, select_disjoint, Certificate};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, Hyperplane, Point};
use crate::linalg::{dist, dot, sub};
use detect::{scan_all, Detector, Keep};

/// Supplies observed points shell by shell in order of distance to `K`.
pub trait PointSource {
    fn dim(&self) -> usize;

    /// The smallest distance `t` in `(after, limit]` carried by some point,
    /// together with every point at exactly that distance.
    fn next_shell(&mut self, after: f64, limit: f64) -> Result<Option<(f64, Vec<Point>)>>;
}

/// A fixed list of points served by distance to a body.
pub struct VecSource {
    dim: usize,
    shells: Vec<(f64, Vec<Point>)>,
}

impl VecSource {
    /// Points inside the body (distance 0) are never served.
    pub fn new(points: Vec<Point>, body: &ConvexBody) -> Self {
        let mut tagged: Vec<(f64, Point)> = points.into_iter().map(|p| (body.distance(&p), p)).collect();
        tagged.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut shells: Vec<(f64, Vec<Point>)> = Vec::new();
        for (t, p) in tagged {
            if t <= 0.0 {
                continue;
            }
            match shells.last_mut() {
                Some((s, v)) if *s == t => v.push(p),
                _ => shells.push((t, vec![p])),
            }
        }
        Self { dim: body.dim(), shells }
    }
}

impl PointSource for VecSource {
    fn dim(&self) -> usize {
        self.dim
    }

    fn next_shell(&mut self, after: f64, limit: f64) -> Result<Option<(f64, Vec<Point>)>> {
        Ok(self
            .shells
            .iter()
            .find(|(t, _)| *t > after)
            .filter(|(t, _)| *t <= limit)
            .cloned())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertifyMode {
    #[default]
    Greedy,
    /// Subset search; only for small `ξ`.
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReconstructionParams {
    /// Point-on-hyperplane slack, relative to `max(1, |x|)`.
    pub incident_tol: f64,
    /// Affine independence threshold.
    pub gp_tol: f64,
    /// Cutoff on `T`; defaults to 50 times the outradius of `K`.
    pub max_radius: Option<f64>,
    /// Number of enclosing polytopes; defaults to `2d-1`.
    pub polytope_count: Option<usize>,
    /// Points needed on a detected hyperplane; defaults to `2d-1`.
    pub min_points: Option<usize>,
    /// Stop as soon as one certified polytope has no observed point inside
    /// any of its edges (then no hyperplane hits `K`).
    pub early_exit: bool,
    /// Rescan all point subsets at every stage instead of only the new ones.
    pub full_recompute: bool,
    pub certify: CertifyMode,
}

impl Default for ReconstructionParams {
    fn default() -> Self {
        Self {
            incident_tol: 1e-9,
            gp_tol: 1e-9,
            max_radius: None,
            polytope_count: None,
            min_points: None,
            early_exit: false,
            full_recompute: false,
            certify: CertifyMode::Greedy,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct ResolvedParams {
    pub incident_tol: f64,
    pub gp_tol: f64,
    pub max_radius: f64,
    pub polytope_count: usize,
    pub min_points: usize,
    pub early_exit: bool,
    pub full_recompute: bool,
    pub certify: CertifyMode,
}

impl ReconstructionParams {
    pub(crate) fn resolve(&self, body: &ConvexBody) -> Result<ResolvedParams> {
        let d = body.dim();
        let default_count = 2 * d - 1;
        let r = ResolvedParams {
            incident_tol: self.incident_tol,
            gp_tol: self.gp_tol,
            max_radius: self.max_radius.unwrap_or(50.0 * body.outradius().max(f64::MIN_POSITIVE)),
            polytope_count: self.polytope_count.unwrap_or(default_count),
            min_points: self.min_points.unwrap_or(default_count),
            early_exit: self.early_exit,
            full_recompute: self.full_recompute,
            certify: self.certify,
        };
        if !(r.incident_tol > 0.0 && r.gp_tol > 0.0) {
            return Err(Error::InvalidParams("tolerances must be positive".into()));
        }
        if !(r.max_radius > 0.0) {
            return Err(Error::InvalidParams("max_radius must be positive".into()));
        }
        if r.polytope_count == 0 {
            return Err(Error::InvalidParams("polytope_count must be >= 1".into()));
        }
        if r.min_points < d {
            return Err(Error::InvalidParams(format!("min_points must be >= {d}")));
        }
        if !(2..=3).contains(&d) {
            return Err(Error::UnsupportedDimension(format!(
                "reconstruction needs d in {{2, 3}}, got {d}"
            )));
        }
        Ok(r)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// `T_n`.
    pub t: f64,
    /// Number of points observed up to `T_n`.
    pub observed: usize,
    /// `|ξ_n|`.
    pub xi: usize,
    /// Smallest radius at which the current `ξ_n` certifies (infinite when
    /// it cannot).
    pub required_radius: f64,
    /// Vertex lists of the certified polytopes, at the final stage only.
    pub certified: Option<Vec<Vec<Point>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StopReason {
    Certified,
    /// A single polytope with empty edges proved that nothing hits `K`.
    EarlyExit,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    /// The recovered hyperplanes hitting `K`.
    pub chi: Vec<Hyperplane>,
    /// Stopping time; `None` when the budget ran out.
    pub t: Option<f64>,
    /// Radius of the smallest centred ball containing `K_T`.
    pub stopping_radius: Option<f64>,
    pub stages: usize,
    pub stop: StopReason,
    pub trace: Vec<StageRecord>,
    /// Each hyperplane admitted to `ξ`, with the stage that admitted it.
    pub admissions: Vec<(usize, Hyperplane)>,
}

impl ReconstructionResult {
    pub fn terminated(&self) -> bool {
        self.t.is_some()
    }

    /// External JSON layout: hyperplanes as `[u_1, ..., u_d, s]` rows and
    /// `T = null` for a run that did not stop.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "chi": self.chi.iter().map(|h| h.to_row()).collect::<Vec<_>>(),
            "T": self.t,
            "stopping_radius": self.stopping_radius,
            "stages": self.stages,
            "terminated": self.terminated(),
            "stop": self.stop,
            "trace": self.trace,
        })
    }
}

/// Hyperplanes missing `K` that carry enough observed points in general
/// hyperplane position (`ξ` for the given points).
pub fn detect_hyperplanes(points: &[Point], body: &ConvexBody, params: &ReconstructionParams) -> Result<Vec<Hyperplane>> {
    let p = params.resolve(body)?;
    Ok(scan_all(points, body, &p, Keep::Missing))
}

/// Hyperplanes meeting `K` spanned by enough observed points in general
/// hyperplane position (`χ` for the given points).
pub fn recover_hitting(points: &[Point], body: &ConvexBody, params: &ReconstructionParams) -> Result<Vec<Hyperplane>> {
    let p = params.resolve(body)?;
    Ok(scan_all(points, body, &p, Keep::Hitting))
}

fn point_inside_edge(q: &[f64], a: &[f64], b: &[f64], tol: f64) -> bool {
    let ab = sub(b, a);
    let len2 = dot(&ab, &ab);
    if len2 == 0.0 {
        return false;
    }
    let t = dot(&sub(q, a), &ab) / len2;
    let foot: Vec<f64> = a.iter().zip(&ab).map(|(x, y)| x + t * y).collect();
    let scale = len2.sqrt().max(1.0);
    dist(q, &foot) <= tol * scale && dist(q, a) > tol * scale && dist(q, b) > tol * scale && (0.0..=1.0).contains(&t)
}

/// Runs the reconstruction against `source`.
pub fn run<S: PointSource + ?Sized>(source: &mut S, body: &ConvexBody, params: &ReconstructionParams) -> Result<ReconstructionResult> {
    let p = params.resolve(body)?;
    if source.dim() != body.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            got: source.dim(),
        });
    }
    let mut det = Detector::new(body, &p);
    let mut result = ReconstructionResult {
        chi: Vec::new(),
        t: None,
        stopping_radius: None,
        stages: 0,
        stop: StopReason::BudgetExhausted,
        trace: Vec::new(),
        admissions: Vec::new(),
    };
    let mut cert: Option<Certificate> = None;
    let mut candidates: Vec<(u32, f64)> = Vec::new();
    let mut exhaustive_required = f64::INFINITY;
    let mut after = 0.0;
    // Polytope vertices are recomputed intersection points, so they may sit
    // a rounding error beyond the point that realizes them.
    let slack_of = |t: f64| p.incident_tol * t.max(1.0);
    while let Some((t, shell)) = source.next_shell(after, p.max_radius)? {
        result.stages += 1;
        let mut changed = false;
        for q in shell {
            for h in det.add_point(q) {
                result.admissions.push((result.stages, h));
                changed = true;
            }
        }
        if changed {
            match p.certify {
                CertifyMode::Greedy => cert = peel(det.xi(), body, p.polytope_count)?,
                CertifyMode::Exhaustive => {
                    candidates = exhaustive_candidates(det.xi(), body)?;
                    let mut radii: Vec<f64> = candidates.iter().map(|c| c.1).collect();
                    radii.sort_by(f64::total_cmp);
                    exhaustive_required = radii
                        .into_iter()
                        .find(|&r| select_disjoint(&candidates, r, p.polytope_count).is_some())
                        .unwrap_or(f64::INFINITY);
                }
            }
        }
        let required = match p.certify {
            CertifyMode::Greedy => cert.as_ref().map_or(f64::INFINITY, |c| c.required_radius),
            CertifyMode::Exhaustive => exhaustive_required,
        };
        let slack = slack_of(t);
        let mut record = StageRecord {
            t,
            observed: det.points().len(),
            xi: det.xi().len(),
            required_radius: required,
            certified: None,
        };
        let found = match p.certify {
            CertifyMode::Greedy => (required <= t + slack).then(|| cert.clone()).flatten(),
            CertifyMode::Exhaustive => select_disjoint(&candidates, t + slack, p.polytope_count).and_then(|sets| {
                let polytopes = sets
                    .iter()
                    .map(|idx| {
                        let hs: Vec<_> = idx
                            .iter()
                            .map(|&i| det.xi()[i].halfspace_containing(body, 0.0).expect("ξ misses K"))
                            .collect();
                        crate::geometry::halfspace_polytope(&hs, 1e-9)
                    })
                    .collect::<Result<Vec<_>>>()
                    .ok()?;
                Some(Certificate {
                    polytopes,
                    hyperplanes: sets,
                    required_radius: required,
                })
            }),
        };
        if let Some(c) = found {
            record.certified = Some(c.polytopes.iter().map(|q| q.vertices.clone()).collect());
            result.trace.push(record);
            result.chi = scan_all(det.points(), body, &p, Keep::Hitting);
            result.stop = StopReason::Certified;
            result.t = Some(t);
            result.stopping_radius = Some(body.outradius() + t);
            return Ok(result);
        }
        if p.early_exit {
            if let Some(first) = peel(det.xi(), body, 1)?.filter(|c| c.required_radius <= t + slack) {
                let poly = &first.polytopes[0];
                let tol = p.incident_tol;
                let empty = poly.edges().iter().all(|&(a, b)| {
                    !det
                        .points()
                        .iter()
                        .any(|q| point_inside_edge(q, &poly.vertices[a], &poly.vertices[b], tol))
                });
                if empty {
                    record.certified = Some(vec![poly.vertices.clone()]);
                    result.trace.push(record);
                    result.stop = StopReason::EarlyExit;
                    result.t = Some(t);
                    result.stopping_radius = Some(body.outradius() + t);
                    return Ok(result);
                }
            }
        }
        result.trace.push(record);
        after = t;
    }
    log::warn!(
        "reconstruction budget exhausted at radius {} after {} stages",
        p.max_radius,
        result.stages
    );
    Ok(result)
}
