//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::time::Instant;

use itertools::Itertools;
use rand::Rng;
use rayon::prelude::*;

use hip_core::geometry::{
    halfspace_polytope, hyperplane_through_points, in_general_hyperplane_position, BodySpec, ConvexBody, Halfspace,
    Hyperplane, Point,
};
use hip_core::intersection::{intersection_points, OracleSource, SINGULAR_DET};
use hip_core::process::{DirectionalModel, Directions, WorldOracle};
use hip_core::reconstruct::{detect_hyperplanes, recover_hitting, run, ReconstructionParams, ReconstructionResult, VecSource};
use hip_core::seed;
use hip_core::stats::{
    cox_variance_identity, pair_correlation, stopping_tail, thinning_variance_identity, variance_scaling,
    PairCorrelationConfig, ScalingConfig, Summary, TailConfig, Transform,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn disk(radius: f64) -> BodySpec {
    BodySpec::Ball {
        center: vec![0.0, 0.0],
        radius,
    }
}

fn planar() -> DirectionalModel {
    DirectionalModel::isotropic(2, 1.0).unwrap()
}

/// Reconstruction runs shared by the equivalence and soundness checks.
fn oracle_runs(seeds: u64) -> Vec<(ReconstructionResult, OracleSource)> {
    let body = ConvexBody::unit_ball(2);
    let params = ReconstructionParams {
        max_radius: Some(50.0),
        ..Default::default()
    };
    (0..seeds)
        .into_par_iter()
        .map(|s| {
            let oracle = WorldOracle::sample_hitting(&planar(), 1.0, s).unwrap();
            let mut src = OracleSource::new(oracle, body.clone());
            let res = run(&mut src, &body, &params).unwrap();
            (res, src)
        })
        .collect()
}

fn same_set(a: &[Hyperplane], b: &[Hyperplane], tol: f64) -> bool {
    a.len() == b.len() && a.iter().all(|h| b.iter().any(|g| g.approx_eq(h, tol)))
}

fn oracle_equivalence(runs: &[(ReconstructionResult, OracleSource)], elapsed: f64) -> Outcome {
    let body = ConvexBody::unit_ball(2);
    let mut terminated = 0;
    let mut mismatched = Vec::new();
    for (i, (res, src)) in runs.iter().enumerate() {
        if res.terminated() {
            terminated += 1;
            let truth = src.oracle().hitting_subset(&body).unwrap();
            if !same_set(&truth, &res.chi, 1e-6) {
                mismatched.push(i);
            }
        }
    }
    let rate = terminated as f64 / runs.len() as f64;
    outcome(
        mismatched.is_empty() && rate >= 0.99,
        format!(
            "{} runs, termination {:.3}, chi mismatches {:?}, {:.1}s",
            runs.len(),
            rate,
            mismatched,
            elapsed
        ),
    )
}

fn detection_soundness(runs: &[(ReconstructionResult, OracleSource)]) -> Outcome {
    let stages: usize = runs.iter().map(|(r, _)| r.stages).sum();
    let mut admitted = 0;
    let mut false_admissions = 0;
    for (res, src) in runs {
        let truth: Vec<&Hyperplane> = src.oracle().hyperplanes().iter().map(|h| &h.hyperplane).collect();
        for (_, h) in &res.admissions {
            admitted += 1;
            if !truth.iter().any(|g| g.approx_eq(h, 1e-6)) {
                false_admissions += 1;
            }
        }
    }
    outcome(
        stages >= 1000 && false_admissions == 0,
        format!("{stages} stages, {admitted} admissions, {false_admissions} false"),
    )
}

fn hyperfluctuation() -> Outcome {
    let radii = vec![4.0, 8.0, 16.0, 32.0];
    let cfg = ScalingConfig::new(planar(), 2, disk(1.0), radii, 400, 31);
    let phi = variance_scaling(&cfg).unwrap();
    let mut control = cfg.clone();
    control.transform = Transform::PoissonControl {
        intensity: phi.intensity_estimate,
    };
    control.seed = 32;
    let pois = variance_scaling(&control).unwrap();
    let disjoint = phi.slope_ci.1 < pois.slope_ci.0 || pois.slope_ci.1 < phi.slope_ci.0;
    let pass = (phi.fit.slope - 3.0).abs() <= 0.3 && (pois.fit.slope - 2.0).abs() <= 0.2 && disjoint;
    outcome(
        pass,
        format!(
            "slope {:.3} ci ({:.3}, {:.3}); control slope {:.3} ci ({:.3}, {:.3}) at intensity {:.4}",
            phi.fit.slope, phi.slope_ci.0, phi.slope_ci.1, pois.fit.slope, pois.slope_ci.0, pois.slope_ci.1, phi.intensity_estimate
        ),
    )
}

fn pair_correlation_decay() -> Outcome {
    let mut cfg = PairCorrelationConfig {
        model: planar(),
        window_radius: 20.0,
        r_max: 20.0,
        bin_width: 1.0,
        reps: 1600,
        seed: 41,
        fit_range: (5.0, 20.0),
        poisson_control: None,
    };
    let phi = pair_correlation(&cfg).unwrap();
    let exponent = phi.decay.as_ref().map(|f| f.slope);
    cfg.poisson_control = Some(phi.intensity_estimate);
    cfg.seed = 42;
    let pois = pair_correlation(&cfg).unwrap();
    let uncovered: Vec<f64> = pois.bins.iter().filter(|b| !(b.ci.0 <= 1.0 && 1.0 <= b.ci.1)).map(|b| b.lo).collect();
    let pass = exponent.is_some_and(|e| (e + 1.0).abs() <= 0.3) && uncovered.is_empty();
    outcome(
        pass,
        format!(
            "decay exponent {:?} ({} bins dropped); control bins with 1 outside 99% CI: {:?} of {}",
            exponent.map(|e| (e * 1000.0).round() / 1000.0),
            phi.decay_bins_dropped,
            uncovered,
            pois.bins.len()
        ),
    )
}

fn stopping_tail_check() -> Outcome {
    let cfg = TailConfig {
        model: planar(),
        body: disk(1.0),
        reps: 1000,
        params: ReconstructionParams::default(),
        seed: 51,
    };
    let rep = stopping_tail(&cfg).unwrap();
    let r2 = rep.fit.as_ref().map_or(f64::NAN, |f| f.r_squared);
    let rate = rep.rate.unwrap_or(f64::NAN);
    let pass = r2 >= 0.9 && rate > 0.0 && rep.truncation_fraction() < 0.01;
    outcome(
        pass,
        format!(
            "R^2 {:.4}, rate {:.4}, median {:.3}, truncated {}/{}",
            r2, rate, rep.median, rep.truncated, rep.reps
        ),
    )
}

fn cox_identity() -> Outcome {
    let window = ConvexBody::ball(vec![0.0, 0.0], 5.0).unwrap();
    let c = cox_variance_identity(&planar(), 2, &window, 10_000, 61).unwrap();
    outcome(
        c.relative_error <= 0.05,
        format!("lhs {:.3}, rhs {:.3}, relative error {:.4}", c.lhs, c.rhs, c.relative_error),
    )
}

fn thinning_identity() -> Outcome {
    let window = ConvexBody::ball(vec![0.0, 0.0], 5.0).unwrap();
    let c = thinning_variance_identity(&planar(), &window, 0.5, 10_000, 71).unwrap();
    let mut cfg = ScalingConfig::new(planar(), 2, disk(1.0), vec![4.0, 8.0, 16.0, 32.0], 400, 72);
    cfg.transform = Transform::Thin { p: 0.5 };
    let thinned = variance_scaling(&cfg).unwrap();
    let pass = c.relative_error <= 0.05 && (thinned.fit.slope - 3.0).abs() <= 0.3;
    outcome(
        pass,
        format!(
            "lhs {:.3}, rhs {:.3}, relative error {:.4}; thinned slope {:.3}",
            c.lhs, c.rhs, c.relative_error, thinned.fit.slope
        ),
    )
}

fn sampler_law() -> Outcome {
    let counts: Vec<f64> = (0..10_000u64)
        .into_par_iter()
        .map(|s| WorldOracle::sample_hitting(&planar(), 10.0, s).unwrap().hyperplanes().len() as f64)
        .collect();
    let s = Summary::of(&counts);
    let target = 20.0;
    let zm = (s.mean - target) / s.se_mean;
    let zv = (s.variance - target) / s.se_variance;
    outcome(
        zm.abs() <= 3.0 && zv.abs() <= 3.0,
        format!("mean {:.4} (z {:.2}), variance {:.4} (z {:.2})", s.mean, zm, s.variance, zv),
    )
}

fn counterexample_guard() -> Outcome {
    let model = DirectionalModel::atoms(
        3,
        1.0,
        vec![(vec![1.0, 0.0, 0.0], 1.0), (vec![0.0, 1.0, 0.0], 1.0), (vec![0.0, 0.0, 1.0], 1.0)],
    )
    .unwrap();
    let mut eta = Vec::new();
    for k in 0..3 {
        for s in [0.0, 1.0] {
            let mut u = vec![0.0; 3];
            u[k] = 1.0;
            eta.push(Hyperplane::new(u, s).unwrap());
        }
    }
    let vertices: Vec<Point> = (0..8).map(|b| (0..3).map(|k| ((b >> k) & 1) as f64).collect()).collect();
    let cuboid = vec![
        vec![0.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 1.0],
        vec![1.0, 1.0, 1.0],
    ];
    let diagonal = hyperplane_through_points(&cuboid[..3], 1e-9).unwrap();
    let expected = Hyperplane::new(vec![0.0, 1.0, -1.0], 0.0).unwrap();
    let gp = in_general_hyperplane_position(&cuboid, 1e-9).unwrap();
    let absent = !eta.iter().any(|h| h.approx_eq(&diagonal, 1e-6));
    let Directions::Atoms { atoms } = &model.directions else {
        unreachable!()
    };
    let allowed = eta.iter().all(|h| atoms.iter().any(|(u, _)| u.as_slice() == h.normal()));

    let far = ConvexBody::ball(vec![10.0, 10.0, -10.0], 1.0).unwrap();
    let centred = ConvexBody::ball(vec![0.5, 0.5, 0.5], 0.1).unwrap();
    let loose = ReconstructionParams {
        min_points: Some(4),
        ..Default::default()
    };
    let strict = ReconstructionParams::default();
    let has = |hs: &[Hyperplane]| hs.iter().any(|h| h.approx_eq(&diagonal, 1e-6));
    let loose_admits = has(&detect_hyperplanes(&vertices, &far, &loose).unwrap())
        && has(&recover_hitting(&vertices, &centred, &loose).unwrap());
    let strict_detect = has(&detect_hyperplanes(&vertices, &far, &strict).unwrap())
        || has(&recover_hitting(&vertices, &centred, &strict).unwrap());
    let mut src = VecSource::new(vertices.clone(), &centred);
    let res = run(&mut src, &centred, &strict).unwrap();
    let admissions: Vec<Hyperplane> = res.admissions.iter().map(|(_, h)| h.clone()).collect();
    let strict_run = has(&admissions) || has(&res.chi);
    let pass = diagonal.approx_eq(&expected, 1e-12) && gp && absent && allowed && loose_admits && !strict_detect && !strict_run;
    outcome(
        pass,
        format!(
            "general position {gp}, absent from eta {absent}, 4-point detector admits {loose_admits}, 5-point detector admits {}",
            strict_detect || strict_run
        ),
    )
}

fn solve2(a: &Hyperplane, b: &Hyperplane) -> Option<Point> {
    let (p, q) = (a.normal(), b.normal());
    let det = p[0] * q[1] - p[1] * q[0];
    (det.abs() > SINGULAR_DET).then(|| {
        vec![
            (a.offset() * q[1] - p[1] * b.offset()) / det,
            (p[0] * b.offset() - a.offset() * q[0]) / det,
        ]
    })
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn solve3(a: &Hyperplane, b: &Hyperplane, c: &Hyperplane) -> Option<Point> {
    let (p, q, r) = (a.normal(), b.normal(), c.normal());
    let qr = cross(q, r);
    let det: f64 = p.iter().zip(&qr).map(|(x, y)| x * y).sum();
    if det.abs() <= SINGULAR_DET {
        return None;
    }
    let rp = cross(r, p);
    let pq = cross(p, q);
    Some((0..3).map(|k| (a.offset() * qr[k] + b.offset() * rp[k] + c.offset() * pq[k]) / det).collect())
}

fn random_hyperplanes(rng: &mut impl Rng, d: usize, n: usize, reach: f64) -> Vec<Hyperplane> {
    (0..n)
        .map(|_| loop {
            let u: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            if let Ok(h) = Hyperplane::new(u, rng.random_range(-reach..reach)) {
                break h;
            }
        })
        .collect()
}

fn brute_points(hs: &[Hyperplane], window: &ConvexBody) -> Vec<(Vec<usize>, Point)> {
    let d = window.dim();
    (0..hs.len())
        .combinations(d)
        .filter_map(|idx| {
            let x = if d == 2 {
                solve2(&hs[idx[0]], &hs[idx[1]])
            } else {
                solve3(&hs[idx[0]], &hs[idx[1]], &hs[idx[2]])
            }?;
            window.contains(&x).then_some((idx, x))
        })
        .collect()
}

fn points_agree(hs: &[Hyperplane], window: &ConvexBody) -> bool {
    let fast = intersection_points(hs, window).points;
    let slow = brute_points(hs, window);
    fast.len() == slow.len()
        && fast.iter().zip(&slow).all(|(p, (idx, x))| {
            p.parents == *idx && p.x.iter().zip(x).all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + b.abs()))
        })
}

fn brute_hitting(points: &[Point], body: &ConvexBody) -> Vec<Hyperplane> {
    let d = body.dim();
    let mut out: Vec<Hyperplane> = Vec::new();
    for idx in (0..points.len()).combinations(2 * d - 1) {
        let pts: Vec<&[f64]> = idx.iter().map(|&i| points[i].as_slice()).collect();
        if !in_general_hyperplane_position(&pts, 1e-9).unwrap() {
            continue;
        }
        let h = hyperplane_through_points(&pts[..d], 1e-9).unwrap();
        if body.hits(&h, 0.0) && !out.iter().any(|g| g.approx_eq(&h, 1e-7)) {
            out.push(h);
        }
    }
    out
}

fn brute_vertices(hs: &[Halfspace]) -> Vec<Point> {
    let d = hs[0].dim();
    let planes: Vec<Hyperplane> = hs.iter().map(|h| h.boundary().unwrap()).collect();
    let mut out: Vec<Point> = Vec::new();
    for idx in (0..hs.len()).combinations(d) {
        let x = if d == 2 {
            solve2(&planes[idx[0]], &planes[idx[1]])
        } else {
            solve3(&planes[idx[0]], &planes[idx[1]], &planes[idx[2]])
        };
        let Some(x) = x else { continue };
        if hs.iter().all(|h| h.excess(&x) <= 1e-9) && !out.iter().any(|y| dist(y, &x) <= 1e-7) {
            out.push(x);
        }
    }
    out
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn random_polytope(rng: &mut impl Rng, d: usize, n: usize) -> Vec<Halfspace> {
    // A simplex around the origin keeps the intersection bounded.
    let mut hs: Vec<Halfspace> = if d == 2 {
        vec![
            Halfspace::new(vec![1.0, 1.0], 3.0),
            Halfspace::new(vec![-1.0, 0.2], 3.0),
            Halfspace::new(vec![0.3, -1.0], 3.0),
        ]
    } else {
        vec![
            Halfspace::new(vec![1.0, 1.0, 1.0], 3.0),
            Halfspace::new(vec![-1.0, 0.1, 0.2], 3.0),
            Halfspace::new(vec![0.2, -1.0, 0.1], 3.0),
            Halfspace::new(vec![0.1, 0.2, -1.0], 3.0),
        ]
    };
    while hs.len() < n {
        let u: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        hs.push(Halfspace::new(u, rng.random_range(0.2..2.0)));
    }
    hs
}

fn brute_force_equivalences() -> Outcome {
    let mut rng = seed::stream(101, 0);
    let mut failures = Vec::new();

    let mut point_cases = 0;
    for case in 0..200 {
        let d = if case % 4 == 3 { 3 } else { 2 };
        let n = rng.random_range(d..=25);
        let hs = random_hyperplanes(&mut rng, d, n, 3.0);
        let window = if case % 2 == 0 {
            ConvexBody::ball(vec![0.3; d], 2.5).unwrap()
        } else {
            ConvexBody::cuboid(vec![-2.0; d], vec![2.2; d]).unwrap()
        };
        point_cases += 1;
        if !points_agree(&hs, &window) {
            failures.push(format!("points#{case}"));
        }
    }

    let mut hitting_cases = 0;
    for case in 0..200u64 {
        let d = if case % 5 == 4 { 3 } else { 2 };
        let body = ConvexBody::unit_ball(d);
        let oracle = WorldOracle::sample_hitting(&DirectionalModel::isotropic(d, 1.0).unwrap(), 2.5, 1000 + case).unwrap();
        let hs: Vec<Hyperplane> = oracle.hyperplanes().iter().map(|h| h.hyperplane.clone()).collect();
        let limit = if d == 2 { 40 } else { 18 };
        let mut pts: Vec<Point> = intersection_points(&hs, &ConvexBody::ball(vec![0.0; d], 4.0).unwrap())
            .points
            .into_iter()
            .map(|p| p.x)
            .collect();
        pts.truncate(limit);
        hitting_cases += 1;
        let fast = recover_hitting(&pts, &body, &ReconstructionParams::default()).unwrap();
        if !same_set(&fast, &brute_hitting(&pts, &body), 1e-6) {
            failures.push(format!("hitting#{case}"));
        }
    }

    let mut polytope_cases = 0;
    for case in 0..200 {
        let d = if case % 2 == 0 { 2 } else { 3 };
        let n = rng.random_range(d + 1..=12);
        let hs = random_polytope(&mut rng, d, n);
        let poly = halfspace_polytope(&hs, 1e-9).unwrap();
        let slow = brute_vertices(&hs);
        polytope_cases += 1;
        let ok = poly.bounded
            && poly.vertices.len() == slow.len()
            && poly.vertices.iter().all(|v| slow.iter().any(|w| dist(v, w) <= 1e-7));
        if !ok {
            failures.push(format!("polytope#{case}"));
        }
    }

    outcome(
        failures.is_empty(),
        format!(
            "{point_cases} point sets, {hitting_cases} hitting sets, {polytope_cases} polytopes; failures {:?}",
            failures
        ),
    )
}

fn main() {
    let start = Instant::now();
    let t0 = Instant::now();
    let runs = oracle_runs(200);
    let equivalence_time = t0.elapsed().as_secs_f64();

    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("oracle reconstruction equivalence", oracle_equivalence(&runs, equivalence_time)));
    results.push(("detection soundness", detection_soundness(&runs)));
    drop(runs);
    results.push(("hyperfluctuation exponent", hyperfluctuation()));
    results.push(("pair correlation decay", pair_correlation_decay()));
    results.push(("exponential stopping tail", stopping_tail_check()));
    results.push(("cox variance identity", cox_identity()));
    results.push(("thinning variance identity", thinning_identity()));
    results.push(("sampler law", sampler_law()));
    results.push(("counterexample guard", counterexample_guard()));
    results.push(("brute-force equivalences", brute_force_equivalences()));

    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!("{} criterion {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
