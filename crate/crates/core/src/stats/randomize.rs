//! Cox processes directed by `Φ_m` and independent thinnings of `Φ`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mean, variance, Summary};
use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, Point};
use crate::intersection::{phi_m_measure, IntersectionMeasureSample};
use crate::process::DirectionalModel;
use crate::seed;

use super::scaling::sample_hyperplanes;

fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as usize
}

/// A realization of the Cox process directed by the sampled measure,
/// restricted to its window.
///
/// For `m = d` every point gets an independent Poisson(1) multiplicity. For
/// `m < d` each clipped flat receives a Poisson number of points with mean
/// its measure, placed uniformly on it.
pub fn cox_sample(sample: &IntersectionMeasureSample, seed_base: u64) -> Vec<Point> {
    let mut rng = seed::rng_for(seed_base, &[0xC0C5]);
    let mut out = Vec::new();
    for (section, (_, measure)) in sample.sections.iter().zip(&sample.contributions) {
        let k = poisson(&mut rng, *measure);
        for _ in 0..k {
            if let Some(x) = section.sample(&mut rng) {
                out.push(x);
            }
        }
    }
    out
}

/// Per-draw Cox counts `Ψ(B)` for a fixed directing measure.
pub fn cox_counts(sample: &IntersectionMeasureSample, draws: usize, seed_base: u64) -> Vec<f64> {
    (0..draws)
        .map(|i| cox_sample(sample, seed::derive(seed_base, &[i as u64])).len() as f64)
        .collect()
}

/// Keeps each point independently with probability `p`.
pub fn thin(points: &[Point], p: f64, seed_base: u64) -> Result<Vec<Point>> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    if p == 1.0 {
        return Ok(points.to_vec());
    }
    let mut rng = seed::rng_for(seed_base, &[0x7417]);
    Ok(points.iter().filter(|_| rng.random::<f64>() < p).cloned().collect())
}

/// Both sides of a variance identity, estimated from common realizations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
    pub directing: Summary,
    pub randomized: Summary,
}

impl IdentityCheck {
    fn new(lhs: f64, rhs: f64, directing: &[f64], randomized: &[f64]) -> Self {
        Self {
            lhs,
            rhs,
            relative_error: (lhs - rhs).abs() / rhs.abs(),
            directing: Summary::of(directing),
            randomized: Summary::of(randomized),
        }
    }
}

fn directing_samples(
    model: &DirectionalModel,
    m: usize,
    window: &ConvexBody,
    reps: usize,
    seed_base: u64,
) -> Result<Vec<(u64, IntersectionMeasureSample)>> {
    let reach = window.outradius();
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let s = seed::derive(seed_base, &[i as u64]);
            let hs = sample_hyperplanes(model, reach, s)?;
            Ok((s, phi_m_measure(&hs, m, window)?))
        })
        .collect()
}

/// `Var Ψ_m(B)` against `γ_m vol(B) + Var Φ_m(B)`, with `γ_m vol(B)`
/// estimated by the mean of `Φ_m(B)`.
pub fn cox_variance_identity(
    model: &DirectionalModel,
    m: usize,
    window: &ConvexBody,
    reps: usize,
    seed_base: u64,
) -> Result<IdentityCheck> {
    let runs = directing_samples(model, m, window, reps, seed_base)?;
    let phi: Vec<f64> = runs.iter().map(|(_, s)| s.total).collect();
    let psi: Vec<f64> = runs.iter().map(|(s, sample)| cox_sample(sample, *s).len() as f64).collect();
    Ok(IdentityCheck::new(variance(&psi), mean(&phi) + variance(&phi), &phi, &psi))
}

/// `Var Φ_p(B)` against `p^2 Var Φ(B) + p(1-p) E Φ(B)`.
pub fn thinning_variance_identity(
    model: &DirectionalModel,
    window: &ConvexBody,
    p: f64,
    reps: usize,
    seed_base: u64,
) -> Result<IdentityCheck> {
    let runs = directing_samples(model, window.dim(), window, reps, seed_base)?;
    let phi: Vec<f64> = runs.iter().map(|(_, s)| s.total).collect();
    let kept = runs
        .iter()
        .map(|(s, sample)| {
            let pts: Vec<Point> = sample.sections.iter().filter_map(|sec| match sec {
                crate::geometry::Section::Point(x) => Some(x.clone()),
                _ => None,
            }).collect();
            Ok(thin(&pts, p, *s)?.len() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let rhs = p * p * variance(&phi) + p * (1.0 - p) * mean(&phi);
    Ok(IdentityCheck::new(variance(&kept), rhs, &phi, &kept))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BodySpec, Hyperplane};

    #[test]
    fn thinning_edge_cases() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 2.0]];
        assert_eq!(thin(&pts, 1.0, 3).unwrap(), pts);
        assert!(matches!(thin(&pts, 0.0, 3), Err(Error::InvalidProbability(_))));
        assert!(matches!(thin(&pts, 1.2, 3), Err(Error::InvalidProbability(_))));
    }

    #[test]
    fn empty_directing_measure_gives_empty_cox() {
        let w = ConvexBody::unit_ball(2);
        let s = phi_m_measure(&[], 2, &w).unwrap();
        assert!(cox_sample(&s, 1).is_empty());
    }

    #[test]
    fn cox_conditional_mean() {
        let model = DirectionalModel::isotropic(2, 1.0).unwrap();
        let w = ConvexBody::ball(vec![0.0, 0.0], 5.0).unwrap();
        let hs: Vec<Hyperplane> = sample_hyperplanes(&model, 5.0, 4).unwrap();
        let s = phi_m_measure(&hs, 2, &w).unwrap();
        let counts = cox_counts(&s, 10_000, 77);
        let sm = Summary::of(&counts);
        assert!((sm.mean - s.total).abs() <= 3.0 * sm.se_mean, "{} vs {}", sm.mean, s.total);
    }

    #[test]
    fn cox_points_lie_on_the_directing_flats() {
        let w = ConvexBody::ball(vec![0.0, 0.0], 2.0).unwrap();
        let hs = vec![Hyperplane::new(vec![0.0, 1.0], 0.5).unwrap()];
        let s = phi_m_measure(&hs, 1, &w).unwrap();
        assert_eq!(s.window, BodySpec::Ball { center: vec![0.0, 0.0], radius: 2.0 });
        let pts = cox_sample(&s, 5);
        for p in &pts {
            assert!((p[1] - 0.5).abs() < 1e-12 && w.contains(p));
        }
        let counts = cox_counts(&s, 4000, 6);
        let expect = 2.0 * (4.0f64 - 0.25).sqrt();
        let sm = Summary::of(&counts);
        assert!((sm.mean - expect).abs() <= 4.0 * sm.se_mean);
    }
}
