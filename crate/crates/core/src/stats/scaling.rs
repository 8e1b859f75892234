//! Growth of `Var Φ_m(rW)` in the dilation factor `r`.

use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bootstrap_ci, covariance, fit_line, variance, LineFit, Summary};
use crate::error::{Error, Result};
use crate::geometry::{BodySpec, ConvexBody, Hyperplane};
use crate::intersection::phi_m_measure;
use crate::process::{DirectionalModel, WorldOracle};
use crate::report::Provenance;
use crate::seed;

/// Largest sampling radius accepted by default.
pub const DEFAULT_CAPACITY: f64 = 1000.0;

/// What is measured in `rW` for each replication.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    /// `Φ_m(rW)` itself.
    Identity,
    /// Points of `Φ` kept independently with probability `p`.
    Thin { p: f64 },
    /// The Cox count: Poisson with mean `Φ_m(rW)`.
    Cox,
    /// Homogeneous Poisson points of the given intensity (no hyperplanes).
    PoissonControl { intensity: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub model: DirectionalModel,
    pub m: usize,
    pub window: BodySpec,
    pub radii: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub transform: Transform,
    pub bootstrap: usize,
    pub capacity: f64,
}

impl ScalingConfig {
    pub fn new(model: DirectionalModel, m: usize, window: BodySpec, radii: Vec<f64>, reps: usize, seed: u64) -> Self {
        Self {
            model,
            m,
            window,
            radii,
            reps,
            seed,
            transform: Transform::Identity,
            bootstrap: 1000,
            capacity: DEFAULT_CAPACITY,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusRow {
    pub r: f64,
    pub summary: Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub m: usize,
    pub window: BodySpec,
    pub transform: Transform,
    pub rows: Vec<RadiusRow>,
    /// Least squares fit of `log Var` against `log r`.
    pub fit: LineFit,
    /// 95% bootstrap interval of the slope, resampling replications.
    pub slope_ci: (f64, f64),
    /// Pooled `mean / vol(rW)` over all radii.
    pub intensity_estimate: f64,
    pub samples: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl ScalingReport {
    pub fn table_csv(&self) -> String {
        let header: Vec<String> = ["r", "mean", "variance", "reps", "se_mean", "se_variance"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let rows: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|row| {
                let s = &row.summary;
                vec![row.r, s.mean, s.variance, s.n as f64, s.se_mean, s.se_variance]
            })
            .collect();
        crate::report::csv_table(&header, &rows)
    }
}

/// Hyperplanes of one realization meeting `B(0, radius)`.
pub fn sample_hyperplanes(model: &DirectionalModel, radius: f64, seed: u64) -> Result<Vec<Hyperplane>> {
    let oracle = WorldOracle::sample_hitting(model, radius, seed)?;
    Ok(oracle.hyperplanes().iter().map(|h| h.hyperplane.clone()).collect())
}

/// One replication of the configured measurement in `window`.
pub(crate) fn measure_once(
    model: &DirectionalModel,
    m: usize,
    window: &ConvexBody,
    transform: &Transform,
    rep_seed: u64,
) -> Result<f64> {
    let mut rng = seed::rng_for(rep_seed, &[1]);
    if let Transform::PoissonControl { intensity } = transform {
        let mean = intensity * window.volume();
        return Ok(if mean > 0.0 {
            Poisson::new(mean).map_err(|e| Error::InvalidParams(e.to_string()))?.sample(&mut rng)
        } else {
            0.0
        });
    }
    let reach = window.outradius().max(f64::MIN_POSITIVE);
    let hs = sample_hyperplanes(model, reach, rep_seed)?;
    let value = phi_m_measure(&hs, m, window)?.total;
    Ok(match transform {
        Transform::Identity | Transform::PoissonControl { .. } => value,
        Transform::Thin { p } => {
            if m != window.dim() {
                return Err(Error::InvalidParams("thinning applies to the point process (m = d)".into()));
            }
            Binomial::new(value as u64, *p)
                .map_err(|_| Error::InvalidProbability(*p))?
                .sample(&mut rng) as f64
        }
        Transform::Cox => {
            if value > 0.0 {
                Poisson::new(value).map_err(|e| Error::InvalidParams(e.to_string()))?.sample(&mut rng)
            } else {
                0.0
            }
        }
    })
}

fn check(cfg: &ScalingConfig, window: &ConvexBody) -> Result<()> {
    if cfg.radii.len() < 2 || cfg.radii.windows(2).any(|w| !(w[0] < w[1])) || cfg.radii[0] <= 0.0 {
        return Err(Error::InvalidParams("radii must be positive and strictly increasing (at least two)".into()));
    }
    if cfg.reps < 2 {
        return Err(Error::InvalidParams("need at least two replications".into()));
    }
    if let Transform::Thin { p } = cfg.transform {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidProbability(p));
        }
    }
    let largest = window.scaled(*cfg.radii.last().unwrap())?.outradius();
    if largest > cfg.capacity {
        return Err(Error::WindowOverflow {
            requested: largest,
            capacity: cfg.capacity,
        });
    }
    if cfg.m == 0 || cfg.m > cfg.model.dim || window.dim() != cfg.model.dim {
        return Err(Error::InvalidParams(format!(
            "order m={} and window dimension must match the model dimension {}",
            cfg.m, cfg.model.dim
        )));
    }
    Ok(())
}

/// Independent replications of `Φ_m(rW)` (or its transform) for every
/// radius, with a log-log slope of the variance.
pub fn variance_scaling(cfg: &ScalingConfig) -> Result<ScalingReport> {
    let window = cfg.window.build()?;
    check(cfg, &window)?;
    let mut samples: Vec<Vec<f64>> = Vec::with_capacity(cfg.radii.len());
    for (k, &r) in cfg.radii.iter().enumerate() {
        let w = window.scaled(r)?;
        let xs = (0..cfg.reps)
            .into_par_iter()
            .map(|i| measure_once(&cfg.model, cfg.m, &w, &cfg.transform, seed::derive(cfg.seed, &[k as u64, i as u64])))
            .collect::<Result<Vec<f64>>>()?;
        samples.push(xs);
    }
    let rows: Vec<RadiusRow> = cfg
        .radii
        .iter()
        .zip(&samples)
        .map(|(&r, xs)| RadiusRow {
            r,
            summary: Summary::of(xs),
        })
        .collect();
    let log_r: Vec<f64> = cfg.radii.iter().map(|r| r.ln()).collect();
    let log_v: Vec<f64> = rows.iter().map(|row| row.summary.variance.ln()).collect();
    let fit = fit_line(&log_r, &log_v);
    let mut rng = seed::rng_for(cfg.seed, &[u64::MAX]);
    let reps = cfg.reps;
    let slope_ci = bootstrap_ci(&mut rng, reps * samples.len(), cfg.bootstrap, 0.95, |idx| {
        // Resample within each radius using consecutive chunks of the index draw.
        let lv: Vec<f64> = samples
            .iter()
            .enumerate()
            .map(|(k, xs)| {
                let pick: Vec<f64> = idx[k * reps..(k + 1) * reps].iter().map(|&j| xs[j % reps]).collect();
                variance(&pick).ln()
            })
            .collect();
        fit_line(&log_r, &lv).slope
    });
    let mut mass = 0.0;
    let mut vol = 0.0;
    for row in &rows {
        mass += row.summary.mean;
        vol += window.scaled(row.r)?.volume();
    }
    Ok(ScalingReport {
        m: cfg.m,
        window: cfg.window.clone(),
        transform: cfg.transform.clone(),
        rows,
        fit,
        slope_ci,
        intensity_estimate: mass / vol,
        samples,
        provenance: Provenance::new(cfg, cfg.seed)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCovariance {
    pub covariance: f64,
    pub se: f64,
    pub correlation: f64,
}

/// Empirical covariance of `Φ_m(rA)` and `Φ_m(rB)` from shared realizations.
pub fn cross_covariance(
    model: &DirectionalModel,
    m: usize,
    a: &ConvexBody,
    b: &ConvexBody,
    r: f64,
    reps: usize,
    seed_base: u64,
) -> Result<CrossCovariance> {
    let (ra, rb) = (a.scaled(r)?, b.scaled(r)?);
    let reach = ra.outradius().max(rb.outradius());
    let pairs = (0..reps)
        .into_par_iter()
        .map(|i| {
            let hs = sample_hyperplanes(model, reach, seed::derive(seed_base, &[i as u64]))?;
            Ok((phi_m_measure(&hs, m, &ra)?.total, phi_m_measure(&hs, m, &rb)?.total))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let c = covariance(&xs, &ys);
    let (mx, my) = (super::mean(&xs), super::mean(&ys));
    let prods: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let se = (variance(&prods) / reps as f64).sqrt();
    Ok(CrossCovariance {
        covariance: c,
        se,
        correlation: c / (variance(&xs) * variance(&ys)).sqrt(),
    })
}
