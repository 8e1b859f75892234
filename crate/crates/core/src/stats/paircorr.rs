//! Pair correlation of the intersection point process.
//!
//! Centres are the points in `B(0, R_w)`; partners come from
//! `B(0, R_w + r_max)`, so every ring around a centre lies inside the
//! sampled region and no edge correction is needed. With `P_b` the number of
//! ordered pairs at distance in bin `b` and `N` the number of points in the
//! sampled region, summed over replications,
//!
//! `ρ̂(b) = ΣP_b / (reps · vol(B_w) · ring(b) · λ̂²)`,  `λ̂ = ΣN / (reps · vol(S))`.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{covariance, fit_line, mean, variance, LineFit};
use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, Point};
use crate::intersection::intersection_points;
use crate::linalg::{norm, unit_ball_volume};
use crate::process::DirectionalModel;
use crate::report::Provenance;
use crate::seed;

use super::scaling::sample_hyperplanes;

const Z99: f64 = 2.575_829_303_548_901;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelationConfig {
    pub model: DirectionalModel,
    /// Radius of the ball holding the pair centres.
    pub window_radius: f64,
    pub r_max: f64,
    pub bin_width: f64,
    pub reps: usize,
    pub seed: u64,
    /// Range of distances used for the decay fit of `ρ̂ - 1`.
    pub fit_range: (f64, f64),
    /// Replace `Φ` by homogeneous Poisson points of this intensity.
    pub poisson_control: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairBin {
    pub lo: f64,
    pub hi: f64,
    pub rho: f64,
    pub se: f64,
    /// 99% normal interval.
    pub ci: (f64, f64),
}

impl PairBin {
    pub fn centre(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelationReport {
    pub bins: Vec<PairBin>,
    pub intensity_estimate: f64,
    /// Fit of `log(ρ̂ - 1)` against `log r` over the fit range.
    pub decay: Option<LineFit>,
    /// Bins in the fit range left out because `ρ̂ <= 1`.
    pub decay_bins_dropped: usize,
    pub warning: Option<String>,
    pub provenance: Provenance,
}

impl PairCorrelationReport {
    pub fn table_csv(&self) -> String {
        let header: Vec<String> = ["r_lo", "r_hi", "rho", "se", "ci_lo", "ci_hi"].iter().map(|s| s.to_string()).collect();
        let rows: Vec<Vec<f64>> = self.bins.iter().map(|b| vec![b.lo, b.hi, b.rho, b.se, b.ci.0, b.ci.1]).collect();
        crate::report::csv_table(&header, &rows)
    }

    /// Mean of `ρ̂` over bins whose centres lie in `[a, b]`.
    pub fn mean_rho(&self, a: f64, b: f64) -> f64 {
        let v: Vec<f64> = self.bins.iter().filter(|x| (a..=b).contains(&x.centre())).map(|x| x.rho).collect();
        mean(&v)
    }
}

fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, d: usize, radius: f64) -> Point {
    let g: Vec<f64> = loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        if norm(&g) > 1e-12 {
            break g;
        }
    };
    let n = norm(&g);
    let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
    g.iter().map(|c| c * r / n).collect()
}

/// Ordered pair counts per bin with centres in `B(0, rw)`.
fn pair_counts(points: &mut [Point], rw: f64, r_max: f64, width: f64, nbins: usize) -> Vec<f64> {
    points.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
    let mut counts = vec![0.0; nbins];
    let r2 = r_max * r_max;
    for (i, p) in points.iter().enumerate() {
        if norm(p) > rw {
            continue;
        }
        let lo = xs.partition_point(|&x| x < p[0] - r_max);
        let hi = xs.partition_point(|&x| x <= p[0] + r_max);
        for (j, q) in points[lo..hi].iter().enumerate() {
            if lo + j == i {
                continue;
            }
            let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 < r2 {
                let k = (d2.sqrt() / width) as usize;
                if k < nbins {
                    counts[k] += 1.0;
                }
            }
        }
    }
    counts
}

pub fn pair_correlation(cfg: &PairCorrelationConfig) -> Result<PairCorrelationReport> {
    let d = cfg.model.dim;
    if !(cfg.bin_width > 0.0 && cfg.r_max > 0.0 && cfg.window_radius > 0.0) {
        return Err(Error::InvalidParams("bin width, r_max and window radius must be positive".into()));
    }
    if cfg.reps < 2 {
        return Err(Error::InvalidParams("need at least two replications".into()));
    }
    let nbins = (cfg.r_max / cfg.bin_width).round() as usize;
    if nbins == 0 {
        return Err(Error::InvalidParams("bin width exceeds r_max".into()));
    }
    let r_max = nbins as f64 * cfg.bin_width;
    let rs = cfg.window_radius + r_max;
    let sampled = ConvexBody::ball(vec![0.0; d], rs)?;
    let per_rep = (0..cfg.reps)
        .into_par_iter()
        .map(|i| {
            let s = seed::derive(cfg.seed, &[i as u64]);
            let mut pts: Vec<Point> = match cfg.poisson_control {
                Some(lambda) => {
                    let mut rng = seed::rng_for(s, &[2]);
                    let n = Poisson::new(lambda * sampled.volume())
                        .map_err(|e| Error::InvalidParams(e.to_string()))?
                        .sample(&mut rng) as usize;
                    (0..n).map(|_| uniform_in_ball(&mut rng, d, rs)).collect()
                }
                None => {
                    let hs = sample_hyperplanes(&cfg.model, rs, s)?;
                    intersection_points(&hs, &sampled).points.into_iter().map(|p| p.x).collect()
                }
            };
            let n = pts.len() as f64;
            Ok((n, pair_counts(&mut pts, cfg.window_radius, r_max, cfg.bin_width, nbins)))
        })
        .collect::<Result<Vec<(f64, Vec<f64>)>>>()?;

    let ns: Vec<f64> = per_rep.iter().map(|r| r.0).collect();
    let reps = cfg.reps as f64;
    let mean_n = mean(&ns);
    let var_n = variance(&ns);
    let lambda = mean_n / sampled.volume();
    let centre_vol = unit_ball_volume(d) * cfg.window_radius.powi(d as i32);
    let bins: Vec<PairBin> = (0..nbins)
        .map(|k| {
            let lo = k as f64 * cfg.bin_width;
            let hi = lo + cfg.bin_width;
            let ring = unit_ball_volume(d) * (hi.powi(d as i32) - lo.powi(d as i32));
            let ps: Vec<f64> = per_rep.iter().map(|r| r.1[k]).collect();
            let mean_p = mean(&ps);
            let rho = mean_p / (centre_vol * ring * lambda * lambda);
            // Delta method for mean(P) / mean(N)^2.
            let rel2 = variance(&ps) / (mean_p * mean_p) + 4.0 * var_n / (mean_n * mean_n)
                - 4.0 * covariance(&ps, &ns) / (mean_p * mean_n);
            let se = if mean_p > 0.0 { rho * (rel2.max(0.0) / reps).sqrt() } else { f64::NAN };
            PairBin {
                lo,
                hi,
                rho,
                se,
                ci: (rho - Z99 * se, rho + Z99 * se),
            }
        })
        .collect();

    let mut warning = None;
    let mut decay = None;
    let mut dropped = 0;
    if !cfg.model.is_isotropic() && cfg.poisson_control.is_none() {
        let msg = "directional distribution is not isotropic: no decay law is claimed".to_string();
        log::warn!("{msg}");
        warning = Some(msg);
    } else {
        let (a, b) = cfg.fit_range;
        let mut lx = Vec::new();
        let mut ly = Vec::new();
        for bin in bins.iter().filter(|x| (a..=b).contains(&x.centre())) {
            if bin.rho > 1.0 {
                lx.push(bin.centre().ln());
                ly.push((bin.rho - 1.0).ln());
            } else {
                dropped += 1;
            }
        }
        if lx.len() >= 3 {
            decay = Some(fit_line(&lx, &ly));
        }
    }
    Ok(PairCorrelationReport {
        bins,
        intensity_estimate: lambda,
        decay,
        decay_bins_dropped: dropped,
        warning,
        provenance: Provenance::new(cfg, cfg.seed)?,
    })
}
