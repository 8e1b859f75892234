//! Monte Carlo estimators built on the sampler: variance scaling, pair
//! correlation, stopping-radius tails, randomizations and normality checks.
//!
//! Replications run in parallel, each on its own derived seed; results are
//! collected in replication order and reduced with pairwise summation, so a
//! report is a pure function of its configuration.

mod clt;
mod paircorr;
mod randomize;
mod scaling;
mod tail;

pub use clt::{anderson_darling, clt_diagnostic, normality, CltConfig, NormalityReport};
pub use paircorr::{pair_correlation, PairCorrelationConfig, PairCorrelationReport, PairBin};
pub use randomize::{cox_counts, cox_sample, cox_variance_identity, thin, thinning_variance_identity, IdentityCheck};
pub use scaling::{cross_covariance, sample_hyperplanes, variance_scaling, CrossCovariance, RadiusRow, ScalingConfig, ScalingReport, Transform};
pub use tail::{reconstruct_seed, stopping_tail, TailConfig, TailReport};

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (n - 1) as f64
}

pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return f64::NAN;
    }
    let (mx, my) = (mean(xs), mean(ys));
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    pairwise_sum(&prods) / (n - 1) as f64
}

/// Mean and variance of a replication sample with standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    /// From the sample fourth central moment: `sqrt((m4 - s^4) / n)`.
    pub se_variance: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        let m = mean(xs);
        let v = variance(xs);
        let m4 = mean(&xs.iter().map(|x| (x - m).powi(4)).collect::<Vec<_>>());
        Self {
            n,
            mean: m,
            variance: v,
            se_mean: (v / n as f64).sqrt(),
            se_variance: ((m4 - v * v).max(0.0) / n as f64).sqrt(),
        }
    }
}

/// Ordinary least squares line `y = intercept + slope x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_se: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let sxx = pairwise_sum(&x.iter().map(|a| (a - mx).powi(2)).collect::<Vec<_>>());
    let sxy = pairwise_sum(&x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect::<Vec<_>>());
    let syy = pairwise_sum(&y.iter().map(|b| (b - my).powi(2)).collect::<Vec<_>>());
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = (syy - slope * sxy).max(0.0);
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_se = if n > 2.0 { (sse / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    LineFit {
        slope,
        intercept,
        r_squared,
        slope_se,
    }
}

/// Linear-interpolated quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile interval of `stat` under resampling with replacement.
pub fn bootstrap_ci<R, F>(rng: &mut R, n: usize, resamples: usize, level: f64, mut stat: F) -> (f64, f64)
where
    R: Rng + ?Sized,
    F: FnMut(&[usize]) -> f64,
{
    let mut values: Vec<f64> = (0..resamples)
        .map(|_| {
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            stat(&idx)
        })
        .filter(|v| v.is_finite())
        .collect();
    values.sort_by(f64::total_cmp);
    let a = (1.0 - level) / 2.0;
    (quantile_sorted(&values, a), quantile_sorted(&values, 1.0 - a))
}
