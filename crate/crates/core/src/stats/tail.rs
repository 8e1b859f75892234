//! Empirical tail of the stopping radius `R(Z)` of the reconstruction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_line, quantile_sorted, LineFit};
use crate::error::{Error, Result};
use crate::geometry::{BodySpec, ConvexBody};
use crate::intersection::OracleSource;
use crate::process::{DirectionalModel, WorldOracle};
use crate::reconstruct::{run, ReconstructionParams, ReconstructionResult};
use crate::report::Provenance;
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailConfig {
    pub model: DirectionalModel,
    pub body: BodySpec,
    pub reps: usize,
    pub params: ReconstructionParams,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    /// Sorted stopping radii of the terminating runs.
    pub radii: Vec<f64>,
    /// `(x, P(R > x))` at the sample points, plus `(0, 1)` first.
    pub survival: Vec<(f64, f64)>,
    /// Fit of `log P(R > x)` against `x` above the median.
    pub fit: Option<LineFit>,
    /// `-slope` of the fit.
    pub rate: Option<f64>,
    pub median: f64,
    pub truncated: usize,
    pub reps: usize,
    pub provenance: Provenance,
}

impl TailReport {
    pub fn truncation_fraction(&self) -> f64 {
        self.truncated as f64 / self.reps as f64
    }

    pub fn table_csv(&self) -> String {
        let header = vec!["radius".to_string(), "survival".to_string()];
        let rows: Vec<Vec<f64>> = self.survival.iter().map(|(x, s)| vec![*x, *s]).collect();
        crate::report::csv_table(&header, &rows)
    }
}

/// One reconstruction run for replication seed `rep_seed`.
pub fn reconstruct_seed(
    model: &DirectionalModel,
    body: &ConvexBody,
    params: &ReconstructionParams,
    rep_seed: u64,
) -> Result<(ReconstructionResult, OracleSource)> {
    let oracle = WorldOracle::sample_hitting(model, body.outradius().max(1e-9), rep_seed)?;
    let mut source = OracleSource::new(oracle, body.clone());
    let result = run(&mut source, body, params)?;
    Ok((result, source))
}

pub fn stopping_tail(cfg: &TailConfig) -> Result<TailReport> {
    if cfg.reps < 2 {
        return Err(Error::InvalidParams("need at least two replications".into()));
    }
    let body = cfg.body.build()?;
    let outcomes = (0..cfg.reps)
        .into_par_iter()
        .map(|i| {
            let (res, _) = reconstruct_seed(&cfg.model, &body, &cfg.params, seed::derive(cfg.seed, &[i as u64]))?;
            Ok(res.stopping_radius)
        })
        .collect::<Result<Vec<Option<f64>>>>()?;
    let truncated = outcomes.iter().filter(|r| r.is_none()).count();
    let mut radii: Vec<f64> = outcomes.into_iter().flatten().collect();
    radii.sort_by(f64::total_cmp);
    let n = cfg.reps as f64;
    // Truncated runs count as exceeding every observed radius.
    let mut survival = vec![(0.0, 1.0)];
    survival.extend(radii.iter().enumerate().map(|(i, &x)| (x, (cfg.reps - i - 1) as f64 / n)));
    let median = quantile_sorted(&radii, 0.5);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &(x, s) in &survival[1..] {
        if x > median && s > 0.0 {
            xs.push(x);
            ys.push(s.ln());
        }
    }
    let fit = (xs.len() >= 3).then(|| fit_line(&xs, &ys));
    let rate = fit.as_ref().map(|f| -f.slope);
    Ok(TailReport {
        radii,
        survival,
        fit,
        rate,
        median,
        truncated,
        reps: cfg.reps,
        provenance: Provenance::new(cfg, cfg.seed)?,
    })
}
