//! Subcommands: each builds its artifacts in memory, then writes them.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use hip_core::intersection::{points_csv, points_in_annulus};
use hip_core::process::WorldOracle;
use hip_core::report::{config_hash, csv_table, sha256_hex, write_atomic, Provenance, TOOL_VERSION};
use hip_core::seed;
use hip_core::stats::{
    clt_diagnostic, cox_variance_identity, pair_correlation, reconstruct_seed, stopping_tail, thinning_variance_identity,
    variance_scaling, CltConfig, PairCorrelationConfig, ScalingConfig, TailConfig, Transform,
};
use hip_core::Error;

use crate::config::{ConfigError, RunConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Sample the hyperplanes hitting B(0, radius).
    Simulate,
    /// Intersection points in an annulus around the body.
    Points,
    /// Recover the hyperplanes hitting the body from outside points.
    Reconstruct,
    /// Variance growth of the intersection measure under dilation.
    Scaling,
    /// Pair correlation of the intersection points.
    Paircorr,
    /// Tail of the reconstruction stopping radius.
    Tail,
    /// Cox or thinning variance identity.
    Randomize,
    /// Normality of the standardized intersection measure.
    Clt,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Points => "points",
            Command::Reconstruct => "reconstruct",
            Command::Scaling => "scaling",
            Command::Paircorr => "paircorr",
            Command::Tail => "tail",
            Command::Randomize => "randomize",
            Command::Clt => "clt",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(
                Error::InvalidParams(_)
                | Error::InvalidModel(_)
                | Error::InvalidBody(_)
                | Error::InvalidProbability(_)
                | Error::UnsupportedDimension(_)
                | Error::WindowOverflow { .. }
                | Error::DimensionMismatch { .. },
            ) => 2,
            CliError::Core(_) => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Done,
    BudgetExhausted,
}

pub struct Options {
    pub out: PathBuf,
    /// Expose ground truth (parent hyperplanes, oracle comparison).
    pub validate: bool,
}

type Artifacts = Vec<(String, Vec<u8>)>;

fn json_bytes(v: &serde_json::Value) -> Result<Vec<u8>, CliError> {
    let mut b = serde_json::to_vec_pretty(v).map_err(Error::from)?;
    b.push(b'\n');
    Ok(b)
}

fn to_value<T: serde::Serialize>(x: &T) -> Result<serde_json::Value, CliError> {
    Ok(serde_json::to_value(x).map_err(Error::from)?)
}

/// Validates the configuration and computes all artifacts of `cmd`.
pub fn build(cmd: Command, cfg: &RunConfig, opts: &Options) -> Result<(Artifacts, Status), CliError> {
    let seed = cfg.seed();
    let provenance = Provenance::new(&cfg.to_json(), seed)?;
    let mut out: Artifacts = Vec::new();
    let mut status = Status::Done;
    match cmd {
        Command::Simulate => {
            let model = cfg.model()?;
            let radius = cfg.positive("radius")?;
            let oracle = WorldOracle::sample_hitting(&model, radius, seed)?;
            out.push(("realization.csv".into(), oracle.to_csv().into_bytes()));
            let meta = json!({ "meta": to_value(&oracle.meta())?, "count": oracle.hyperplanes().len(), "provenance": to_value(&provenance)? });
            out.push(("realization.json".into(), json_bytes(&meta)?));
        }
        Command::Points => {
            let model = cfg.model()?;
            let body = cfg.body()?;
            let (lo, hi) = (cfg.f64("r_lo"), cfg.f64("r_hi"));
            let mut oracle = WorldOracle::sample_hitting(&model, body.outradius() + hi.max(1e-9), seed)?;
            let pts = points_in_annulus(&mut oracle, &body, lo, hi)?;
            out.push(("points.csv".into(), points_csv(&pts, model.dim, opts.validate).into_bytes()));
            if opts.validate {
                out.push(("realization.csv".into(), oracle.to_csv().into_bytes()));
            }
        }
        Command::Reconstruct => {
            let model = cfg.model()?;
            let body = cfg.body()?;
            let params = cfg.reconstruction()?;
            let (res, source) = reconstruct_seed(&model, &body, &params, seed)?;
            if !res.terminated() {
                status = Status::BudgetExhausted;
            }
            let mut doc = res.to_json();
            doc["provenance"] = to_value(&provenance)?;
            if opts.validate {
                let truth = source.oracle().hitting_subset(&body)?;
                let matches = res.terminated()
                    && truth.len() == res.chi.len()
                    && truth.iter().all(|h| res.chi.iter().any(|g| g.approx_eq(h, 1e-6)));
                doc["validation"] = json!({
                    "true_chi": truth.iter().map(|h| h.to_row()).collect::<Vec<_>>(),
                    "matches": matches,
                });
            }
            out.push(("result.json".into(), json_bytes(&doc)?));
            let mut header: Vec<String> = (1..=model.dim).map(|i| format!("u_{i}")).collect();
            header.push("s".into());
            let rows: Vec<Vec<f64>> = res.chi.iter().map(|h| h.to_row()).collect();
            out.push(("chi.csv".into(), csv_table(&header, &rows).into_bytes()));
        }
        Command::Scaling => {
            let model = cfg.model()?;
            let mut sc = ScalingConfig::new(model, cfg.order()?, cfg.body_spec()?, cfg.radii()?, cfg.reps(2)?, seed);
            sc.bootstrap = cfg.usize("bootstrap");
            sc.capacity = cfg.positive("capacity")?;
            sc.transform = match cfg.choice("transform") {
                "identity" => Transform::Identity,
                "thin" => Transform::Thin { p: cfg.probability()? },
                "cox" => Transform::Cox,
                _ => Transform::PoissonControl {
                    intensity: match cfg.opt_f64("poisson_intensity") {
                        Some(x) => x,
                        None => variance_scaling(&sc)?.intensity_estimate,
                    },
                },
            };
            let rep = variance_scaling(&sc)?;
            out.push(("scaling.csv".into(), rep.table_csv().into_bytes()));
            out.push(("scaling.json".into(), json_bytes(&to_value(&rep)?)?));
        }
        Command::Paircorr => {
            let pc = PairCorrelationConfig {
                model: cfg.model()?,
                window_radius: cfg.positive("window_radius")?,
                r_max: cfg.positive("r_max")?,
                bin_width: cfg.positive("bin_width")?,
                reps: cfg.reps(2)?,
                seed,
                fit_range: (cfg.f64("fit_lo"), cfg.f64("fit_hi")),
                poisson_control: None,
            };
            let rep = pair_correlation(&pc)?;
            out.push(("paircorr.csv".into(), rep.table_csv().into_bytes()));
            out.push(("paircorr.json".into(), json_bytes(&to_value(&rep)?)?));
            if cfg.bool("control") {
                let control = PairCorrelationConfig {
                    poisson_control: Some(cfg.opt_f64("poisson_intensity").unwrap_or(rep.intensity_estimate)),
                    seed: seed::derive(seed, &[1]),
                    ..pc
                };
                let c = pair_correlation(&control)?;
                out.push(("paircorr_control.csv".into(), c.table_csv().into_bytes()));
                out.push(("paircorr_control.json".into(), json_bytes(&to_value(&c)?)?));
            }
        }
        Command::Tail => {
            let tc = TailConfig {
                model: cfg.model()?,
                body: cfg.body_spec()?,
                reps: cfg.reps(2)?,
                params: cfg.reconstruction()?,
                seed,
            };
            let rep = stopping_tail(&tc)?;
            out.push(("tail.csv".into(), rep.table_csv().into_bytes()));
            out.push(("tail.json".into(), json_bytes(&to_value(&rep)?)?));
        }
        Command::Randomize => {
            let model = cfg.model()?;
            let body = cfg.body()?;
            let reps = cfg.reps(2)?;
            let check = match cfg.choice("randomization") {
                "cox" => cox_variance_identity(&model, cfg.order()?, &body, reps, seed)?,
                _ => thinning_variance_identity(&model, &body, cfg.probability()?, reps, seed)?,
            };
            let doc = json!({
                "randomization": cfg.choice("randomization"),
                "check": to_value(&check)?,
                "provenance": to_value(&provenance)?,
            });
            out.push(("randomize.json".into(), json_bytes(&doc)?));
        }
        Command::Clt => {
            let cc = CltConfig {
                model: cfg.model()?,
                m: cfg.order()?,
                window: cfg.body_spec()?,
                r: cfg.positive("r")?,
                reps: cfg.reps(3)?,
                seed,
            };
            let (rep, z, prov) = clt_diagnostic(&cc)?;
            let rows: Vec<Vec<f64>> = z.iter().map(|x| vec![*x]).collect();
            out.push(("clt.csv".into(), csv_table(&["z".to_string()], &rows).into_bytes()));
            let doc = json!({ "normality": to_value(&rep)?, "provenance": to_value(&prov)? });
            out.push(("clt.json".into(), json_bytes(&doc)?));
        }
    }
    Ok((out, status))
}

/// Writes the artifacts, the resolved configuration and the manifest.
pub fn write(dir: &Path, cmd: Command, cfg: &RunConfig, artifacts: &Artifacts, started: Instant) -> Result<(), CliError> {
    let mut listed = Vec::new();
    for (name, bytes) in artifacts {
        write_atomic(&dir.join(name), bytes)?;
        listed.push(json!({ "file": name, "sha256": sha256_hex(bytes) }));
    }
    let config_text = cfg.to_text();
    write_atomic(&dir.join("config.txt"), config_text.as_bytes())?;
    let manifest = json!({
        "command": cmd.name(),
        "config": cfg.to_json(),
        "config_hash": config_hash(&cfg.to_json())?,
        "seed": cfg.seed(),
        "version": TOOL_VERSION,
        "wall_time_s": started.elapsed().as_secs_f64(),
        "artifacts": listed,
    });
    write_atomic(&dir.join("manifest.json"), &json_bytes(&manifest)?)?;
    Ok(())
}

/// Runs `cmd` end to end.
pub fn execute(cmd: Command, cfg: &RunConfig, opts: &Options) -> Result<Status, CliError> {
    let started = Instant::now();
    let (artifacts, status) = build(cmd, cfg, opts)?;
    write(&opts.out, cmd, cfg, &artifacts, started)?;
    Ok(status)
}
