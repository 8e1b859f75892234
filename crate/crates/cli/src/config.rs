//! `key = value` run configuration.
//!
//! Every key is listed in [`KEYS`]. A resolved configuration holds a value
//! (possibly empty, meaning "unset") for every key, so printing it with
//! [`RunConfig::to_text`] and parsing the text back is lossless.

use std::collections::BTreeMap;
use std::fmt;

use hip_core::geometry::{BodySpec, ConvexBody};
use hip_core::process::{DirectionalModel, Directions};
use hip_core::reconstruct::{CertifyMode, ReconstructionParams};

#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    Int,
    OptInt,
    Float,
    OptFloat,
    Bool,
    FloatList,
    OptFloatList,
    Choice(&'static [&'static str]),
    Atoms,
}

pub struct Key {
    pub name: &'static str,
    kind: Kind,
    pub unit: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

const fn key(name: &'static str, kind: Kind, unit: &'static str, default: &'static str, help: &'static str) -> Key {
    Key {
        name,
        kind,
        unit,
        default,
        help,
    }
}

pub const KEYS: &[Key] = &[
    key("d", Kind::Int, "-", "2", "ambient dimension"),
    key("gamma", Kind::Float, "1/length", "1", "intensity: mean number of hyperplanes hitting B(0,R) is 2*gamma*R"),
    key("directions", Kind::Choice(&["isotropic", "atoms"]), "-", "isotropic", "directional distribution"),
    key("atoms", Kind::Atoms, "-", "", "atomic directions as `u_1,..,u_d:weight; ...` (directions = atoms)"),
    key("seed", Kind::Int, "-", "0", "base seed of all random streams"),
    key("body", Kind::Choice(&["ball", "cuboid"]), "-", "ball", "shape of the convex body K"),
    key("body_center", Kind::OptFloatList, "length", "", "ball centre (default: origin)"),
    key("body_radius", Kind::Float, "length", "1", "ball radius"),
    key("body_lo", Kind::OptFloatList, "length", "", "cuboid lower corner"),
    key("body_hi", Kind::OptFloatList, "length", "", "cuboid upper corner"),
    key("radius", Kind::Float, "length", "10", "simulate: sample the hyperplanes hitting B(0, radius)"),
    key("r_lo", Kind::Float, "length", "0", "points: inner distance to K of the annulus"),
    key("r_hi", Kind::Float, "length", "10", "points: outer distance to K of the annulus"),
    key("incident_tol", Kind::Float, "relative length", "1e-9", "point-on-hyperplane tolerance"),
    key("gp_tol", Kind::Float, "relative length", "1e-9", "affine independence tolerance"),
    key("max_radius", Kind::OptFloat, "length", "", "reconstruction budget on T (default: 50 * outradius(K))"),
    key("polytope_count", Kind::OptInt, "-", "", "enclosing polytopes required (default: 2d-1)"),
    key("min_points", Kind::OptInt, "-", "", "points needed on a detected hyperplane (default: 2d-1)"),
    key("early_exit", Kind::Bool, "-", "false", "stop early when a certified polytope has empty edges"),
    key("full_recompute", Kind::Bool, "-", "false", "rescan all point subsets at every stage"),
    key("certify", Kind::Choice(&["greedy", "exhaustive"]), "-", "greedy", "polytope family search"),
    key("m", Kind::OptInt, "-", "", "intersection order, 1 <= m <= d (default: d)"),
    key("radii", Kind::FloatList, "-", "4,8,16,32", "scaling: dilation factors of the body, at least three"),
    key("reps", Kind::Int, "-", "400", "independent replications"),
    key("bootstrap", Kind::Int, "-", "1000", "scaling: bootstrap resamples for the slope interval"),
    key("transform", Kind::Choice(&["identity", "thin", "cox", "poisson"]), "-", "identity", "scaling: measured quantity"),
    key("p", Kind::Float, "probability", "0.5", "thinning retention probability"),
    key("poisson_intensity", Kind::OptFloat, "1/volume", "", "Poisson control intensity (default: estimated from the process)"),
    key("capacity", Kind::Float, "length", "1000", "scaling: largest admissible window outradius"),
    key("window_radius", Kind::Float, "length", "20", "paircorr: radius of the ball holding pair centres"),
    key("r_max", Kind::Float, "length", "20", "paircorr: largest pair distance"),
    key("bin_width", Kind::Float, "length", "1", "paircorr: distance bin width"),
    key("fit_lo", Kind::Float, "length", "5", "paircorr: lower end of the decay fit range"),
    key("fit_hi", Kind::Float, "length", "20", "paircorr: upper end of the decay fit range"),
    key("control", Kind::Bool, "-", "false", "paircorr: also run the homogeneous Poisson control"),
    key("randomization", Kind::Choice(&["cox", "thin"]), "-", "cox", "randomize: variance identity to check"),
    key("r", Kind::Float, "-", "16", "clt: dilation factor of the body"),
];

fn lookup(name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.name == name)
}

/// Help text listing every key.
pub fn keys_help() -> String {
    let mut out = String::from("Configuration keys (file lines `key = value`, or --set key=value):\n");
    for k in KEYS {
        let line = format!("  {:<18} [{}] {}", k.name, k.unit, k.help);
        if k.help.contains("(default:") {
            out.push_str(&format!("{line}\n"));
        } else {
            let default = if k.default.is_empty() { "unset" } else { k.default };
            out.push_str(&format!("{line} (default: {default})\n"));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    /// File name or `--set`.
    pub origin: String,
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: `{}`: {}", self.origin, l, self.key, self.message),
            None => write!(f, "{}: `{}`: {}", self.origin, self.key, self.message),
        }
    }
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        origin: "config".into(),
        line: None,
        key: key.into(),
        message: message.into(),
    }
}

fn parse_floats(raw: &str) -> Result<Vec<f64>, String> {
    raw.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{}` is not a number", t.trim())))
        .collect()
}

fn parse_atoms(raw: &str) -> Result<Vec<(Vec<f64>, f64)>, String> {
    raw.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|atom| {
            let (u, w) = atom
                .split_once(':')
                .ok_or_else(|| format!("atom `{}` needs the form `u_1,..,u_d:weight`", atom.trim()))?;
            let w = w.trim().parse::<f64>().map_err(|_| format!("weight `{}` is not a number", w.trim()))?;
            Ok((parse_floats(u)?, w))
        })
        .collect()
}

fn check_value(kind: Kind, raw: &str) -> Result<(), String> {
    let optional = matches!(kind, Kind::OptInt | Kind::OptFloat | Kind::OptFloatList | Kind::Atoms);
    if raw.is_empty() {
        return if optional { Ok(()) } else { Err("a value is required".into()) };
    }
    match kind {
        Kind::Int | Kind::OptInt => raw.parse::<u64>().map(|_| ()).map_err(|_| format!("`{raw}` is not a non-negative integer")),
        Kind::Float | Kind::OptFloat => match raw.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(()),
            _ => Err(format!("`{raw}` is not a finite number")),
        },
        Kind::Bool => raw.parse::<bool>().map(|_| ()).map_err(|_| format!("`{raw}` is not true or false")),
        Kind::FloatList | Kind::OptFloatList => parse_floats(raw).map(|_| ()),
        Kind::Choice(options) => {
            if options.contains(&raw) {
                Ok(())
            } else {
                Err(format!("`{raw}` is not one of {}", options.join(", ")))
            }
        }
        Kind::Atoms => parse_atoms(raw).map(|_| ()),
    }
}

/// Resolved configuration: one raw value per key.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<&'static str, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|k| (k.name, k.default.to_string())).collect(),
        }
    }
}

impl RunConfig {
    /// Sets `name` after checking that the key exists and the value parses.
    pub fn set(&mut self, name: &str, raw: &str) -> Result<(), ConfigError> {
        let k = lookup(name).ok_or_else(|| invalid(name, "unknown key (see --help for the list)"))?;
        let raw = raw.trim();
        check_value(k.kind, raw).map_err(|m| invalid(name, m))?;
        self.values.insert(k.name, raw.to_string());
        Ok(())
    }

    /// Applies the lines of a config file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |mut e: ConfigError| {
                e.origin = origin.to_string();
                e.line = Some(i + 1);
                e
            };
            let Some((name, raw)) = line.split_once('=') else {
                return Err(at(invalid(line, "expected `key = value`")));
            };
            self.set(name.trim(), raw).map_err(at)?;
        }
        Ok(())
    }

    /// Applies a `key=value` override from the command line.
    pub fn apply_override(&mut self, pair: &str) -> Result<(), ConfigError> {
        let with_origin = |mut e: ConfigError| {
            e.origin = "--set".into();
            e
        };
        let (name, raw) = pair
            .split_once('=')
            .ok_or_else(|| with_origin(invalid(pair, "expected key=value")))?;
        self.set(name.trim(), raw).map_err(with_origin)
    }

    /// Every key in table order, one `key = value` line each.
    pub fn to_text(&self) -> String {
        KEYS.iter().map(|k| format!("{} = {}\n", k.name, self.values[k.name])).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            KEYS.iter()
                .map(|k| (k.name.to_string(), serde_json::Value::String(self.values[k.name].clone())))
                .collect(),
        )
    }

    fn raw(&self, name: &str) -> &str {
        &self.values[name]
    }

    pub fn usize(&self, name: &str) -> usize {
        self.raw(name).parse().expect("validated")
    }

    pub fn u64(&self, name: &str) -> u64 {
        self.raw(name).parse().expect("validated")
    }

    pub fn f64(&self, name: &str) -> f64 {
        self.raw(name).parse().expect("validated")
    }

    pub fn opt_f64(&self, name: &str) -> Option<f64> {
        let r = self.raw(name);
        (!r.is_empty()).then(|| r.parse().expect("validated"))
    }

    pub fn opt_usize(&self, name: &str) -> Option<usize> {
        let r = self.raw(name);
        (!r.is_empty()).then(|| r.parse().expect("validated"))
    }

    pub fn bool(&self, name: &str) -> bool {
        self.raw(name).parse().expect("validated")
    }

    pub fn choice(&self, name: &str) -> &str {
        self.raw(name)
    }

    pub fn floats(&self, name: &str) -> Option<Vec<f64>> {
        let r = self.raw(name);
        (!r.is_empty()).then(|| parse_floats(r).expect("validated"))
    }

    pub fn seed(&self) -> u64 {
        self.u64("seed")
    }

    pub fn dim(&self) -> usize {
        self.usize("d")
    }

    /// Intersection order, defaulting to `d`.
    pub fn order(&self) -> Result<usize, ConfigError> {
        let m = self.opt_usize("m").unwrap_or(self.dim());
        if m == 0 || m > self.dim() {
            return Err(invalid("m", format!("must satisfy 1 <= m <= d = {}", self.dim())));
        }
        Ok(m)
    }

    pub fn model(&self) -> Result<DirectionalModel, ConfigError> {
        let d = self.dim();
        if d < 2 {
            return Err(invalid("d", "must be at least 2"));
        }
        let gamma = self.f64("gamma");
        if !(gamma > 0.0) {
            return Err(invalid("gamma", "must be positive"));
        }
        let directions = match self.choice("directions") {
            "isotropic" => Directions::Isotropic,
            _ => {
                let atoms = parse_atoms(self.raw("atoms")).expect("validated");
                if atoms.is_empty() {
                    return Err(invalid("atoms", "required when directions = atoms"));
                }
                Directions::Atoms { atoms }
            }
        };
        let key = if matches!(directions, Directions::Atoms { .. }) { "atoms" } else { "directions" };
        DirectionalModel::new(d, gamma, directions).map_err(|e| invalid(key, e.to_string()))
    }

    pub fn body_spec(&self) -> Result<BodySpec, ConfigError> {
        let d = self.dim();
        let spec = match self.choice("body") {
            "ball" => BodySpec::Ball {
                center: self.floats("body_center").unwrap_or_else(|| vec![0.0; d]),
                radius: self.f64("body_radius"),
            },
            _ => BodySpec::Cuboid {
                lo: self.floats("body_lo").ok_or_else(|| invalid("body_lo", "required when body = cuboid"))?,
                hi: self.floats("body_hi").ok_or_else(|| invalid("body_hi", "required when body = cuboid"))?,
            },
        };
        let k = spec.build().map_err(|e| invalid("body", e.to_string()))?;
        if k.dim() != d {
            return Err(invalid("body", format!("body has dimension {} but d = {d}", k.dim())));
        }
        Ok(spec)
    }

    pub fn body(&self) -> Result<ConvexBody, ConfigError> {
        self.body_spec()?.build().map_err(|e| invalid("body", e.to_string()))
    }

    pub fn reconstruction(&self) -> Result<ReconstructionParams, ConfigError> {
        for name in ["incident_tol", "gp_tol"] {
            if !(self.f64(name) > 0.0) {
                return Err(invalid(name, "must be positive"));
            }
        }
        if self.opt_f64("max_radius").is_some_and(|r| !(r > 0.0)) {
            return Err(invalid("max_radius", "must be positive"));
        }
        if self.opt_usize("polytope_count") == Some(0) {
            return Err(invalid("polytope_count", "must be at least 1"));
        }
        if self.opt_usize("min_points").is_some_and(|n| n < self.dim()) {
            return Err(invalid("min_points", "must be at least d"));
        }
        if !(2..=3).contains(&self.dim()) {
            return Err(invalid("d", "reconstruction supports d = 2 or 3"));
        }
        Ok(ReconstructionParams {
            incident_tol: self.f64("incident_tol"),
            gp_tol: self.f64("gp_tol"),
            max_radius: self.opt_f64("max_radius"),
            polytope_count: self.opt_usize("polytope_count"),
            min_points: self.opt_usize("min_points"),
            early_exit: self.bool("early_exit"),
            full_recompute: self.bool("full_recompute"),
            certify: match self.choice("certify") {
                "greedy" => CertifyMode::Greedy,
                _ => CertifyMode::Exhaustive,
            },
        })
    }

    /// Replications, at least `min`.
    pub fn reps(&self, min: usize) -> Result<usize, ConfigError> {
        let n = self.usize("reps");
        if n < min {
            return Err(invalid("reps", format!("need at least {min} replications")));
        }
        Ok(n)
    }

    pub fn probability(&self) -> Result<f64, ConfigError> {
        let p = self.f64("p");
        if !(p > 0.0 && p <= 1.0) {
            return Err(invalid("p", "must lie in (0, 1]"));
        }
        Ok(p)
    }

    pub fn positive(&self, name: &str) -> Result<f64, ConfigError> {
        let x = self.f64(name);
        if !(x > 0.0) {
            return Err(invalid(name, "must be positive"));
        }
        Ok(x)
    }

    pub fn radii(&self) -> Result<Vec<f64>, ConfigError> {
        let radii = self.floats("radii").unwrap_or_default();
        if radii.len() < 3 {
            return Err(invalid("radii", "a slope fit needs at least three radii"));
        }
        if radii[0] <= 0.0 || radii.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("radii", "must be positive and strictly increasing"));
        }
        Ok(radii)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trips() {
        let mut c = RunConfig::default();
        c.apply_text("gamma = 2.5\nradii = 1, 2,3\n# comment\n\ndirections = atoms\natoms = 1,0:1; 0,1:3\n", "f")
            .unwrap();
        let mut back = RunConfig::default();
        back.apply_text(&c.to_text(), "g").unwrap();
        assert_eq!(back, c);
        assert_eq!(c.f64("gamma"), 2.5);
        assert_eq!(c.floats("radii").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(c.model().is_ok());
    }

    #[test]
    fn diagnostics_name_line_and_key() {
        let mut c = RunConfig::default();
        let e = c.apply_text("seed = 3\ngama = 1\n", "run.cfg").unwrap_err();
        assert_eq!((e.line, e.key.as_str()), (Some(2), "gama"));
        assert!(e.to_string().starts_with("run.cfg:2:"));
        let e = c.apply_text("reps = many\n", "run.cfg").unwrap_err();
        assert_eq!(e.key, "reps");
        assert!(c.apply_override("noise").is_err());
    }

    #[test]
    fn cross_field_rules() {
        let mut c = RunConfig::default();
        c.set("radii", "4").unwrap();
        assert!(c.radii().is_err());
        c.set("body", "cuboid").unwrap();
        assert!(c.body().is_err());
        c.set("body_lo", "0,0").unwrap();
        c.set("body_hi", "1,2").unwrap();
        assert!(c.body().is_ok());
        c.set("d", "3").unwrap();
        assert!(c.body().is_err());
        c.set("m", "4").unwrap();
        assert!(c.order().is_err());
    }

    #[test]
    fn every_key_is_documented() {
        let help = keys_help();
        assert!(KEYS.iter().all(|k| help.contains(k.name) && !k.unit.is_empty()));
    }
}
