use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hamsys::solver::GridSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    GroundState,
    CheckLemmas,
    Sobolev,
    MpLevel,
    Rayleigh,
    SolveBall,
    Sweep,
    Classify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::GroundState => "ground-state",
            Command::CheckLemmas => "check-lemmas",
            Command::Sobolev => "sobolev",
            Command::MpLevel => "mp-level",
            Command::Rayleigh => "rayleigh",
            Command::SolveBall => "solve-ball",
            Command::Sweep => "sweep",
            Command::Classify => "classify",
        }
    }

    fn default_samples(self) -> usize {
        match self {
            Command::Rayleigh => 400,
            _ => 10_000,
        }
    }
}

/// Everything that determines a result; its canonical JSON keys the cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub command: Command,
    #[serde(rename = "N")]
    pub n: u32,
    pub p: f64,
    /// Derived from the hyperbola when absent.
    pub q: Option<f64>,
    pub r: f64,
    pub s: f64,
    pub lambda: f64,
    pub mu: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub rho: f64,
    /// Cutoff radii as fractions of `rho`.
    pub deltas: Vec<f64>,
    pub tol: f64,
    /// Inequality sample count, or mesh intervals for `rayleigh`.
    pub samples: usize,
    pub grid: Option<GridSpec<f64>>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub settings: Settings,
    pub out: PathBuf,
    pub cache: bool,
}

impl RunConfig {
    /// SHA-256 of the crate version and the canonical settings JSON.
    pub fn cache_key(&self) -> String {
        let canonical = serde_json::to_string(&self.settings).expect("settings serialize");
        let mut h = Sha256::new();
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.update([0]);
        h.update(canonical.as_bytes());
        hex::encode(h.finalize())
    }
}

/// Values supplied by flags or a config file; unset fields fall through.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<u32>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub r: Option<f64>,
    pub s: Option<f64>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub radius: Option<f64>,
    pub rho: Option<f64>,
    pub deltas: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub grid: Option<GridSpec<f64>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub no_cache: Option<bool>,
}

impl Overrides {
    /// `self` wins over `below`.
    pub fn over(self, below: Overrides) -> Overrides {
        Overrides {
            n: self.n.or(below.n),
            p: self.p.or(below.p),
            q: self.q.or(below.q),
            r: self.r.or(below.r),
            s: self.s.or(below.s),
            lambda: self.lambda.or(below.lambda),
            mu: self.mu.or(below.mu),
            radius: self.radius.or(below.radius),
            rho: self.rho.or(below.rho),
            deltas: self.deltas.or(below.deltas),
            tol: self.tol.or(below.tol),
            samples: self.samples.or(below.samples),
            grid: self.grid.or(below.grid),
            seed: self.seed.or(below.seed),
            out: self.out.or(below.out),
            no_cache: self.no_cache.or(below.no_cache),
        }
    }

    pub fn resolve(self, command: Command) -> Result<RunConfig, CliError> {
        let radius = self.radius.unwrap_or(1.0);
        let settings = Settings {
            command,
            n: self.n.unwrap_or(3),
            p: self.p.unwrap_or(5.0),
            q: self.q,
            r: self.r.unwrap_or(1.0),
            s: self.s.unwrap_or(1.0),
            lambda: self.lambda.unwrap_or(1.0),
            mu: self.mu.unwrap_or(1.0),
            radius,
            rho: self.rho.unwrap_or(0.5 * radius),
            deltas: self.deltas.unwrap_or_else(|| vec![0.1, 0.05, 0.02]),
            tol: self.tol.unwrap_or(1e-10),
            samples: self.samples.unwrap_or(command.default_samples()),
            grid: self.grid,
            seed: self.seed.unwrap_or(0),
        };
        let cfg = RunConfig {
            out: self.out.unwrap_or_else(|| PathBuf::from("hamsys-out").join(command.name())),
            cache: !self.no_cache.unwrap_or(false),
            settings,
        };
        check(&cfg.settings)?;
        Ok(cfg)
    }
}

fn check(s: &Settings) -> Result<(), CliError> {
    let mut v = Vec::new();
    let positive = [("R", s.radius), ("rho", s.rho), ("tol", s.tol)];
    for (name, x) in positive {
        if !(x > 0.0 && x.is_finite()) {
            v.push(format!("{name} = {x} must be positive"));
        }
    }
    if s.rho > s.radius {
        v.push(format!("rho = {} must not exceed R = {}", s.rho, s.radius));
    }
    if s.deltas.is_empty() || s.deltas.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
        v.push(format!("deltas {:?} must be fractions of rho in (0, 1)", s.deltas));
    }
    if s.samples == 0 {
        v.push("samples must be positive".into());
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(v.join("; ")))
    }
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("{key}: cannot parse '{value}'")))
}

pub fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| number(key, x))
        .collect()
}

/// `p=3,3.5,4;lambda=0.5;subcritical=0.9`; an axis with no values empties the grid.
pub fn parse_grid(text: &str) -> Result<GridSpec<f64>, CliError> {
    let mut grid = GridSpec::default();
    for part in text.split(';').map(str::trim).filter(|x| !x.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("grid: expected axis=values, got '{part}'")))?;
        let values = parse_list(key, value)?;
        let slot = match key.trim() {
            "p" => &mut grid.p,
            "r" => &mut grid.r,
            "s" => &mut grid.s,
            "lambda" => &mut grid.lambda,
            "mu" => &mut grid.mu,
            "R" => &mut grid.radius,
            "subcritical" => {
                grid.subcritical_factor = Some(number(key, value)?);
                continue;
            }
            other => return Err(CliError::Validation(format!("grid: unknown axis '{other}'"))),
        };
        *slot = Some(values);
    }
    Ok(grid)
}

fn boolean(key: &str, value: &str) -> Result<bool, CliError> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(CliError::Validation(format!("{key}: expected true or false, got '{value}'"))),
    }
}

/// Flat `key=value` lines; `#` starts a comment, keys are the flag names.
pub fn parse_config_text(text: &str) -> Result<Overrides, CliError> {
    let mut seen = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("config line {}: expected key=value", lineno + 1)))?;
        if seen.insert(key.trim().to_string(), value.trim().to_string()).is_some() {
            return Err(CliError::Validation(format!("config line {}: duplicate key '{}'", lineno + 1, key.trim())));
        }
    }
    let mut o = Overrides::default();
    for (key, value) in &seen {
        let v = value.as_str();
        match key.as_str() {
            "N" => o.n = Some(number(key, v)?),
            "p" => o.p = Some(number(key, v)?),
            "q" => o.q = Some(number(key, v)?),
            "r" => o.r = Some(number(key, v)?),
            "s" => o.s = Some(number(key, v)?),
            "lambda" => o.lambda = Some(number(key, v)?),
            "mu" => o.mu = Some(number(key, v)?),
            "R" => o.radius = Some(number(key, v)?),
            "rho" => o.rho = Some(number(key, v)?),
            "deltas" => o.deltas = Some(parse_list(key, v)?),
            "tol" => o.tol = Some(number(key, v)?),
            "samples" => o.samples = Some(number(key, v)?),
            "grid" => o.grid = Some(parse_grid(v)?),
            "seed" => o.seed = Some(number(key, v)?),
            "out" => o.out = Some(PathBuf::from(v)),
            "no-cache" => o.no_cache = Some(boolean(key, v)?),
            other => return Err(CliError::Validation(format!("config: unknown key '{other}'"))),
        }
    }
    Ok(o)
}

pub fn read_config_file(path: &Path) -> Result<Overrides, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_lossless() {
        let mut o = parse_config_text("p = 3.5\ngrid = p=3,4;lambda=0.1;subcritical=0.9\ndeltas=0.1,0.03\n").unwrap();
        o.seed = Some(7);
        let cfg = o.resolve(Command::Sweep).unwrap();
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.cache_key(), cfg.cache_key());
    }

    #[test]
    fn key_ignores_output_location() {
        let a = Overrides::default().resolve(Command::Sobolev).unwrap();
        let b = Overrides { out: Some("elsewhere".into()), no_cache: Some(true), ..Overrides::default() }
            .resolve(Command::Sobolev)
            .unwrap();
        assert_eq!(a.cache_key(), b.cache_key());
        let c = Overrides { tol: Some(1e-9), ..Overrides::default() }.resolve(Command::Sobolev).unwrap();
        assert_ne!(a.cache_key(), c.cache_key());
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file = parse_config_text("p=3\nr=0.5 # comment\n").unwrap();
        let flags = Overrides { p: Some(4.0), ..Overrides::default() };
        let s = flags.over(file).resolve(Command::Classify).unwrap().settings;
        assert_eq!((s.p, s.r, s.s), (4.0, 0.5, 1.0));
    }

    #[test]
    fn rejects_bad_files_and_grids() {
        assert!(parse_config_text("bogus=1").is_err());
        assert!(parse_config_text("p=abc").is_err());
        assert!(parse_config_text("p=1\np=2").is_err());
        assert!(parse_config_text("just text").is_err());
        assert!(parse_grid("x=1").is_err());
        assert_eq!(parse_grid("p=").unwrap().p, Some(vec![]));
        let bad = Overrides { deltas: Some(vec![1.5]), ..Overrides::default() };
        assert!(bad.resolve(Command::MpLevel).is_err());
    }
}
