//! Pipeline configuration: `key = value` files merged with command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use twomapper::Lens;

use crate::CliError;

pub const KEYS: &[&str] = &[
    "input",
    "header",
    "lens",
    "k",
    "g",
    "g-schedule",
    "eps-schedule",
    "base-g",
    "radius",
    "min-pts",
    "include-noise",
    "betti-dims",
    "trials",
    "seed",
    "skeleton",
    "threads",
];

pub type Raw = BTreeMap<String, String>;

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_file(path: &Path) -> Result<Raw, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Pipeline(twomapper::Error::io(path, e)))?;
    parse_text(&text, &path.display().to_string())
}

pub fn parse_text(text: &str, name: &str) -> Result<Raw, CliError> {
    let mut out = Raw::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("{name}:{}: expected key = value", i + 1)));
        };
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("{name}:{}: unknown key {key:?}", i + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    File(PathBuf),
    Torus { n: usize, major: f64, minor: f64, seed: u64 },
    Klein { n: usize, major: f64, minor: f64, seed: u64 },
}

/// An epsilon-schedule entry: absolute, or a multiple of the base
/// resolution (`2s`) or of the lens-image diameter (`4d`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eps {
    Absolute(f64),
    Resolution(f64),
    Diameter(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoverChoice {
    Single(f64),
    Overlap(Vec<f64>),
    Epsilon(Vec<Eps>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    Fixed(f64),
    Knn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub input: Input,
    pub header: bool,
    pub lens: Lens,
    pub k: usize,
    pub cover: CoverChoice,
    pub base_g: f64,
    pub radius: Radius,
    pub min_pts: usize,
    pub include_noise: bool,
    pub betti_dims: usize,
    pub trials: usize,
    pub seed: u64,
    pub skeleton: usize,
    pub threads: Option<usize>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim()
        .parse()
        .map_err(|_| usage(format!("{key}: cannot parse {v:?}")))
}

fn boolean(key: &str, v: &str) -> Result<bool, CliError> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(usage(format!("{key}: expected true or false, got {v:?}"))),
    }
}

/// A comma list, or `start:stop:step` (inclusive, values rounded to 1e-9 so
/// that `0.15:0.5:0.05` ends exactly at 0.5).
pub fn parse_schedule(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = v.split(':').collect();
    if parts.len() == 3 {
        let [a, b, step]: [f64; 3] = [num(key, parts[0])?, num(key, parts[1])?, num(key, parts[2])?];
        if step <= 0.0 || b < a {
            return Err(usage(format!("{key}: bad range {v:?}")));
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count)
            .map(|i| ((a + i as f64 * step) * 1e9).round() / 1e9)
            .collect());
    }
    v.split(',').map(|x| num(key, x)).collect()
}

fn parse_eps(v: &str) -> Result<Vec<Eps>, CliError> {
    v.split(',')
        .map(|x| {
            let x = x.trim();
            if let Some(m) = x.strip_suffix('s') {
                Ok(Eps::Resolution(num("eps-schedule", m)?))
            } else if let Some(m) = x.strip_suffix('d') {
                Ok(Eps::Diameter(num("eps-schedule", m)?))
            } else {
                Ok(Eps::Absolute(num("eps-schedule", x)?))
            }
        })
        .collect()
}

pub fn parse_lens(v: &str) -> Result<Lens, CliError> {
    if v.trim() == "identity" {
        return Ok(Lens::Identity);
    }
    Ok(Lens::Projection(
        v.split(',').map(|a| num("lens", a)).collect::<Result<_, _>>()?,
    ))
}

/// `torus:n=5000,R=2,r=1,seed=7`, `klein`, or a CSV path.
pub fn parse_input(v: &str) -> Result<Input, CliError> {
    let (shape, args) = match v.split_once(':') {
        Some((s, a)) if s == "torus" || s == "klein" => (s, a),
        _ if v == "torus" || v == "klein" => (v, ""),
        _ => return Ok(Input::File(PathBuf::from(v))),
    };
    let mut n = if shape == "torus" { 5000 } else { 10000 };
    let (mut major, mut minor, mut seed) = (2.0, 1.0, 0);
    for kv in args.split(',').filter(|s| !s.is_empty()) {
        let (k, val) = kv
            .split_once('=')
            .ok_or_else(|| usage(format!("input: expected name=value in {kv:?}")))?;
        match k {
            "n" => n = num("input n", val)?,
            "R" => major = num("input R", val)?,
            "r" => minor = num("input r", val)?,
            "seed" => seed = num("input seed", val)?,
            _ => return Err(usage(format!("input: unknown generator parameter {k:?}"))),
        }
    }
    Ok(match shape {
        "torus" => Input::Torus { n, major, minor, seed },
        _ => Input::Klein { n, major, minor, seed },
    })
}

pub fn resolve(raw: &Raw) -> Result<Config, CliError> {
    let get = |k: &str| raw.get(k).map(String::as_str);
    let input = parse_input(get("input").ok_or_else(|| usage("input is required"))?)?;
    let covers: Vec<&str> = ["g", "g-schedule", "eps-schedule"]
        .into_iter()
        .filter(|k| raw.contains_key(*k))
        .collect();
    let cover = match covers.as_slice() {
        ["g"] => CoverChoice::Single(num("g", get("g").unwrap())?),
        ["g-schedule"] => CoverChoice::Overlap(parse_schedule("g-schedule", get("g-schedule").unwrap())?),
        ["eps-schedule"] => CoverChoice::Epsilon(parse_eps(get("eps-schedule").unwrap())?),
        [] => return Err(usage("one of g, g-schedule, eps-schedule is required")),
        _ => return Err(usage(format!("give only one of g, g-schedule, eps-schedule (got {covers:?})"))),
    };
    let radius = match get("radius").unwrap_or("knn") {
        "knn" | "knn-heuristic" => Radius::Knn,
        v => Radius::Fixed(num("radius", v)?),
    };
    let skeleton = get("skeleton").map(|v| num("skeleton", v)).transpose()?.unwrap_or(2);
    if !(1..=2).contains(&skeleton) {
        return Err(usage("skeleton must be 1 or 2"));
    }
    let betti_dims = get("betti-dims").map(|v| num("betti-dims", v)).transpose()?.unwrap_or(2);
    if betti_dims > 2 {
        return Err(usage("betti-dims must be at most 2"));
    }
    Ok(Config {
        input,
        header: get("header").map(|v| boolean("header", v)).transpose()?.unwrap_or(false),
        lens: parse_lens(get("lens").unwrap_or("0,1"))?,
        k: get("k").map(|v| num("k", v)).transpose()?.unwrap_or(6),
        cover,
        base_g: get("base-g").map(|v| num("base-g", v)).transpose()?.unwrap_or(0.25),
        radius,
        min_pts: get("min-pts").map(|v| num("min-pts", v)).transpose()?.unwrap_or(2),
        include_noise: get("include-noise")
            .map(|v| boolean("include-noise", v))
            .transpose()?
            .unwrap_or(false),
        betti_dims,
        trials: get("trials").map(|v| num("trials", v)).transpose()?.unwrap_or(200),
        seed: get("seed").map(|v| num("seed", v)).transpose()?.unwrap_or(0),
        skeleton,
        threads: get("threads").map(|v| num("threads", v)).transpose()?,
    })
}

impl Config {
    /// The resolved configuration as a metadata object; `radius` is the
    /// radius actually used.
    pub fn metadata(&self, radius: f64) -> serde_json::Map<String, Value> {
        let input = match &self.input {
            Input::File(p) => json!({"file": p.display().to_string(), "header": self.header}),
            Input::Torus { n, major, minor, seed } => {
                json!({"generator": "torus", "n": n, "R": major, "r": minor, "seed": seed})
            }
            Input::Klein { n, major, minor, seed } => {
                json!({"generator": "klein", "n": n, "R": major, "r": minor, "seed": seed})
            }
        };
        let lens = match &self.lens {
            Lens::Identity => json!("identity"),
            Lens::Projection(axes) => json!(axes),
        };
        let cover = match &self.cover {
            CoverChoice::Single(g) => json!({"g": g}),
            CoverChoice::Overlap(gs) => json!({"g_schedule": gs}),
            CoverChoice::Epsilon(es) => json!({
                "base_g": self.base_g,
                "eps_schedule": es.iter().map(|e| match e {
                    Eps::Absolute(x) => x.to_string(),
                    Eps::Resolution(x) => format!("{x}s"),
                    Eps::Diameter(x) => format!("{x}d"),
                }).collect::<Vec<_>>(),
            }),
        };
        let mut m = serde_json::Map::new();
        m.insert("tool".into(), json!(concat!("twomapper ", env!("CARGO_PKG_VERSION"))));
        m.insert("input".into(), input);
        m.insert("lens".into(), lens);
        m.insert("k".into(), json!(self.k));
        m.insert("cover".into(), cover);
        m.insert("radius".into(), json!(radius));
        m.insert(
            "radius_source".into(),
            json!(match self.radius {
                Radius::Fixed(_) => "fixed",
                Radius::Knn => "knn-heuristic",
            }),
        );
        m.insert("min_pts".into(), json!(self.min_pts));
        m.insert("include_noise".into(), json!(self.include_noise));
        m.insert("seed".into(), json!(self.seed));
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(pairs: &[(&str, &str)]) -> Raw {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn schedule_ranges_end_exactly() {
        let s = parse_schedule("g", "0.15:0.5:0.05").unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(s[4], 0.35);
        assert_eq!(*s.last().unwrap(), 0.5);
        assert_eq!(parse_schedule("g", "0.3,0.4").unwrap(), vec![0.3, 0.4]);
    }

    #[test]
    fn file_syntax() {
        let r = parse_text("# experiment\ninput = torus:n=100\nmin_pts = 3  # note\n", "x").unwrap();
        assert_eq!(r["input"], "torus:n=100");
        assert_eq!(r["min-pts"], "3");
        assert!(parse_text("bogus = 1", "x").is_err());
        assert!(parse_text("no equals sign", "x").is_err());
    }

    #[test]
    fn exactly_one_cover_key() {
        assert!(resolve(&raw(&[("input", "torus")])).is_err());
        assert!(resolve(&raw(&[("input", "torus"), ("g", "0.5"), ("g-schedule", "0.1,0.2")])).is_err());
        let c = resolve(&raw(&[("input", "klein:n=50,seed=3"), ("eps-schedule", "1s,2s,4d")])).unwrap();
        assert_eq!(c.input, Input::Klein { n: 50, major: 2.0, minor: 1.0, seed: 3 });
        assert_eq!(
            c.cover,
            CoverChoice::Epsilon(vec![Eps::Resolution(1.0), Eps::Resolution(2.0), Eps::Diameter(4.0)])
        );
        assert_eq!(c.radius, Radius::Knn);
        assert_eq!(c.min_pts, 2);
    }
}
