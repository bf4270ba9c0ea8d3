//! Run configuration: a flat `key = value` file merged with command-line
//! flags. Flags win over file entries, file entries win over defaults.
//!
//! Grammar: one `key = value` pair per line; `#` starts a comment; blank
//! lines are ignored; keys are the field names of [`RunConfig`]. Grid lists
//! are written `N:M,N:M,...`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use dschro::lattice::{ErrorMode, GridSpec, MESH_RATIO_BOUND};
use dschro::potentials::Strategy;
use dschro::solver::{BcMode, MonitorOptions, Nonlinearity, SolveOptions};
use serde::Serialize;

/// Desk-scale spatial resolutions.
pub const DESK_N: [usize; 4] = [8, 10, 12, 16];

/// Long-run grid list.
pub const LONG_GRIDS: [(usize, usize); 8] =
    [(20, 450), (25, 703), (30, 1013), (35, 1378), (40, 1800), (45, 2278), (50, 2813), (55, 3404)];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub a: f64,
    pub t: f64,
    pub example: u8,
    pub grids: Vec<(usize, usize)>,
    pub bc: BcMode,
    pub nl: Nonlinearity,
    pub strategy: Strategy,
    pub error_mode: ErrorMode,
    pub tol: f64,
    pub max_iters: usize,
    pub contraction_iters: usize,
    pub growth_threshold: f64,
    pub strict_mesh: bool,
    pub strict: bool,
    pub long_run: bool,
    pub only: String,
    pub out: PathBuf,
    pub rhs: Option<PathBuf>,
    pub workers: usize,
    /// Mesh ratio `τ/h²` for generated grids.
    pub ratio: f64,
    pub half_width: f64,
    pub horizon: f64,
    pub levels: usize,
    pub base_cells: usize,
}

impl RunConfig {
    pub fn defaults(command: &str) -> Self {
        let (half_width, horizon) = (1.0, 0.05);
        RunConfig {
            command: command.to_string(),
            a: 5.0,
            t: 2.0,
            example: 1,
            grids: Vec::new(),
            bc: BcMode::Zero,
            nl: Nonlinearity::Modulus,
            strategy: Strategy::Fast,
            error_mode: ErrorMode::Weighted,
            tol: 1e-10,
            max_iters: 20,
            contraction_iters: 60,
            growth_threshold: MonitorOptions::default().growth_threshold,
            strict_mesh: false,
            strict: false,
            long_run: false,
            only: "all".into(),
            out: PathBuf::from("out"),
            rhs: None,
            workers: 0,
            ratio: 0.9 * MESH_RATIO_BOUND,
            half_width,
            horizon,
            levels: 3,
            base_cells: 2,
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        let bad = |e: &dyn fmt::Display| ConfigError(format!("invalid value {value:?} for {key}: {e}"));
        match key {
            "a" => self.a = parse(value).map_err(|e| bad(&e))?,
            "t" => self.t = parse(value).map_err(|e| bad(&e))?,
            "example" => self.example = parse(value).map_err(|e| bad(&e))?,
            "grids" => self.grids = parse_grids(value)?,
            "bc" => self.bc = value.parse().map_err(|e| bad(&e))?,
            "nl" => self.nl = value.parse().map_err(|e| bad(&e))?,
            "strategy" => self.strategy = value.parse().map_err(|e| bad(&e))?,
            "error_mode" => self.error_mode = value.parse().map_err(|e| bad(&e))?,
            "tol" => self.tol = parse(value).map_err(|e| bad(&e))?,
            "max_iters" => self.max_iters = parse(value).map_err(|e| bad(&e))?,
            "contraction_iters" => self.contraction_iters = parse(value).map_err(|e| bad(&e))?,
            "growth_threshold" => self.growth_threshold = parse(value).map_err(|e| bad(&e))?,
            "strict_mesh" => self.strict_mesh = parse(value).map_err(|e| bad(&e))?,
            "strict" => self.strict = parse(value).map_err(|e| bad(&e))?,
            "long_run" => self.long_run = parse(value).map_err(|e| bad(&e))?,
            "only" => self.only = value.to_string(),
            "out" => self.out = PathBuf::from(value),
            "rhs" => self.rhs = if value == "none" { None } else { Some(PathBuf::from(value)) },
            "workers" => self.workers = parse(value).map_err(|e| bad(&e))?,
            "ratio" => self.ratio = parse(value).map_err(|e| bad(&e))?,
            "half_width" => self.half_width = parse(value).map_err(|e| bad(&e))?,
            "horizon" => self.horizon = parse(value).map_err(|e| bad(&e))?,
            "levels" => self.levels = parse(value).map_err(|e| bad(&e))?,
            "base_cells" => self.base_cells = parse(value).map_err(|e| bad(&e))?,
            other => return Err(ConfigError(format!("unknown configuration key {other:?}"))),
        }
        Ok(())
    }

    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key = value, got {raw:?}", no + 1)))?;
            self.set(k.trim(), v).map_err(|e| ConfigError(format!("line {}: {e}", no + 1)))?;
        }
        Ok(())
    }

    /// Fills in the grid list when none was given and checks ranges.
    pub fn resolve(&mut self) -> Result<(), ConfigError> {
        if self.grids.is_empty() {
            self.grids = if self.long_run { LONG_GRIDS.to_vec() } else { self.desk_grids()? };
        }
        if !(1..=3).contains(&self.example) {
            return Err(ConfigError(format!("example must be 1, 2 or 3, got {}", self.example)));
        }
        if !(self.tol > 0.0) || self.max_iters == 0 {
            return Err(ConfigError("tol must be positive and max_iters at least 1".into()));
        }
        if !(self.ratio > 0.0 && self.half_width > 0.0 && self.horizon > 0.0 && self.a > 0.0 && self.t > 0.0) {
            return Err(ConfigError("a, t, ratio, half_width and horizon must be positive".into()));
        }
        if self.levels == 0 || self.base_cells == 0 {
            return Err(ConfigError("levels and base_cells must be at least 1".into()));
        }
        if self.grids.iter().any(|&(n, m)| n == 0 || m == 0) {
            return Err(ConfigError("grid sizes must be positive".into()));
        }
        if self.workers == 0 {
            self.workers = rayon::current_num_threads();
        }
        Ok(())
    }

    fn desk_grids(&self) -> Result<Vec<(usize, usize)>, ConfigError> {
        DESK_N
            .iter()
            .map(|&n| {
                GridSpec::with_ratio(self.a, n, self.t, self.ratio)
                    .map(|g| (g.n, g.m))
                    .map_err(|e| ConfigError(e.to_string()))
            })
            .collect()
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            bc: self.bc,
            nonlinearity: self.nl,
            max_iters: self.max_iters,
            tol: self.tol,
            strict_mesh: self.strict_mesh,
            monitor: MonitorOptions { growth_threshold: self.growth_threshold },
            contraction_iters: self.contraction_iters,
        }
    }

    /// Every setting as `key=value`, in key order.
    pub fn entries(&self) -> Vec<String> {
        let value = serde_json::to_value(self).expect("config serializes");
        let map: BTreeMap<String, serde_json::Value> =
            serde_json::from_value(value).expect("config is a JSON object");
        map.into_iter()
            .map(|(k, v)| {
                let shown = match (&k[..], &v) {
                    ("grids", _) => format_grids(&self.grids),
                    (_, serde_json::Value::String(s)) => s.clone(),
                    (_, serde_json::Value::Null) => "none".into(),
                    _ => v.to_string(),
                };
                format!("{k}={shown}")
            })
            .collect()
    }
}

fn parse<T: FromStr>(s: &str) -> Result<T, T::Err> {
    s.parse()
}

pub fn parse_grids(s: &str) -> Result<Vec<(usize, usize)>, ConfigError> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (n, m) = p.split_once(':').ok_or_else(|| ConfigError(format!("grid {p:?} is not N:M")))?;
            let n = n.trim().parse().map_err(|_| ConfigError(format!("bad N in grid {p:?}")))?;
            let m = m.trim().parse().map_err(|_| ConfigError(format!("bad M in grid {p:?}")))?;
            Ok((n, m))
        })
        .collect()
}

pub fn format_grids(g: &[(usize, usize)]) -> String {
    g.iter().map(|(n, m)| format!("{n}:{m}")).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut c = RunConfig::defaults("example");
        c.apply_file("# desk run\nexample = 3\nbc = sampled # inline\n\ngrids = 8:85, 12:190\n").unwrap();
        c.set("bc", "zero").unwrap();
        c.resolve().unwrap();
        assert_eq!(c.example, 3);
        assert_eq!(c.bc, BcMode::Zero);
        assert_eq!(c.grids, vec![(8, 85), (12, 190)]);
    }

    #[test]
    fn desk_defaults() {
        let mut c = RunConfig::defaults("example");
        c.resolve().unwrap();
        assert_eq!(c.grids, vec![(8, 85), (10, 132), (12, 190), (16, 337)]);
        let mut l = RunConfig::defaults("example");
        l.long_run = true;
        l.resolve().unwrap();
        assert_eq!(l.grids[0], (20, 450));
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = RunConfig::defaults("verify");
        assert!(c.apply_file("nonsense").is_err());
        assert!(c.apply_file("colour = red").is_err());
        assert!(c.set("bc", "periodic").is_err());
        assert!(parse_grids("8x85").is_err());
        c.example = 7;
        assert!(c.resolve().is_err());
    }

    #[test]
    fn entries_are_sorted_and_explicit() {
        let mut c = RunConfig::defaults("solve");
        c.resolve().unwrap();
        let e = c.entries();
        assert!(e.windows(2).all(|w| w[0] < w[1]));
        assert!(e.contains(&"rhs=none".to_string()));
        assert!(e.contains(&"bc=zero".to_string()));
        assert!(e.iter().any(|l| l.starts_with("grids=8:85,")));
    }
}
