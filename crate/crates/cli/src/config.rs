//! Flat TOML run configuration. Every key is optional and mirrors a flag of
//! the same name (dashes become underscores); flags win.

use crate::parse::{parse_duration, parse_grid};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridValue {
    List(Vec<f64>),
    Num(f64),
    Text(String),
}

impl GridValue {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        match self {
            GridValue::List(v) if v.is_empty() => Err("empty grid".into()),
            GridValue::List(v) => Ok(v.clone()),
            GridValue::Num(x) => Ok(vec![*x]),
            GridValue::Text(t) => parse_grid(t),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DurationValue {
    Nanos(f64),
    Text(String),
}

impl DurationValue {
    pub fn seconds(&self) -> Result<f64, String> {
        match self {
            DurationValue::Nanos(ns) if *ns >= 0.0 => Ok(ns * 1e-9),
            DurationValue::Nanos(ns) => Err(format!("negative duration {ns}")),
            DurationValue::Text(t) => parse_duration(t),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: Option<String>,
    pub schemes: Option<Vec<String>>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub w: Option<f64>,
    pub eta: Option<f64>,
    pub etas: Option<GridValue>,
    pub channel: Option<String>,
    pub profile: Option<PathBuf>,
    pub prefix: Option<usize>,
    pub prefix_kind: Option<String>,
    pub mode: Option<String>,
    pub seeds: Option<usize>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub snr: Option<GridValue>,
    pub delay_spread: Option<DurationValue>,
    pub pdelta: Option<GridValue>,
    pub preset: Option<String>,
    pub taus: Option<GridValue>,
    pub bound: Option<bool>,
    pub per_pair: Option<bool>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    /// Reads a config file. Relative `profile`/`out` paths resolve against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.profile, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}
