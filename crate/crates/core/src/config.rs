//! Experiment configuration.
//!
//! Files are flat `key = value` lines with optional `[run]` and
//! `[parameters]` section headers; `#` starts a comment. Run keys are
//! `experiment`, `seed`, `samples`, `dt`, `confidence`, `threads` and
//! `output_dir`. Any other key at the top level or under `[parameters]` is an
//! experiment parameter and must be one the experiment declares.
//!
//! ```text
//! experiment = ex2_stable_ball
//! seed = 7
//!
//! [parameters]
//! alpha = 0.6
//! radii = 1, 3
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub samples: usize,
    pub dt: f64,
    pub confidence: f64,
    /// Size of the worker pool; `None` uses rayon's global pool.
    pub threads: Option<usize>,
    pub output_dir: PathBuf,
    pub parameters: BTreeMap<String, String>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| config_err(format!("cannot parse {key} = '{value}'")))
}

impl ExperimentConfig {
    /// Defaults of a registered experiment.
    pub fn new(experiment: &str) -> Result<Self> {
        let exp = experiments::find(experiment)?;
        Ok(Self {
            experiment: exp.name.to_string(),
            seed: DEFAULT_SEED,
            samples: exp.samples,
            dt: exp.dt,
            confidence: DEFAULT_CONFIDENCE,
            threads: None,
            output_dir: PathBuf::from("out"),
            parameters: exp.parameters.iter().map(|p| (p.0.to_string(), p.1.to_string())).collect(),
        })
    }

    /// Defaults of `experiment` overridden by the file at `path`. A file that
    /// names a different experiment is rejected.
    pub fn from_file(experiment: &str, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::new(experiment)?;
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// Applies the `key = value` lines of a config file.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                if section != "run" && section != "parameters" {
                    return Err(config_err(format!("line {}: unknown section [{section}]", lineno + 1)));
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key = value, got '{line}'", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match section.as_str() {
                "parameters" => self.set_parameter(key, value)?,
                _ => self.set(key, value)?,
            }
        }
        Ok(())
    }

    /// Sets a run key or, failing that, an experiment parameter.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => {
                if value != self.experiment {
                    return Err(config_err(format!(
                        "config names experiment '{value}' but '{}' was requested",
                        self.experiment
                    )));
                }
            }
            "seed" => self.seed = parse_num(key, value)?,
            "samples" => self.samples = parse_num(key, value)?,
            "dt" => self.dt = parse_num(key, value)?,
            "confidence" => self.confidence = parse_num(key, value)?,
            "threads" => self.threads = Some(parse_num(key, value)?),
            "output_dir" | "out" => self.output_dir = PathBuf::from(value),
            _ => self.set_parameter(key, value)?,
        }
        Ok(())
    }

    /// Parses a `key=value` override as given to `--set`.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair.split_once('=').ok_or_else(|| config_err(format!("expected key=value, got '{pair}'")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set_parameter(&mut self, key: &str, value: &str) -> Result<()> {
        match self.parameters.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => {
                let known: Vec<&str> = self.parameters.keys().map(String::as_str).collect();
                Err(config_err(format!(
                    "experiment {} has no parameter '{key}' (known: {})",
                    self.experiment,
                    known.join(", ")
                )))
            }
        }
    }

    /// Range checks on the run keys.
    pub fn validate(&self) -> Result<()> {
        experiments::find(&self.experiment)?;
        if self.samples < 2 {
            return Err(config_err(format!("samples must be at least 2, got {}", self.samples)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(config_err(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(config_err(format!("confidence must lie in (0,1), got {}", self.confidence)));
        }
        if self.threads == Some(0) {
            return Err(config_err("threads must be at least 1"));
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Result<&str> {
        self.parameters.get(key).map(String::as_str).ok_or_else(|| config_err(format!("missing parameter '{key}'")))
    }

    pub fn f64_param(&self, key: &str) -> Result<f64> {
        let v: f64 = parse_num(key, self.raw(key)?)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(config_err(format!("{key} must be finite")))
        }
    }

    pub fn usize_param(&self, key: &str) -> Result<usize> {
        parse_num(key, self.raw(key)?)
    }

    /// Comma-separated list of numbers.
    pub fn list_param(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.raw(key)?;
        let v: Vec<f64> = raw.split(',').map(|s| parse_num(key, s)).collect::<Result<_>>()?;
        if v.iter().any(|x: &f64| !x.is_finite()) {
            return Err(config_err(format!("{key} must contain finite numbers")));
        }
        if v.is_empty() {
            return Err(config_err(format!("{key} is empty")));
        }
        Ok(v)
    }

    /// Comma-separated list of at least two strictly increasing positive times.
    pub fn time_grid_param(&self, key: &str) -> Result<Vec<f64>> {
        let v = self.list_param(key)?;
        if v.len() < 2 || v[0] <= 0.0 || v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(config_err(format!("{key} must be at least two increasing positive times")));
        }
        Ok(v)
    }
}
