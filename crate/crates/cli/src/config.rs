//! Run configuration: defaults, an optional `key = value` file, then flags.

use std::path::{Path, PathBuf};

use tilq_core::{DiscountSpec, ModelParams};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub horizon: f64,
    pub sigma: f64,
    pub rho: f64,
    pub cost_ratio: f64,
    pub lambda: f64,
    pub gamma: f64,
    /// Partition intervals `N`.
    pub intervals: usize,
    /// Quadrature sub-steps per partition cell.
    pub subgrid: usize,
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
    pub xi: f64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            horizon: 10.0,
            sigma: 0.25,
            rho: 0.15,
            cost_ratio: 0.5,
            lambda: 0.5,
            gamma: 0.3,
            intervals: 1000,
            subgrid: 8,
            paths: 100_000,
            steps: 1000,
            seed: 42,
            xi: 1.0,
            out: PathBuf::from("."),
        }
    }
}

pub const KEYS: &[&str] = &[
    "T", "sigma", "rho", "R", "lambda", "gamma", "N", "subgrid", "paths", "steps", "seed", "xi",
    "out",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("cannot parse {key} = {value:?}")))
}

impl RunConfig {
    /// Sets one field by its flag name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "T" => self.horizon = parse(key, value)?,
            "sigma" => self.sigma = parse(key, value)?,
            "rho" => self.rho = parse(key, value)?,
            "R" => self.cost_ratio = parse(key, value)?,
            "lambda" => self.lambda = parse(key, value)?,
            "gamma" => self.gamma = parse(key, value)?,
            "N" => self.intervals = parse(key, value)?,
            "subgrid" => self.subgrid = parse(key, value)?,
            "paths" => self.paths = parse(key, value)?,
            "steps" => self.steps = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "xi" => self.xi = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            _ => {
                return Err(CliError::Config(format!(
                    "unknown key {key:?} (expected one of {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies a flat `key = value` file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected key = value, got {raw:?}", n + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| CliError::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn mixture(&self) -> Result<ModelParams, CliError> {
        let d = DiscountSpec::mixture(self.lambda, self.rho, self.gamma).map_err(config)?;
        ModelParams::new(self.horizon, self.sigma, self.cost_ratio, d).map_err(config)
    }

    pub fn exponential(&self) -> Result<ModelParams, CliError> {
        let d = DiscountSpec::exponential(self.rho).map_err(config)?;
        ModelParams::new(self.horizon, self.sigma, self.cost_ratio, d).map_err(config)
    }

    /// Re-checks every invariant with a message naming the offending value.
    pub fn validate(&self) -> Result<(), CliError> {
        self.exponential()?;
        self.mixture()?;
        if self.intervals == 0 || self.subgrid == 0 {
            return Err(CliError::Config("N and subgrid must be >= 1".into()));
        }
        if self.paths < 2 || self.steps == 0 {
            return Err(CliError::Config(
                "paths must be >= 2 (for a standard error) and steps >= 1".into(),
            ));
        }
        if !self.xi.is_finite() {
            return Err(CliError::Config("xi must be finite".into()));
        }
        Ok(())
    }
}

fn config(e: tilq_core::Error) -> CliError {
    CliError::Config(e.to_string())
}
