//! Resolved run configuration: defaults, then the `QWB_CONFIG` file, then
//! command-line flags. The full resolved configuration is embedded in every
//! run report.

use qwb_core::csp::{RngSpec, RNG_ALGORITHM_CHACHA12};
use qwb_core::error::{Error, Result};
use qwb_core::search::DetectionConfig;
use serde::Serialize;
use std::path::Path;

#[derive(Clone, Debug, Serialize)]
pub struct ResolvedConfig {
    pub seed: u64,
    pub algorithm_id: String,
    pub delta: f64,
    pub beta: f64,
    pub gamma: f64,
    pub max_dim: usize,
    pub vertex_cap: usize,
    pub format: String,
}

impl Default for ResolvedConfig {
    fn default() -> Self {
        let detection = DetectionConfig::default();
        ResolvedConfig {
            seed: 0,
            algorithm_id: RNG_ALGORITHM_CHACHA12.into(),
            delta: detection.delta,
            beta: detection.beta,
            gamma: detection.gamma,
            max_dim: detection.max_dim,
            vertex_cap: detection.vertex_cap,
            format: "json".into(),
        }
    }
}

impl ResolvedConfig {
    pub fn detection(&self) -> DetectionConfig {
        DetectionConfig {
            beta: self.beta,
            gamma: self.gamma,
            delta: self.delta,
            max_dim: self.max_dim,
            vertex_cap: self.vertex_cap,
            verify_promise: true,
        }
    }

    pub fn rng_spec(&self) -> RngSpec {
        RngSpec {
            seed: self.seed,
            algorithm_id: self.algorithm_id.clone(),
        }
    }

    /// Apply `key=value` lines from a config file.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Input(format!("cannot read config file {}: {e}", path.display()))
        })?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!(
                    "{}:{}: expected key=value, got '{raw}'",
                    path.display(),
                    lineno + 1
                ))
            })?;
            self.apply_pair(key.trim(), value.trim())
                .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        }
        Ok(())
    }

    fn apply_pair(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            value
                .parse()
                .map_err(|e| Error::Parse(format!("bad value for {key}: {e}")))
        }
        match key {
            "seed" => self.seed = parse(key, value)?,
            "algorithm_id" => self.algorithm_id = value.to_string(),
            "delta" => self.delta = parse(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "gamma" => self.gamma = parse(key, value)?,
            "max_dim" => self.max_dim = parse(key, value)?,
            "vertex_cap" => self.vertex_cap = parse(key, value)?,
            "format" => self.format = value.to_string(),
            other => return Err(Error::Parse(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Config-file rendering, as written by the calibrate command.
    pub fn to_key_values(&self) -> String {
        format!(
            "seed={}\nalgorithm_id={}\ndelta={}\nbeta={}\ngamma={}\nmax_dim={}\nvertex_cap={}\nformat={}\n",
            self.seed,
            self.algorithm_id,
            self.delta,
            self.beta,
            self.gamma,
            self.max_dim,
            self.vertex_cap,
            self.format
        )
    }
}
