//! Experiment configuration files.
//!
//! A config file is TOML-style `key = value` text with sections:
//!
//! ```toml
//! [scenario]
//! n_tracks = 30
//! regime = "steady"
//! model = "h1"
//! distances = ["maha", "asso-ll"]
//! dt = 0.1
//! measurement_noise_range = [0.1, 1.0]
//! seed = 42
//!
//! [run]
//! batches = 10
//! per_batch = 10000
//! ```
//!
//! Every key is optional; command-line flags override file values.

use std::path::Path;

use assoc_core::{CovarianceRegime, DistanceKind, ModelPolicy, ScenarioConfig};
use serde::Deserialize;

use crate::error::{CliError, Result};

pub const SEED_ENV: &str = "ASSOC_BENCH_SEED";

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub n_tracks: Option<usize>,
    pub regime: Option<String>,
    pub model: Option<String>,
    pub distances: Option<Vec<String>>,
    pub dt: Option<f64>,
    pub state_volume: Option<[[f64; 2]; 4]>,
    pub process_noise_range: Option<[f64; 2]>,
    pub measurement_noise_range: Option<[f64; 2]>,
    pub position_variance_range: Option<[f64; 2]>,
    pub velocity_variance_range: Option<[f64; 2]>,
    pub detection_probability: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub batches: Option<usize>,
    pub per_batch: Option<usize>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::config(format!("config file: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    /// Applies the `[scenario]` section on top of `cfg`.
    pub fn apply(&self, cfg: &mut ScenarioConfig) -> Result<()> {
        let s = &self.scenario;
        let pair = |p: [f64; 2]| (p[0], p[1]);
        if let Some(n) = s.n_tracks {
            cfg.n_tracks = n;
        }
        if let Some(r) = &s.regime {
            cfg.regime = parse_field("regime", r)?;
        }
        if let Some(m) = &s.model {
            cfg.model_policy = parse_field("model", m)?;
        }
        if let Some(d) = &s.distances {
            cfg.distances = d.iter().map(|x| parse_field("distances", x)).collect::<Result<_>>()?;
        }
        if let Some(dt) = s.dt {
            cfg.dt = dt;
        }
        if let Some(v) = s.state_volume {
            cfg.state_volume = v.map(pair);
        }
        if let Some(r) = s.process_noise_range {
            cfg.process_noise_range = pair(r);
        }
        if let Some(r) = s.measurement_noise_range {
            cfg.measurement_noise_range = pair(r);
        }
        if let Some(r) = s.position_variance_range {
            cfg.position_variance_range = pair(r);
        }
        if let Some(r) = s.velocity_variance_range {
            cfg.velocity_variance_range = pair(r);
        }
        if let Some(pd) = s.detection_probability {
            cfg.detection_probability = pd;
        }
        Ok(())
    }
}

pub fn parse_field<T: std::str::FromStr>(field: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::config(format!("field `{field}`: {e}")))
}

pub fn parse_distances(list: &str) -> Result<Vec<DistanceKind>> {
    let kinds: Vec<DistanceKind> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_field("distance", s))
        .collect::<Result<_>>()?;
    if kinds.is_empty() {
        return Err(CliError::config("field `distance`: empty list"));
    }
    Ok(kinds)
}

/// Seed precedence: flag, config file, environment variable, then 0.
pub fn resolve_seed(flag: Option<u64>, file: &FileConfig) -> Result<u64> {
    if let Some(seed) = flag.or(file.scenario.seed) {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(value) => parse_field(SEED_ENV, value.trim()),
        Err(_) => Ok(0),
    }
}

pub fn regime_from(s: &str) -> Result<CovarianceRegime> {
    parse_field("regime", s)
}

pub fn model_from(s: &str) -> Result<ModelPolicy> {
    parse_field("model", s)
}
