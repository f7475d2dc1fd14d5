//! Experiment configuration: TOML file, command-line overrides and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::Algorithm;
use crate::qop::{QopError, TimingParams};
use crate::rmlsa::ModulationTable;
use crate::sim::{replication_seeds, uniform_granularities, Granularity};
use crate::spectrum::{DEFAULT_GUARD_SLOTS, DEFAULT_SLOTS};
use crate::topology::NetworkGraph;

pub const DEFAULT_K: usize = 30;
pub const DEFAULT_REPLICATIONS: usize = 5;
pub const DEFAULT_REQUESTS: usize = 100_000;
pub const DEFAULT_LOAD: f64 = 150.0;
pub const DEFAULT_PREPROV_BW: f64 = 0.15;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("missing required field `{0}`")]
    Missing(&'static str),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, reason: impl fmt::Display) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            reason: reason.to_string(),
        }
    }

    /// Field the error refers to, when there is one.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Missing(f) => Some(f),
            ConfigError::Invalid { field, .. } => Some(field),
            _ => None,
        }
    }
}

/// Accepts either a scalar or a list.
fn one_or_many<'de, D, T>(d: D) -> Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    match OneOrMany::deserialize(d).map_err(|_| de::Error::custom("expected a value or a list of values"))? {
        OneOrMany::One(v) => Ok(vec![v]),
        OneOrMany::Many(v) => Ok(v),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Path to a topology JSON file, or the name of a bundled topology.
    pub topology: Option<String>,
    #[serde(alias = "algorithm", deserialize_with = "one_or_many")]
    pub algorithms: Vec<Algorithm>,
    #[serde(alias = "load", deserialize_with = "one_or_many")]
    pub loads: Vec<f64>,
    pub requests: usize,
    pub replications: usize,
    /// Base seed; replication `r` uses `seed + r` unless `seeds` is given.
    pub seed: u64,
    pub seeds: Option<Vec<u64>>,
    #[serde(deserialize_with = "one_or_many")]
    pub preprov_bw: Vec<f64>,
    pub k: usize,
    pub slots: usize,
    pub guard_slots: usize,
    pub timing: TimingParams,
    pub modulations: ModulationTable,
    pub granularities: Vec<Granularity>,
    /// Directory receiving `results.csv` and `results.json`.
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            topology: None,
            algorithms: Algorithm::ALL.to_vec(),
            loads: vec![DEFAULT_LOAD],
            requests: DEFAULT_REQUESTS,
            replications: DEFAULT_REPLICATIONS,
            seed: 1,
            seeds: None,
            preprov_bw: vec![DEFAULT_PREPROV_BW],
            k: DEFAULT_K,
            slots: DEFAULT_SLOTS,
            guard_slots: DEFAULT_GUARD_SLOTS,
            timing: TimingParams::default(),
            modulations: ModulationTable::default(),
            granularities: uniform_granularities(),
            out: PathBuf::from("results"),
        }
    }
}

/// Values given on the command line; each one replaces the file value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub topology: Option<String>,
    pub algorithms: Option<Vec<Algorithm>>,
    pub loads: Option<Vec<f64>>,
    pub requests: Option<usize>,
    pub replications: Option<usize>,
    pub seed: Option<u64>,
    pub preprov_bw: Option<Vec<f64>>,
    pub k: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Reads the optional file, applies overrides and validates.
    pub fn load(file: Option<&Path>, overrides: Overrides) -> Result<Self, ConfigError> {
        let mut cfg = match file {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(v) = o.topology {
            self.topology = Some(v);
        }
        if let Some(v) = o.algorithms {
            self.algorithms = v;
        }
        if let Some(v) = o.loads {
            self.loads = v;
        }
        if let Some(v) = o.requests {
            self.requests = v;
        }
        if let Some(v) = o.replications {
            self.replications = v;
            if self.seeds.as_ref().is_some_and(|s| s.len() != v) {
                self.seeds = None;
            }
        }
        if let Some(v) = o.seed {
            self.seed = v;
            self.seeds = None;
        }
        if let Some(v) = o.preprov_bw {
            self.preprov_bw = v;
        }
        if let Some(v) = o.k {
            self.k = v;
        }
        if let Some(v) = o.out {
            self.out = v;
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let topology = self.topology.as_deref().ok_or(ConfigError::Missing("topology"))?;
        if crate::bundled::source(topology).is_none() && !Path::new(topology).is_file() {
            return Err(ConfigError::invalid(
                "topology",
                format!("file `{topology}` does not exist"),
            ));
        }
        if self.algorithms.is_empty() {
            return Err(ConfigError::invalid("algorithms", "at least one algorithm is required"));
        }
        if self.loads.is_empty() {
            return Err(ConfigError::invalid("loads", "at least one load is required"));
        }
        if let Some(l) = self.loads.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(ConfigError::invalid("loads", format!("load {l} must be positive")));
        }
        if self.requests == 0 {
            return Err(ConfigError::invalid("requests", "must be at least 1"));
        }
        if self.replications == 0 {
            return Err(ConfigError::invalid("replications", "must be at least 1"));
        }
        if let Some(seeds) = &self.seeds {
            if seeds.len() != self.replications {
                return Err(ConfigError::invalid(
                    "seeds",
                    format!("{} seeds given for {} replications", seeds.len(), self.replications),
                ));
            }
        }
        if self.preprov_bw.is_empty() {
            return Err(ConfigError::invalid("preprov_bw", "at least one value is required"));
        }
        if let Some(bw) = self.preprov_bw.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return Err(ConfigError::invalid("preprov_bw", format!("{bw} outside [0, 1]")));
        }
        if self.k == 0 {
            return Err(ConfigError::invalid("k", "must be at least 1"));
        }
        if self.slots == 0 {
            return Err(ConfigError::invalid("slots", "must be at least 1"));
        }
        if self.guard_slots >= self.slots {
            return Err(ConfigError::invalid(
                "guard_slots",
                "must be smaller than the slot count",
            ));
        }
        self.timing.validate().map_err(|e| match e {
            QopError::Timing(name) => ConfigError::invalid(format!("timing.{name}"), "must be positive"),
            other => ConfigError::invalid("timing", other),
        })?;
        if self.granularities.is_empty()
            || self
                .granularities
                .iter()
                .any(|g| !(g.rate_gbps.is_finite() && g.rate_gbps > 0.0 && g.weight.is_finite() && g.weight > 0.0))
        {
            return Err(ConfigError::invalid(
                "granularities",
                "need at least one entry with positive rate and weight",
            ));
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.seeds
            .clone()
            .unwrap_or_else(|| replication_seeds(self.seed, self.replications))
    }

    pub fn load_topology(&self) -> Result<NetworkGraph, ConfigError> {
        let name = self.topology.as_deref().ok_or(ConfigError::Missing("topology"))?;
        let graph = match crate::bundled::load(name) {
            Some(g) => g,
            None => NetworkGraph::from_file(name),
        };
        graph.map_err(|e| ConfigError::invalid("topology", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_setup() {
        let cfg = ExperimentConfig::from_toml_str("topology = \"usanet\"").unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.k, 30);
        assert_eq!(cfg.slots, 320);
        assert_eq!(cfg.guard_slots, 2);
        assert_eq!(cfg.replications, 5);
        assert_eq!(cfg.timing.failure_detection_us, 500.0);
    }

    #[test]
    fn missing_topology_is_named() {
        let err = ExperimentConfig::default().validate().unwrap_err();
        assert_eq!(err.field(), Some("topology"));
        assert!(err.to_string().contains("topology"));
    }

    #[test]
    fn preprov_bw_out_of_range() {
        let cfg = ExperimentConfig::from_toml_str("topology = \"usanet\"\npreprov_bw = 1.5").unwrap();
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.field(), Some("preprov_bw"));
    }

    #[test]
    fn scalars_and_lists() {
        let cfg = ExperimentConfig::from_toml_str(
            "topology = \"usanet\"\nalgorithm = \"provDPP\"\nloads = [10, 20.5]\npreprov_bw = [0.0, 0.35]",
        )
        .unwrap();
        assert_eq!(cfg.algorithms, vec![Algorithm::ProvDpp]);
        assert_eq!(cfg.loads, vec![10.0, 20.5]);
        assert_eq!(cfg.preprov_bw, vec![0.0, 0.35]);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(matches!(
            ExperimentConfig::from_toml_str("topolgy = \"x\""),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn nonexistent_file_named() {
        let cfg = ExperimentConfig {
            topology: Some("/nonexistent/net.json".into()),
            ..Default::default()
        };
        assert_eq!(cfg.validate().unwrap_err().field(), Some("topology"));
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut cfg = ExperimentConfig::from_toml_str("topology = \"usanet\"\nk = 5\nseeds = [1, 2, 3, 4, 5]").unwrap();
        cfg.apply(Overrides {
            k: Some(7),
            replications: Some(2),
            ..Default::default()
        });
        assert_eq!(cfg.k, 7);
        assert_eq!(cfg.seeds(), vec![1, 2]);
    }
}
