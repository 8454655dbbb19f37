//! The TOML experiment document.
//!
//! ```toml
//! seed = 0                      # root seed, overridden by --seed
//! dataset_range = [0, 2699]     # benchmark positions measured by gen-pool
//!
//! [pool]                        # device pool for gen-pool
//! cells_per_stage = 5
//! calibration_range = [0, 2699]
//! [[pool.device]]
//! id = "tx2-trt"
//! runtime = "optimized"
//! target_mean_s = 0.03
//!
//! [experiment]                  # train, evaluate, ablate, sweep
//! test_device = "tx2-trt"
//! pooling = "runtime"
//! [experiment.train]
//! epochs = 200
//!
//! [ablate]
//! poolings = ["runtime", "combined"]
//!
//! [sweep]
//! n_values = [10, 25, 50, 100]
//! k_values = [1, 7]
//! ```
//!
//! Every key is optional except `experiment.test_device` for the commands
//! that run experiments. Unknown keys are rejected.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use edgelat::archspace::PositionRange;
use edgelat::harness::{ExperimentConfig, Pooling};
use edgelat::synthdev::PoolSpec;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dataset_range")]
    pub dataset_range: PositionRange,
    #[serde(default)]
    pub pool: Option<PoolSpec>,
    #[serde(default)]
    pub experiment: Option<ExperimentConfig>,
    #[serde(default)]
    pub ablate: AblateSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblateSection {
    #[serde(default = "default_poolings")]
    pub poolings: Vec<Pooling>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "default_n_values")]
    pub n_values: Vec<usize>,
    #[serde(default = "default_k_values")]
    pub k_values: Vec<usize>,
}

fn default_dataset_range() -> PositionRange {
    PositionRange::new(0, 2699).expect("valid range")
}

fn default_poolings() -> Vec<Pooling> {
    vec![Pooling::Runtime, Pooling::Combined]
}

fn default_n_values() -> Vec<usize> {
    vec![10, 25, 50, 100]
}

fn default_k_values() -> Vec<usize> {
    vec![1, 7]
}

impl Default for AblateSection {
    fn default() -> Self {
        AblateSection {
            poolings: default_poolings(),
        }
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            n_values: default_n_values(),
            k_values: default_k_values(),
        }
    }
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            seed: 0,
            dataset_range: default_dataset_range(),
            pool: None,
            experiment: None,
            ablate: AblateSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

/// Marks errors caused by the configuration document or flags.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

impl CliConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let value: toml::Table = text.parse().map_err(|e: toml::de::Error| config_error(e.to_string()))?;
        if value
            .get("experiment")
            .and_then(|e| e.as_table())
            .is_some_and(|e| e.contains_key("seed"))
        {
            return Err(config_error("set `seed` at the top level, not inside [experiment]"));
        }
        toml::from_str(text).map_err(|e: toml::de::Error| config_error(e.to_string()))
    }

    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            None => Ok(CliConfig::default()),
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| config_error(format!("cannot read config {}: {e}", p.display())))?;
                Self::parse(&text).with_context(|| format!("in {}", p.display()))
            }
        }
    }

    pub fn pool_spec(&self) -> PoolSpec {
        self.pool.clone().unwrap_or_default()
    }

    /// The experiment section with the root seed applied.
    pub fn experiment(&self, seed: u64) -> anyhow::Result<ExperimentConfig> {
        let Some(exp) = &self.experiment else {
            bail!(config_error("missing [experiment] section with `test_device`"));
        };
        Ok(ExperimentConfig { seed, ..exp.clone() })
    }
}
