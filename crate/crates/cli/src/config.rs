//! Config file schemas and loading. Files ending in `.json` are read as JSON,
//! everything else as TOML.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use steplearn_core::learner::LearningOptions;
use steplearn_core::verify::VerifyConfig;
use steplearn_core::{AlgorithmConfig, CertificateContext, CostMeasure, InstanceDistribution, Method};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub distribution: InstanceDistribution,
    pub count: usize,
}

/// One configuration to run. `eta` defaults to 0 (the GD-degenerate CG).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpec {
    pub method: Method,
    pub rho: f64,
    #[serde(default)]
    pub eta: f64,
}

impl ConfigSpec {
    pub fn to_config(self) -> AlgorithmConfig {
        match self.method {
            Method::Gd => AlgorithmConfig::gd(self.rho),
            Method::Cg => AlgorithmConfig::cg(self.rho, self.eta),
        }
    }
}

fn all_measures() -> Vec<CostMeasure> {
    vec![CostMeasure::IterationCount, CostMeasure::PrimalIntegral]
}

fn yes() -> bool {
    true
}

/// Instances come from explicit files, a directory of `*.json` files, or an
/// inline generation block, in that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub instances: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generate: Option<GenConfig>,
    pub configs: Vec<ConfigSpec>,
    #[serde(default = "all_measures")]
    pub measures: Vec<CostMeasure>,
    pub max_iters: usize,
    /// Write one trajectory CSV per (instance, config).
    #[serde(default = "yes")]
    pub trajectories: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<InstanceDistribution>,
    /// A single instance file: the distribution concentrated on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<PathBuf>,
    pub context: CertificateContext,
    pub method: Method,
    pub measure: CostMeasure,
    #[serde(default)]
    pub options: LearningOptions,
}

pub fn parse<T: DeserializeOwned>(text: &str, json: bool) -> Result<T, CliError> {
    if json {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("{e}")))
    } else {
        toml::from_str(text).map_err(|e| CliError::Config(format!("{e}")))
    }
}

#[cfg(test)]
pub fn serialize<T: Serialize>(value: &T, json: bool) -> Result<String, CliError> {
    if json {
        serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))
    } else {
        toml::to_string(value).map_err(|e| CliError::Config(e.to_string()))
    }
}

pub fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text, is_json(path)).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Resolves `p` against the directory holding the config file.
pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new(".")).join(p)
    }
}

/// Config that embeds a root seed `--seed` can override.
pub trait Seeded {
    fn seed(&self) -> Option<u64>;
    fn set_seed(&mut self, seed: u64);
}

impl Seeded for GenConfig {
    fn seed(&self) -> Option<u64> {
        Some(self.distribution.seed)
    }
    fn set_seed(&mut self, seed: u64) {
        self.distribution.seed = seed;
    }
}

impl Seeded for RunConfig {
    fn seed(&self) -> Option<u64> {
        self.generate.as_ref().map(|g| g.distribution.seed)
    }
    fn set_seed(&mut self, seed: u64) {
        if let Some(g) = &mut self.generate {
            g.distribution.seed = seed;
        }
    }
}

impl Seeded for LearnConfig {
    fn seed(&self) -> Option<u64> {
        self.distribution.as_ref().map(|d| d.seed)
    }
    fn set_seed(&mut self, seed: u64) {
        if let Some(d) = &mut self.distribution {
            d.seed = seed;
        }
    }
}

impl Seeded for VerifyConfigFile {
    fn seed(&self) -> Option<u64> {
        Some(self.0.distribution.seed)
    }
    fn set_seed(&mut self, seed: u64) {
        self.0.distribution.seed = seed;
    }
}

impl Seeded for CertificateContext {
    fn seed(&self) -> Option<u64> {
        None
    }
    fn set_seed(&mut self, _: u64) {}
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VerifyConfigFile(pub VerifyConfig);
