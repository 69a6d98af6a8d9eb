//! Run configuration: one JSON file drives every pipeline subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SosError};
use crate::eval::EvalConfig;
use crate::finetune::FinetuneConfig;
use crate::pipeline::{derive_seed, OversampleOption};
use crate::sampling::SamplerConfig;
use crate::scorenet::{Activation, LayerType, NetSpec};
use crate::sde::SdeConfig;
use crate::training::TrainConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetConfig {
    pub layer_type: LayerType,
    pub hidden_dims: Vec<usize>,
    pub activation: Activation,
}

impl NetConfig {
    pub fn resolve(&self, input_dim: usize) -> Result<NetSpec> {
        NetSpec::new(self.layer_type, self.hidden_dims.clone(), self.activation, input_dim)
    }
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            layer_type: LayerType::Concat,
            hidden_dims: vec![64, 64],
            activation: Activation::SoftPlus,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema: PathBuf,
    pub train_csv: PathBuf,
    #[serde(default)]
    pub test_csv: Option<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Worker cap for per-class fan-out; 1 keeps runs bit-reproducible.
    #[serde(default = "default_threads")]
    pub threads: usize,
    pub sde: SdeConfig,
    #[serde(default)]
    pub net: NetConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub finetune: Option<FinetuneConfig>,
    #[serde(default = "default_sampler")]
    pub sampler: SamplerConfig,
    #[serde(default = "default_option")]
    pub option: OversampleOption,
    #[serde(default)]
    pub eval: EvalConfig,
}

fn default_threads() -> usize {
    1
}
fn default_sampler() -> SamplerConfig {
    SamplerConfig::default()
}
fn default_option() -> OversampleOption {
    OversampleOption::Regular
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            SosError::BadConfig(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| SosError::BadConfig(format!("config {}: {e}", path.display())))?;
        cfg.resolve_seeds();
        cfg.validate()?;
        // paths in the config are relative to the config file's directory
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        fix(&mut self.schema);
        fix(&mut self.train_csv);
        if let Some(test) = &mut self.test_csv {
            fix(test);
        }
        fix(&mut self.output_dir);
    }

    /// Stage seeds left at 0 derive from the global seed, so one number pins
    /// the whole run while explicit stage seeds still win.
    pub fn resolve_seeds(&mut self) {
        if self.train.seed == 0 {
            self.train.seed = derive_seed(self.seed, 1);
        }
        if self.sampler.seed == 0 {
            self.sampler.seed = derive_seed(self.seed, 2);
        }
        if let Some(ft) = &mut self.finetune {
            if ft.seed == 0 {
                ft.seed = derive_seed(self.seed, 3);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sde.validate()?;
        self.train.validate()?;
        if let Some(ft) = &self.finetune {
            ft.validate()?;
        }
        self.eval.validate()?;
        self.sampler.validate(self.sde.family)?;
        if self.threads == 0 {
            return Err(SosError::BadConfig("threads must be >= 1".into()));
        }
        if self.net.hidden_dims.is_empty() {
            return Err(SosError::BadConfig("net.hidden_dims must be non-empty".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let json = r#"{
            "schema": "schema.json",
            "train_csv": "train.csv",
            "output_dir": "out",
            "seed": 7,
            "sde": { "family": "SubVP" }
        }"#;
        let mut cfg: RunConfig = serde_json::from_str(json).unwrap();
        cfg.resolve_seeds();
        cfg.validate().unwrap();
        assert_eq!(cfg.sampler.steps, 50);
        assert_eq!(cfg.threads, 1);
        assert!(cfg.finetune.is_none());
        assert_ne!(cfg.train.seed, 0, "seed derived from the global seed");
    }

    #[test]
    fn explicit_stage_seed_wins() {
        let json = r#"{
            "schema": "s.json", "train_csv": "t.csv", "output_dir": "o",
            "seed": 7,
            "sde": { "family": "VP" },
            "train": { "batch_size": 8, "epochs": 1, "learning_rate": 0.001, "seed": 42 }
        }"#;
        let mut cfg: RunConfig = serde_json::from_str(json).unwrap();
        cfg.resolve_seeds();
        assert_eq!(cfg.train.seed, 42);
    }

    #[test]
    fn bad_t_end_rejected() {
        let json = r#"{
            "schema": "s.json", "train_csv": "t.csv", "output_dir": "o",
            "sde": { "family": "VP" },
            "sampler": { "predictor": "EM", "t_end": 1.5 }
        }"#;
        let cfg: RunConfig = serde_json::from_str(json).unwrap();
        assert!(matches!(cfg.validate(), Err(SosError::BadConfig(_))));
    }
}
