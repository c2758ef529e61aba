//! Experiment configuration: a TOML document merged over built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use msbm_core::datasets::{load_snapshots, SyntheticSpec};
use msbm_core::metrics::{MetricConfig, Protocol};
use msbm_core::{MarginalDataset, MsbmConfig, SimConfig};
use serde::{Deserialize, Serialize};

/// Snapshot directory written by `generate` or prepared by hand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetPath {
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetSource {
    Path(DatasetPath),
    Synthetic(SyntheticSpec),
}

impl DatasetSource {
    pub fn load(&self) -> Result<MarginalDataset> {
        match self {
            DatasetSource::Path(p) => {
                load_snapshots(&p.path).with_context(|| format!("loading dataset from {}", p.path.display()))
            }
            DatasetSource::Synthetic(spec) => spec.generate().context("generating synthetic dataset"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Training data.
    pub dataset: DatasetSource,
    /// Evaluation data; defaults to `dataset`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_dataset: Option<DatasetSource>,
    /// Snapshot indices excluded from training.
    #[serde(default)]
    pub held_out: Vec<usize>,
    pub train: MsbmConfig,
    pub sim: SimConfig,
    pub metrics: MetricConfig,
    pub protocols: Vec<Protocol>,
    pub out: PathBuf,
    /// One training run per seed; evaluation averages over them.
    pub seeds: Vec<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSource::Synthetic(SyntheticSpec::petal(1000, 0)),
            eval_dataset: None,
            held_out: Vec::new(),
            train: MsbmConfig::new(0.5, 0),
            sim: SimConfig::new(30, 0),
            metrics: MetricConfig::default(),
            protocols: vec![Protocol::FromT0],
            out: PathBuf::from("runs"),
            seeds: vec![0],
        }
    }
}

/// Keys replaced wholesale instead of merged into the defaults.
const REPLACED_KEYS: [&str; 2] = ["dataset", "eval_dataset"];

fn merge(base: &mut toml::Value, over: toml::Value, top: bool) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if !(top && REPLACED_KEYS.contains(&k.as_str())) => merge(slot, v, false),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

impl ExperimentConfig {
    /// Parses `text` and fills every missing key from the defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        let user: toml::Value = toml::from_str(text).context("parsing config")?;
        let mut base = toml::Value::try_from(ExperimentConfig::default())?;
        merge(&mut base, user, true);
        let cfg: ExperimentConfig = base.try_into().context("invalid config")?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                Self::from_toml(&text).with_context(|| format!("in config {}", p.display()))
            }
            None => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.metrics.validate()?;
        if self.sim.steps_per_interval == 0 {
            bail!("sim.steps_per_interval must be >= 1");
        }
        if self.seeds.is_empty() {
            bail!("seeds must not be empty");
        }
        if self.protocols.is_empty() {
            bail!("protocols must not be empty");
        }
        if let DatasetSource::Synthetic(s) = &self.dataset {
            s.validate()?;
        }
        Ok(())
    }

    pub fn training_data(&self) -> Result<MarginalDataset> {
        let ds = self.dataset.load()?;
        if self.held_out.is_empty() {
            Ok(ds)
        } else {
            Ok(ds.with_holdout(&self.held_out)?)
        }
    }

    pub fn evaluation_data(&self) -> Result<MarginalDataset> {
        let ds = match &self.eval_dataset {
            Some(src) => src.load()?,
            None => self.dataset.load()?,
        };
        if self.held_out.is_empty() {
            Ok(ds)
        } else {
            Ok(ds.with_holdout(&self.held_out)?)
        }
    }

    /// Training config for one seed.
    pub fn train_config(&self, seed: u64) -> MsbmConfig {
        let mut cfg = self.train.clone();
        cfg.seed = seed;
        cfg
    }

    /// Simulation and metric configs for one seed.
    pub fn eval_configs(&self, seed: u64) -> (SimConfig, MetricConfig) {
        let mut sim = self.sim.clone();
        sim.seed = seed;
        let mut metrics = self.metrics.clone();
        metrics.seed = seed;
        (sim, metrics)
    }

    pub fn run_dir(&self, mode: &str, seed: u64) -> PathBuf {
        self.out.join(mode).join(format!("seed_{seed}"))
    }

    pub fn checkpoint_path(&self, mode: &str, seed: u64) -> PathBuf {
        self.run_dir(mode, seed).join("checkpoint.json")
    }
}
