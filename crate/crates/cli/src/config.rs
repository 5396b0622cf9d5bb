use std::path::{Path, PathBuf};

use cbl_core::env::Prior;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Experiment description read with `--config`. Every block is optional and
/// command-line flags override what it sets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub env: EnvBlock,
    #[serde(default)]
    pub agent: AgentBlock,
    #[serde(default)]
    pub run: RunBlock,
    #[serde(default)]
    pub chain: ChainBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    #[default]
    LinearGaussian,
    Finite,
}

/// Action set of a linear environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ActionSetConfig {
    UnitBall {},
    /// `n` points drawn uniformly from the ball with the run seed.
    BallSample { n: usize },
    Points { points: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvBlock {
    pub kind: Option<EnvKind>,
    pub d: Option<usize>,
    pub action_set: Option<ActionSetConfig>,
    pub prior: Option<Prior>,
    pub sigma: Option<f64>,
    /// Finite spec JSON, relative to the config file.
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentBlock {
    pub m: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    #[serde(rename = "T")]
    pub horizon: Option<usize>,
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainBlock {
    pub alpha: Option<f64>,
    pub k_max: Option<i32>,
    pub unit_ball: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("bad config {}: {e}", path.display())))?;
        if let (Some(spec), Some(dir)) = (&cfg.env.spec, path.parent()) {
            if spec.is_relative() {
                cfg.env.spec = Some(dir.join(spec));
            }
        }
        Ok(cfg)
    }
}
