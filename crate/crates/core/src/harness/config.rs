use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{Algorithm, AlgorithmId};
use crate::environments::{deep_sea, random_mdp, DeepSeaSpec};
use crate::error::{Error, Result};
use crate::mdp::TabularMdp;

/// Default noise scale on deep sea.
pub const DEEP_SEA_NOISE_SCALE: f64 = 1.0 / 70000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    DeepSea,
    Random,
}

/// Flat experiment description. Every key is optional in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    /// Deep-sea grid size.
    pub n: usize,
    pub mask_seed: u64,
    pub goal_reward: f64,
    /// Random-MDP shape and seed.
    pub horizon: usize,
    pub states: usize,
    pub actions: usize,
    pub env_seed: u64,
    pub algo: AlgorithmId,
    pub episodes: u64,
    pub trials: u64,
    pub seed: u64,
    /// `None` picks the environment default.
    pub noise_scale: Option<f64>,
    /// Clip RLSVI values like SSR does.
    pub rlsvi_clip: bool,
    pub out: Option<PathBuf>,
    pub diagnostics: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            env: EnvKind::DeepSea,
            n: 10,
            mask_seed: 0,
            goal_reward: 1.0,
            horizon: 3,
            states: 2,
            actions: 2,
            env_seed: 0,
            algo: AlgorithmId::SsrHo,
            episodes: 1000,
            trials: 1,
            seed: 0,
            noise_scale: None,
            rlsvi_clip: true,
            out: None,
            diagnostics: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn noise_scale(&self) -> f64 {
        self.noise_scale.unwrap_or(match self.env {
            EnvKind::DeepSea => DEEP_SEA_NOISE_SCALE,
            EnvKind::Random => 1.0,
        })
    }

    /// Same config with the noise scale made explicit.
    pub fn resolved(&self) -> Self {
        Self {
            noise_scale: Some(self.noise_scale()),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::Config("episodes must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let scale = self.noise_scale();
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Config(format!(
                "noise scale must be positive, got {scale}"
            )));
        }
        match self.env {
            EnvKind::DeepSea if self.n < 2 => Err(Error::Config(format!(
                "deep sea needs n >= 2, got {}",
                self.n
            ))),
            EnvKind::Random if self.horizon == 0 || self.states == 0 || self.actions == 0 => Err(
                Error::Config("random MDP dimensions must be positive".into()),
            ),
            _ => Ok(()),
        }
    }

    pub fn deep_sea_spec(&self) -> DeepSeaSpec {
        DeepSeaSpec {
            size: self.n,
            mask_seed: self.mask_seed,
            goal_reward: self.goal_reward,
        }
    }

    pub fn build_env(&self) -> Result<TabularMdp> {
        match self.env {
            EnvKind::DeepSea => deep_sea(&self.deep_sea_spec()),
            EnvKind::Random => random_mdp(self.horizon, self.states, self.actions, self.env_seed),
        }
    }

    pub fn algorithm(&self) -> Result<Algorithm> {
        Algorithm::from_id(self.algo, self.noise_scale(), self.rlsvi_clip)
    }
}
