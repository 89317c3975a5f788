//! Run configuration files (JSON) and the global seed override.

use std::path::Path;

use rissac_core::sac::SacHyperparams;
use rissac_core::{EnvConfig, NetworkConfig};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Overrides every seed given in files or on the command line.
pub const SEED_ENV: &str = "RISSAC_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub env: EnvConfig,
    pub sac: SacHyperparams,
    pub seed: u64,
    /// Deterministic-policy steps per evaluation rollout.
    pub eval_steps: usize,
    /// Held-out channel realizations each method is scored on.
    pub realizations: usize,
    /// Random-association draws per realization.
    pub ra_trials: usize,
    /// Largest number of configurations the oracle may enumerate.
    pub oracle_budget: u64,
    /// Skip oracle associations that leave a BS idle.
    pub oracle_every_bs: bool,
    /// Thresholds of the emitted outage curve, bps/Hz.
    pub r_min_grid: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            env: EnvConfig::default(),
            sac: SacHyperparams::default(),
            seed: 0,
            eval_steps: 10,
            realizations: 20,
            ra_trials: 1000,
            oracle_budget: 1_000_000,
            oracle_every_bs: false,
            r_min_grid: (0..=20).map(|i| 0.5 * i as f64).collect(),
        }
    }
}

impl RunConfig {
    pub fn ci() -> Self {
        Self {
            env: EnvConfig::ci(),
            ..Self::default()
        }
    }

    pub fn mid_scale() -> Self {
        Self {
            env: EnvConfig::new(NetworkConfig::mid_scale()),
            ..Self::default()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "full" => Some(Self::default()),
            "ci" => Some(Self::ci()),
            "mid" | "mid_scale" => Some(Self::mid_scale()),
            _ => None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a JSON file, or a preset when `path` is `preset:<name>`.
    pub fn load(path: &Path) -> Result<Self> {
        if let Some(name) = path.to_str().and_then(|p| p.strip_prefix("preset:")) {
            return Self::preset(name).ok_or_else(|| HarnessError::UnknownPreset(name.into()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.sac.validate()?;
        if self.realizations == 0 || self.ra_trials == 0 || self.eval_steps == 0 {
            return Err(HarnessError::Config(
                "realizations, ra_trials and eval_steps must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// `RISSAC_SEED` when set, otherwise `fallback`.
pub fn resolve_seed(fallback: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            HarnessError::Config(format!("{SEED_ENV} is not an unsigned integer: {v:?}"))
        }),
        Err(_) => Ok(fallback),
    }
}
