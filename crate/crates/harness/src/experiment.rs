//! Sweep orchestration: every (sweep value, seed, method) cell is scored on
//! the same held-out channel realizations.

use std::path::{Path, PathBuf};

use rissac_core::baselines::{exhaustive_search, no_ris, outage_probability, random_association};
use rissac_core::channel::link_rng;
use rissac_core::env::RisEnv;
use rissac_core::sac::{episode_seed, evaluate_policy, train, SacAgent, TrainingLog};
use serde::{Deserialize, Serialize};

use crate::config::{resolve_seed, RunConfig};
use crate::error::{HarnessError, Result};
use crate::formats::{write_json, write_training_curve, MetricsRow, MetricsWriter};

const HELDOUT_SALT: u64 = 0x5E_ED0F_E7A1;
const RA_STREAM: u64 = 0xA_110C;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// BS antennas.
    N,
    /// RIS elements; values must be perfect squares (square surface).
    M,
    /// Per-BS transmit power in dBm.
    PMax,
    /// Number of UEs.
    K,
    /// Phase bits; a non-positive value selects continuous phases.
    B,
    /// QoS threshold in bps/Hz.
    RMin,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            Self::N => "N",
            Self::M => "M",
            Self::PMax => "P_max",
            Self::K => "K",
            Self::B => "B",
            Self::RMin => "R_min",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "SAC")]
    Sac,
    #[serde(rename = "RA")]
    Ra,
    #[serde(rename = "NO_RIS")]
    NoRis,
    #[serde(rename = "ORACLE")]
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sac => "SAC",
            Self::Ra => "RA",
            Self::NoRis => "NO_RIS",
            Self::Oracle => "ORACLE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// Preset name (`full`, `ci`, `mid`) or path to a JSON run config.
    pub scenario: String,
    pub sweep: SweepVariable,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub output: PathBuf,
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut spec: Self = serde_json::from_str(&text)?;
        // Relative scenario and output paths are taken from the spec's directory.
        let base = path.parent().unwrap_or(Path::new("."));
        if spec.output.is_relative() {
            spec.output = base.join(&spec.output);
        }
        if RunConfig::preset(&spec.scenario).is_none() && Path::new(&spec.scenario).is_relative() {
            spec.scenario = base.join(&spec.scenario).to_string_lossy().into_owned();
        }
        Ok(spec)
    }

    pub fn base_config(&self) -> Result<RunConfig> {
        match RunConfig::preset(&self.scenario) {
            Some(c) => Ok(c),
            None => RunConfig::load(Path::new(&self.scenario)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(HarnessError::Config("sweep values are empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("seed list is empty".into()));
        }
        if self.methods.is_empty() {
            return Err(HarnessError::Config("method list is empty".into()));
        }
        Ok(())
    }
}

fn as_count(value: f64, what: &str) -> Result<usize> {
    if value >= 1.0 && value.fract() == 0.0 && value < 1e9 {
        Ok(value as usize)
    } else {
        Err(HarnessError::Config(format!(
            "{what} must be a positive integer, got {value}"
        )))
    }
}

/// Copy of `base` with one parameter replaced.
pub fn apply_sweep(base: &RunConfig, var: SweepVariable, value: f64) -> Result<RunConfig> {
    let mut cfg = base.clone();
    let net = &mut cfg.env.network;
    match var {
        SweepVariable::N => net.bs_antennas = as_count(value, "N")?,
        SweepVariable::M => {
            let m = as_count(value, "M")?;
            let side = (m as f64).sqrt().round() as usize;
            if side * side != m {
                return Err(HarnessError::Config(format!(
                    "M = {m} is not a perfect square"
                )));
            }
            net.ris_horizontal = side;
            net.ris_vertical = side;
        }
        SweepVariable::PMax => net.max_power_dbm = value,
        SweepVariable::K => net.num_ue = as_count(value, "K")?,
        SweepVariable::B => {
            net.phase_bits = if value <= 0.0 {
                None
            } else {
                Some(as_count(value, "B")? as u32)
            }
        }
        SweepVariable::RMin => cfg.env.r_min = value,
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Channel seed of held-out realization `r`, disjoint from training episodes.
pub fn heldout_seed(seed: u64, r: usize) -> u64 {
    episode_seed(seed ^ HELDOUT_SALT, r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub mean_reward: f64,
    pub mean_sum_rate: f64,
    pub per_ue_rates: Vec<f64>,
    /// Mean rate per (realization, UE), realization-major.
    pub realization_rates: Vec<Vec<f64>>,
    pub training: Option<TrainingLog>,
}

/// Scores one method with one seed on `cfg.realizations` held-out channels.
pub fn evaluate_cell(cfg: &RunConfig, method: Method, seed: u64) -> Result<CellResult> {
    let mut env = RisEnv::new(cfg.env.clone(), seed)?;
    let mut agent = None;
    let mut training = None;
    if method == Method::Sac {
        let mut a = SacAgent::new(env.state_dim(), env.action_dim(), cfg.sac.clone(), seed)?;
        training = Some(train(&mut env, &mut a, seed, cfg.eval_steps)?);
        agent = Some(a);
    }
    let mut ra_rng = link_rng(seed, RA_STREAM);
    let mut rewards = 0.0;
    let mut sum_rates = 0.0;
    let mut realization_rates = Vec::with_capacity(cfg.realizations);
    for r in 0..cfg.realizations {
        let s = heldout_seed(seed, r);
        env.reset(s)?;
        let (reward, sum_rate, rates) = match method {
            Method::Sac => {
                let a = agent.as_mut().expect("agent trained above");
                let e = evaluate_policy(&env, a, s, cfg.eval_steps)?;
                (e.mean_reward, e.mean_sum_rate, e.mean_rates)
            }
            Method::Ra => {
                let b = random_association(&env, &mut ra_rng, cfg.ra_trials)?;
                (b.mean_reward, b.mean_sum_rate, b.mean_rates)
            }
            Method::NoRis => {
                let b = no_ris(&env)?;
                (b.reward, b.sum_rate, b.rates)
            }
            Method::Oracle => {
                let b = exhaustive_search(&env, cfg.oracle_budget as u128, cfg.oracle_every_bs)?;
                (b.reward, b.sum_rate, b.rates)
            }
        };
        rewards += reward;
        sum_rates += sum_rate;
        realization_rates.push(rates);
    }
    let n = cfg.realizations as f64;
    let k = cfg.env.network.num_ue;
    let per_ue_rates = (0..k)
        .map(|u| realization_rates.iter().map(|r| r[u]).sum::<f64>() / n)
        .collect();
    Ok(CellResult {
        mean_reward: rewards / n,
        mean_sum_rate: sum_rates / n,
        per_ue_rates,
        realization_rates,
        training,
    })
}

pub fn metrics_row(
    cfg: &RunConfig,
    method: Method,
    var: &str,
    value: f64,
    seed: u64,
    cell: &CellResult,
) -> MetricsRow {
    let flat: Vec<f64> = cell.realization_rates.iter().flatten().copied().collect();
    MetricsRow {
        method: method.name().into(),
        sweep_variable: var.into(),
        sweep_value: value,
        seed,
        mean_reward: cell.mean_reward,
        mean_sum_rate: cell.mean_sum_rate,
        per_ue_rates: cell.per_ue_rates.clone(),
        outage: outage_probability(&flat, &cfg.r_min_grid),
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    spec: &'a ExperimentSpec,
    cells: Vec<SidecarCell>,
}

#[derive(Serialize)]
struct SidecarCell {
    sweep_value: f64,
    seeds: Vec<u64>,
    config: RunConfig,
}

/// Runs every cell, writing `metrics.csv` row by row, `metrics.json`, and a
/// training curve per SAC cell into the output directory.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<MetricsRow>> {
    spec.validate()?;
    let base = spec.base_config()?;
    let seeds: Vec<u64> = spec
        .seeds
        .iter()
        .map(|&s| resolve_seed(s))
        .collect::<Result<_>>()?;
    let configs: Vec<RunConfig> = spec
        .values
        .iter()
        .map(|&v| apply_sweep(&base, spec.sweep, v))
        .collect::<Result<_>>()?;
    let out = &spec.output;
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    write_json(
        &out.join("metrics.json"),
        &Sidecar {
            spec,
            cells: spec
                .values
                .iter()
                .zip(&configs)
                .map(|(&v, c)| SidecarCell {
                    sweep_value: v,
                    seeds: seeds.clone(),
                    config: c.clone(),
                })
                .collect(),
        },
    )?;
    let mut writer = MetricsWriter::create(&out.join("metrics.csv"))?;
    let var = spec.sweep.name();
    let mut rows = Vec::new();
    for (&value, cfg) in spec.values.iter().zip(&configs) {
        for &seed in &seeds {
            for &method in &spec.methods {
                let cell = evaluate_cell(cfg, method, seed)?;
                if let Some(log) = &cell.training {
                    let name = format!("curve_{var}_{value}_seed{seed}.csv");
                    write_training_curve(&out.join(name), log)?;
                }
                let row = metrics_row(cfg, method, var, value, seed, &cell);
                writer.write(&row)?;
                rows.push(row);
            }
        }
    }
    Ok(rows)
}
