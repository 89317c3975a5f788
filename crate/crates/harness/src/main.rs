use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use rissac::config::{resolve_seed, RunConfig};
use rissac::experiment::{
    evaluate_cell, heldout_seed, metrics_row, run_experiment, ExperimentSpec, Method,
};
use rissac::formats::{save_checkpoint, write_json, write_metrics, write_training_curve};
use rissac_core::baselines::exhaustive_search;
use rissac_core::env::RisEnv;
use rissac_core::sac::{evaluate_policy, train, SacAgent};
use serde::Serialize;

/// RIS-assisted multi-BS mmWave downlink simulator with a soft actor-critic learner.
///
/// Config arguments accept a JSON file or `preset:<full|ci|mid>`. Setting
/// RISSAC_SEED overrides every seed.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent and write its curve, metrics, sidecar and checkpoint.
    Train {
        #[arg(long, short)]
        config: PathBuf,
        /// Defaults to the seed in the config file.
        #[arg(long, short)]
        seed: Option<u64>,
        #[arg(long, short, default_value = "out")]
        out: PathBuf,
    },
    /// Run a sweep described by a JSON experiment spec.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Exhaustive search on the held-out realizations; prints JSON.
    Oracle {
        #[arg(long, short)]
        config: PathBuf,
    },
    /// Random-association and no-RIS baselines on the held-out realizations; prints JSON.
    Baselines {
        #[arg(long, short)]
        config: PathBuf,
    },
}

#[derive(Serialize)]
struct Sidecar<'a> {
    seed: u64,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct Realization<T> {
    realization: usize,
    channel_seed: u64,
    result: T,
}

fn cmd_train(config: PathBuf, seed: Option<u64>, out: PathBuf) -> Result<()> {
    let cfg = RunConfig::load(&config)?;
    let seed = resolve_seed(seed.unwrap_or(cfg.seed))?;
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut env = RisEnv::new(cfg.env.clone(), seed)?;
    let mut agent = SacAgent::new(env.state_dim(), env.action_dim(), cfg.sac.clone(), seed)?;
    eprintln!(
        "training: {} episodes x {} steps, state {} action {}",
        cfg.env.episodes,
        cfg.env.steps_per_episode,
        env.state_dim(),
        env.action_dim()
    );
    let log = train(&mut env, &mut agent, seed, cfg.eval_steps)?;
    write_training_curve(&out.join("curve.csv"), &log)?;
    save_checkpoint(&out.join("checkpoint.bin"), &agent)?;

    let mut rewards = Vec::with_capacity(cfg.realizations);
    for r in 0..cfg.realizations {
        let s = heldout_seed(seed, r);
        env.reset(s)?;
        rewards.push(evaluate_policy(&env, &mut agent, s, cfg.eval_steps)?);
    }
    let n = rewards.len() as f64;
    let row = rissac::MetricsRow {
        method: Method::Sac.name().into(),
        sweep_variable: "none".into(),
        sweep_value: 0.0,
        seed,
        mean_reward: rewards.iter().map(|e| e.mean_reward).sum::<f64>() / n,
        mean_sum_rate: rewards.iter().map(|e| e.mean_sum_rate).sum::<f64>() / n,
        per_ue_rates: (0..cfg.env.network.num_ue)
            .map(|u| rewards.iter().map(|e| e.mean_rates[u]).sum::<f64>() / n)
            .collect(),
        outage: rissac_core::baselines::outage_probability(
            &rewards
                .iter()
                .flat_map(|e| e.mean_rates.iter().copied())
                .collect::<Vec<_>>(),
            &cfg.r_min_grid,
        ),
    };
    write_metrics(&out.join("metrics.csv"), std::slice::from_ref(&row))?;
    write_json(&out.join("metrics.json"), &Sidecar { seed, config: &cfg })?;
    println!("{}", serde_json::to_string_pretty(&row)?);
    Ok(())
}

fn cmd_oracle(config: PathBuf) -> Result<()> {
    let cfg = RunConfig::load(&config)?;
    let seed = resolve_seed(cfg.seed)?;
    let mut env = RisEnv::new(cfg.env.clone(), seed)?;
    let mut out = Vec::new();
    for r in 0..cfg.realizations {
        let s = heldout_seed(seed, r);
        env.reset(s)?;
        let result = exhaustive_search(&env, cfg.oracle_budget as u128, cfg.oracle_every_bs)?;
        out.push(Realization {
            realization: r,
            channel_seed: s,
            result,
        });
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn cmd_baselines(config: PathBuf) -> Result<()> {
    let cfg = RunConfig::load(&config)?;
    let seed = resolve_seed(cfg.seed)?;
    let ra = evaluate_cell(&cfg, Method::Ra, seed)?;
    let nr = evaluate_cell(&cfg, Method::NoRis, seed)?;
    let rows = [
        metrics_row(&cfg, Method::Ra, "none", 0.0, seed, &ra),
        metrics_row(&cfg, Method::NoRis, "none", 0.0, seed, &nr),
    ];
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({ "seed": seed, "rows": rows }))?
    );
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train { config, seed, out } => cmd_train(config, seed, out),
        Command::Sweep { spec } => {
            let spec = ExperimentSpec::load(&spec)?;
            let rows = run_experiment(&spec)?;
            eprintln!(
                "{} rows written to {}",
                rows.len(),
                spec.output.join("metrics.csv").display()
            );
            Ok(())
        }
        Command::Oracle { config } => cmd_oracle(config),
        Command::Baselines { config } => cmd_baselines(config),
    }
}
