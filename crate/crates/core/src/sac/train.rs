use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::agent::SacAgent;
use super::replay::ReplayMemory;
use crate::env::{DecodedAction, RisEnv};
use crate::error::{Error, Result};
use crate::math::ceil;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Channel seed of a training episode. Distinct from `seed` itself, which
/// fixes the UE positions.
pub fn episode_seed(seed: u64, episode: usize) -> u64 {
    let mut z = seed ^ (episode as u64 + 1).wrapping_mul(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestConfig {
    pub reward: f64,
    pub theta: f64,
    pub phi: f64,
    pub ris_bs: usize,
    pub ue_bs: Vec<usize>,
}

impl BestConfig {
    fn from_action(reward: f64, a: &DecodedAction) -> Self {
        Self {
            reward,
            theta: a.theta,
            phi: a.phi,
            ris_bs: a.assoc.ris_bs().unwrap_or(0),
            ue_bs: a.assoc.ue_indices().unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    /// Environment steps taken so far, over all episodes.
    pub steps: usize,
    pub mean_reward: f64,
    /// Mean reward of the deterministic policy replayed on this episode's channels.
    pub eval_reward: f64,
    pub best: BestConfig,
    /// Gradient updates performed during the episode; losses are NaN when zero.
    pub updates: usize,
    pub critic1_loss: f64,
    pub critic2_loss: f64,
    pub policy_loss: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub seed: u64,
    pub episodes: Vec<EpisodeLog>,
    /// Per-update `(critic1, critic2)` losses.
    pub critic_losses: Vec<(f64, f64)>,
}

impl TrainingLog {
    pub fn mean_rewards(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.mean_reward).collect()
    }

    pub fn eval_rewards(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.eval_reward).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyEvaluation {
    pub mean_reward: f64,
    pub mean_sum_rate: f64,
    pub mean_rates: Vec<f64>,
}

/// Averages over `steps` deterministic-policy steps on the channels of
/// `seed`, leaving `env` untouched.
pub fn evaluate_policy(
    env: &RisEnv,
    agent: &mut SacAgent,
    seed: u64,
    steps: usize,
) -> Result<PolicyEvaluation> {
    let mut env = env.clone();
    let mut state = env.reset(seed)?.to_input();
    let steps = steps.min(env.config().steps_per_episode).max(1);
    let mut out = PolicyEvaluation {
        mean_reward: 0.0,
        mean_sum_rate: 0.0,
        mean_rates: alloc::vec![0.0; env.network().num_ue],
    };
    for _ in 0..steps {
        let a = agent.act(&state, true)?;
        let s = env.step(&a)?;
        out.mean_reward += s.reward;
        out.mean_sum_rate += s.sum_rate;
        for (m, r) in out.mean_rates.iter_mut().zip(&s.rates) {
            *m += r;
        }
        state = s.state.to_input();
    }
    let n = steps as f64;
    out.mean_reward /= n;
    out.mean_sum_rate /= n;
    out.mean_rates.iter_mut().for_each(|m| *m /= n);
    Ok(out)
}

fn mean_or_nan(sum: f64, n: usize) -> f64 {
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// The episode loop: act, store, update once per environment step.
pub fn train(
    env: &mut RisEnv,
    agent: &mut SacAgent,
    seed: u64,
    eval_steps: usize,
) -> Result<TrainingLog> {
    if env.state_dim() != agent.state_dim() || env.action_dim() != agent.action_dim() {
        return Err(Error::DimensionMismatch {
            what: "agent vs environment",
            expected: env.state_dim() + env.action_dim(),
            got: agent.state_dim() + agent.action_dim(),
        });
    }
    let hp = agent.hyperparams().clone();
    let mut replay = ReplayMemory::new(hp.buffer_capacity, env.state_dim(), env.action_dim());
    let mut log = TrainingLog {
        seed,
        ..TrainingLog::default()
    };
    let mut total_steps = 0;
    for episode in 0..env.config().episodes {
        let ep_seed = episode_seed(seed, episode);
        let mut state = env.reset(ep_seed)?.to_input();
        let (mut reward_sum, mut n_steps) = (0.0, 0);
        let mut best: Option<BestConfig> = None;
        let (mut c1, mut c2, mut pl, mut updates) = (0.0, 0.0, 0.0, 0);
        while !env.is_done() {
            let action = agent.act(&state, false)?;
            let step = env.step(&action)?;
            let next = step.state.to_input();
            replay.push(&state, &action, step.reward, &next)?;
            if best.as_ref().is_none_or(|b| step.reward > b.reward) {
                best = Some(BestConfig::from_action(step.reward, &step.action));
            }
            reward_sum += step.reward;
            n_steps += 1;
            total_steps += 1;
            state = next;
            if let Some(d) = agent.update(&replay)? {
                c1 += d.critic1_loss;
                c2 += d.critic2_loss;
                pl += d.policy_loss;
                updates += 1;
                log.critic_losses.push((d.critic1_loss, d.critic2_loss));
            }
        }
        let eval_reward = evaluate_policy(env, agent, ep_seed, eval_steps)?.mean_reward;
        log.episodes.push(EpisodeLog {
            episode,
            steps: total_steps,
            mean_reward: mean_or_nan(reward_sum, n_steps),
            eval_reward,
            best: best.unwrap_or(BestConfig {
                reward: f64::NAN,
                theta: 0.0,
                phi: 0.0,
                ris_bs: 0,
                ue_bs: Vec::new(),
            }),
            updates,
            critic1_loss: mean_or_nan(c1, updates),
            critic2_loss: mean_or_nan(c2, updates),
            policy_loss: mean_or_nan(pl, updates),
            alpha: agent.alpha(),
        });
    }
    Ok(log)
}

/// Trailing moving average; the first `window − 1` entries average what is
/// available.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    for i in 0..xs.len() {
        acc += xs[i];
        if i >= w {
            acc -= xs[i - w];
        }
        out.push(acc / (i + 1).min(w) as f64);
    }
    out
}

/// Mean of the slice between fractional positions `from` and `to`, keeping
/// at least one element.
pub fn segment_mean(xs: &[f64], from: f64, to: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let n = xs.len() as f64;
    let lo = ((from * n) as usize).min(xs.len() - 1);
    let hi = (ceil(to * n) as usize).clamp(lo + 1, xs.len());
    xs[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
}
