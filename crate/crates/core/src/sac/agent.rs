use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::policy::{sample_action, PolicyBatch};
use super::replay::{Batch, ReplayMemory};
use crate::error::{check_len, Error, Result};
use crate::math::{exp, log};
use crate::nn::{soft_update, Activations, Adam, DenseNet};

/// Multiplier applied to rewards inside the critic targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardScale {
    Fixed(f64),
    /// `1 / mean|r|` over the replay contents at the first update.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SacHyperparams {
    pub discount: f64,
    pub tau: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub buffer_capacity: usize,
    pub target_update_interval: u64,
    pub gradient_steps: usize,
    /// Replay size required before the first gradient step.
    pub warmup: usize,
    pub hidden: Vec<usize>,
    /// Defaults to minus the action dimension.
    pub target_entropy: Option<f64>,
    pub initial_alpha: f64,
    pub reward_scale: RewardScale,
}

impl Default for SacHyperparams {
    fn default() -> Self {
        Self {
            discount: 0.95,
            tau: 0.005,
            batch_size: 64,
            learning_rate: 1e-4,
            buffer_capacity: 1_000_000,
            target_update_interval: 1,
            gradient_steps: 1,
            warmup: 1000,
            hidden: vec![256, 256],
            target_entropy: None,
            initial_alpha: 1.0,
            reward_scale: RewardScale::Auto,
        }
    }
}

impl SacHyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return bad("discount must lie in (0, 1)");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau must lie in (0, 1]");
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 {
            return bad("batch size and buffer capacity must be positive");
        }
        if !(self.learning_rate > 0.0) || !(self.initial_alpha > 0.0) {
            return bad("learning rate and initial alpha must be positive");
        }
        if self.target_update_interval == 0 {
            return bad("target update interval must be positive");
        }
        if self.hidden.contains(&0) {
            return bad("hidden widths must be positive");
        }
        if let RewardScale::Fixed(s) = self.reward_scale {
            if !(s > 0.0 && s.is_finite()) {
                return bad("reward scale must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticLosses {
    pub loss1: f64,
    pub loss2: f64,
    pub grad1: Vec<f64>,
    pub grad2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyLoss {
    pub loss: f64,
    pub grad: Vec<f64>,
    pub log_probs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateDiagnostics {
    pub critic1_loss: f64,
    pub critic2_loss: f64,
    pub policy_loss: f64,
    pub alpha: f64,
    /// Batch mean of `−log π`.
    pub entropy: f64,
}

/// `J = mean[−α·log π − α·H̄]` and its derivative with respect to `log α`.
pub fn temperature_loss(log_alpha: f64, log_probs: &[f64], target_entropy: f64) -> (f64, f64) {
    let alpha = exp(log_alpha);
    let mean_lp = log_probs.iter().sum::<f64>() / log_probs.len().max(1) as f64;
    let j = -alpha * (mean_lp + target_entropy);
    (j, j)
}

#[derive(Debug, Clone)]
pub struct SacAgent {
    hp: SacHyperparams,
    state_dim: usize,
    action_dim: usize,
    target_entropy: f64,
    actor: DenseNet,
    critic1: DenseNet,
    critic2: DenseNet,
    target1: DenseNet,
    target2: DenseNet,
    actor_opt: Adam,
    critic1_opt: Adam,
    critic2_opt: Adam,
    alpha_opt: Adam,
    log_alpha: f64,
    reward_scale: Option<f64>,
    updates: u64,
    rng: ChaCha8Rng,
}

fn layer_sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut s = vec![input];
    s.extend_from_slice(hidden);
    s.push(output);
    s
}

fn concat_rows(a: &[f64], da: usize, b: &[f64], db: usize, rows: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * (da + db));
    for r in 0..rows {
        out.extend_from_slice(&a[r * da..(r + 1) * da]);
        out.extend_from_slice(&b[r * db..(r + 1) * db]);
    }
    out
}

impl SacAgent {
    pub fn new(state_dim: usize, action_dim: usize, hp: SacHyperparams, seed: u64) -> Result<Self> {
        hp.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let actor = DenseNet::new(
            &layer_sizes(state_dim, &hp.hidden, 2 * action_dim),
            &mut rng,
        )?;
        let critic_sizes = layer_sizes(state_dim + action_dim, &hp.hidden, 1);
        let critic1 = DenseNet::new(&critic_sizes, &mut rng)?;
        let critic2 = DenseNet::new(&critic_sizes, &mut rng)?;
        let lr = hp.learning_rate;
        Ok(Self {
            state_dim,
            action_dim,
            target_entropy: hp.target_entropy.unwrap_or(-(action_dim as f64)),
            actor_opt: Adam::new(actor.num_params(), lr),
            critic1_opt: Adam::new(critic1.num_params(), lr),
            critic2_opt: Adam::new(critic2.num_params(), lr),
            alpha_opt: Adam::new(1, lr),
            log_alpha: log(hp.initial_alpha),
            reward_scale: match hp.reward_scale {
                RewardScale::Fixed(s) => Some(s),
                RewardScale::Auto => None,
            },
            target1: critic1.clone(),
            target2: critic2.clone(),
            actor,
            critic1,
            critic2,
            updates: 0,
            rng,
            hp,
        })
    }

    /// Rebuilds an agent from stored networks; optimiser moments restart.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        hp: SacHyperparams,
        nets: [DenseNet; 5],
        log_alpha: f64,
        reward_scale: Option<f64>,
        updates: u64,
        seed: u64,
    ) -> Result<Self> {
        let [actor, critic1, critic2, target1, target2] = nets;
        let mut agent = Self::new(actor.input_dim(), actor.output_dim() / 2, hp, seed)?;
        for (have, want) in [&critic1, &critic2, &target1, &target2]
            .iter()
            .map(|n| n.sizes())
            .zip(core::iter::repeat(agent.critic1.sizes()))
        {
            if have != want {
                return Err(Error::InvalidConfig(
                    "critic shape does not match actor".into(),
                ));
            }
        }
        if actor.sizes() != agent.actor.sizes() {
            return Err(Error::InvalidConfig(
                "actor shape does not match hyperparameters".into(),
            ));
        }
        agent.actor = actor;
        agent.critic1 = critic1;
        agent.critic2 = critic2;
        agent.target1 = target1;
        agent.target2 = target2;
        agent.log_alpha = log_alpha;
        agent.reward_scale = reward_scale;
        agent.updates = updates;
        Ok(agent)
    }

    pub fn hyperparams(&self) -> &SacHyperparams {
        &self.hp
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn target_entropy(&self) -> f64 {
        self.target_entropy
    }

    pub fn alpha(&self) -> f64 {
        exp(self.log_alpha)
    }

    pub fn log_alpha(&self) -> f64 {
        self.log_alpha
    }

    pub fn set_log_alpha(&mut self, v: f64) {
        self.log_alpha = v;
    }

    pub fn reward_scale(&self) -> Option<f64> {
        self.reward_scale
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Actor, critic 1, critic 2, target 1, target 2.
    pub fn networks(&self) -> [&DenseNet; 5] {
        [
            &self.actor,
            &self.critic1,
            &self.critic2,
            &self.target1,
            &self.target2,
        ]
    }

    pub fn networks_mut(&mut self) -> [&mut DenseNet; 5] {
        [
            &mut self.actor,
            &mut self.critic1,
            &mut self.critic2,
            &mut self.target1,
            &mut self.target2,
        ]
    }

    pub fn act(&mut self, state: &[f64], deterministic: bool) -> Result<Vec<f64>> {
        Ok(sample_action(&self.actor, state, &mut self.rng, deterministic)?.sampled_action)
    }

    fn gaussian(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.rng.sample(StandardNormal)).collect()
    }

    fn critic_forward(
        net: &DenseNet,
        states: &[f64],
        actions: &[f64],
        sd: usize,
        ad: usize,
        size: usize,
    ) -> Result<Activations> {
        net.forward_batch(&concat_rows(states, sd, actions, ad, size), size)
    }

    /// `y = s·r + γ·(min(Q̄₁, Q̄₂)(s′, a′) − α·log π(a′|s′))`, `a′` built from `noise`.
    pub fn critic_targets(
        &self,
        batch: &Batch,
        noise: &[f64],
        reward_scale: f64,
    ) -> Result<Vec<f64>> {
        let (sd, ad, n) = (self.state_dim, self.action_dim, batch.size);
        let next = PolicyBatch::new(&self.actor, &batch.next_states, n, noise)?;
        let q1 = Self::critic_forward(&self.target1, &batch.next_states, &next.action, sd, ad, n)?;
        let q2 = Self::critic_forward(&self.target2, &batch.next_states, &next.action, sd, ad, n)?;
        let alpha = self.alpha();
        Ok((0..n)
            .map(|b| {
                let v = q1.output()[b].min(q2.output()[b]) - alpha * next.log_prob[b];
                reward_scale * batch.rewards[b] + self.hp.discount * v
            })
            .collect())
    }

    /// Mean of `½(Q_i(s, a) − y)²` for both critics with parameter gradients.
    pub fn critic_losses(&self, batch: &Batch, targets: &[f64]) -> Result<CriticLosses> {
        let (sd, ad, n) = (self.state_dim, self.action_dim, batch.size);
        check_len("critic targets", n, targets.len())?;
        let input = concat_rows(&batch.states, sd, &batch.actions, ad, n);
        let run = |net: &DenseNet| -> Result<(f64, Vec<f64>)> {
            let acts = net.forward_batch(&input, n)?;
            let resid: Vec<f64> = acts
                .output()
                .iter()
                .zip(targets)
                .map(|(q, y)| q - y)
                .collect();
            let loss = resid.iter().map(|r| 0.5 * r * r).sum::<f64>() / n as f64;
            let go: Vec<f64> = resid.iter().map(|r| r / n as f64).collect();
            Ok((loss, net.backward(&acts, &go).params))
        };
        let (loss1, grad1) = run(&self.critic1)?;
        let (loss2, grad2) = run(&self.critic2)?;
        Ok(CriticLosses {
            loss1,
            loss2,
            grad1,
            grad2,
        })
    }

    /// `mean[α·log π(a|s) − min(Q₁, Q₂)(s, a)]` with reparameterised `a`
    /// and its gradient with respect to the actor parameters.
    pub fn policy_loss(&self, states: &[f64], size: usize, noise: &[f64]) -> Result<PolicyLoss> {
        let (sd, ad) = (self.state_dim, self.action_dim);
        let pb = PolicyBatch::new(&self.actor, states, size, noise)?;
        let a1 = Self::critic_forward(&self.critic1, states, &pb.action, sd, ad, size)?;
        let a2 = Self::critic_forward(&self.critic2, states, &pb.action, sd, ad, size)?;
        let alpha = self.alpha();
        let inv = 1.0 / size as f64;
        let mut loss = 0.0;
        let mut g1 = vec![0.0; size];
        let mut g2 = vec![0.0; size];
        for b in 0..size {
            let (q1, q2) = (a1.output()[b], a2.output()[b]);
            if q1 <= q2 {
                g1[b] = -inv;
            } else {
                g2[b] = -inv;
            }
            loss += alpha * pb.log_prob[b] - q1.min(q2);
        }
        let d1 = self.critic1.input_gradient(&a1, &g1);
        let d2 = self.critic2.input_gradient(&a2, &g2);
        let w = sd + ad;
        let mut action_grad = Vec::with_capacity(size * ad);
        for b in 0..size {
            for i in 0..ad {
                action_grad.push(d1[b * w + sd + i] + d2[b * w + sd + i]);
            }
        }
        let weights = vec![alpha * inv; size];
        Ok(PolicyLoss {
            loss: loss * inv,
            grad: pb.backward(&self.actor, &weights, &action_grad),
            log_probs: pb.log_prob,
        })
    }

    /// One round of critic, actor and temperature steps followed by the
    /// target update. Returns `None` while the replay holds fewer than
    /// `max(warmup, batch_size)` transitions.
    pub fn update(&mut self, replay: &ReplayMemory) -> Result<Option<UpdateDiagnostics>> {
        if replay.len() < self.hp.warmup.max(self.hp.batch_size) {
            return Ok(None);
        }
        let scale = match self.reward_scale {
            Some(s) => s,
            None => {
                let r = replay.rewards();
                let mean_abs = r.iter().map(|v| v.abs()).sum::<f64>() / r.len() as f64;
                let s = if mean_abs > 0.0 && mean_abs.is_finite() {
                    1.0 / mean_abs
                } else {
                    1.0
                };
                self.reward_scale = Some(s);
                s
            }
        };
        let mut diag = None;
        for _ in 0..self.hp.gradient_steps.max(1) {
            diag = Some(self.gradient_step(replay, scale)?);
        }
        Ok(diag)
    }

    fn gradient_step(&mut self, replay: &ReplayMemory, scale: f64) -> Result<UpdateDiagnostics> {
        let n = self.hp.batch_size;
        let batch = replay.sample(n, &mut self.rng);
        let noise = self.gaussian(n * self.action_dim);
        let targets = self.critic_targets(&batch, &noise, scale)?;
        let cl = self.critic_losses(&batch, &targets)?;
        self.critic1_opt.step(self.critic1.params_mut(), &cl.grad1);
        self.critic2_opt.step(self.critic2.params_mut(), &cl.grad2);

        let noise = self.gaussian(n * self.action_dim);
        let pl = self.policy_loss(&batch.states, n, &noise)?;
        self.actor_opt.step(self.actor.params_mut(), &pl.grad);

        let (_, g) = temperature_loss(self.log_alpha, &pl.log_probs, self.target_entropy);
        let mut la = [self.log_alpha];
        self.alpha_opt.step(&mut la, &[g]);
        self.log_alpha = la[0];

        self.updates += 1;
        if self.updates.is_multiple_of(self.hp.target_update_interval) {
            soft_update(
                self.target1.params_mut(),
                self.critic1.params(),
                self.hp.tau,
            );
            soft_update(
                self.target2.params_mut(),
                self.critic2.params(),
                self.hp.tau,
            );
        }
        let entropy = -pl.log_probs.iter().sum::<f64>() / n as f64;
        if !(cl.loss1.is_finite() && cl.loss2.is_finite() && pl.loss.is_finite()) {
            return Err(Error::NonFinite("training loss"));
        }
        Ok(UpdateDiagnostics {
            critic1_loss: cl.loss1,
            critic2_loss: cl.loss2,
            policy_loss: pl.loss,
            alpha: self.alpha(),
            entropy,
        })
    }
}
