//! Episodic MDP over the network model. Channels are frozen for the length
//! of an episode and redrawn at every reset.
//!
//! Action encoding (length `3 + K`, entries in `[−1, 1]`): entry 0 is the
//! azimuth steering angle, entry 1 the elevation, entry 2 the BS owning the
//! RIS and entry `3 + k` the BS serving UE k. Angles go through the phase
//! codebook; BS choices use `floor((raw + 1)/2 · J)`.
//!
//! State encoding (length `K + 2·J·K·N`): previous-step rates followed by
//! the real and imaginary parts of every `H_j`, laid out as `[j][k][n]` with
//! zero columns for UEs that BS j does not serve.

use alloc::vec;
use alloc::vec::Vec;

use crate::channel::{link_rng, ChannelSet, Scenario};
use crate::config::{EnvConfig, NetworkConfig};
use crate::error::{check_len, Error, Result};
use crate::math::sqrt;
use crate::network::{self, candidate_channel_norms, AssociationMatrix, LinkBudget};
use crate::ris::{bin_index, clamp_unit, PhaseCodebook, RisState};

const STREAM_POSITIONS: u64 = 0;

pub fn action_dim(config: &NetworkConfig) -> usize {
    3 + config.num_ue
}

pub fn state_dim(config: &NetworkConfig) -> usize {
    config.num_ue + 2 * config.num_bs() * config.num_ue * config.bs_antennas
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedAction {
    pub theta: f64,
    pub phi: f64,
    pub assoc: AssociationMatrix,
}

/// Decodes a raw action without association repair.
pub fn decode_action(
    raw: &[f64],
    config: &NetworkConfig,
    codebook: &PhaseCodebook,
) -> Result<DecodedAction> {
    check_len("action", action_dim(config), raw.len())?;
    let num_bs = config.num_bs();
    let theta = codebook.quantize(raw[0]);
    let phi = codebook.quantize(raw[1]);
    let ris_bs = bin_index(raw[2], num_bs);
    let ue_bs: Vec<usize> = raw[3..].iter().map(|&r| bin_index(r, num_bs)).collect();
    let assoc = AssociationMatrix::from_indices(num_bs, ris_bs, &ue_bs)?;
    Ok(DecodedAction { theta, phi, assoc })
}

/// Centre of the bin that `decode_action` maps to `index` out of `bins`.
pub fn bin_center(index: usize, bins: usize) -> f64 {
    (2.0 * index as f64 + 1.0) / bins as f64 - 1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub rates: Vec<f64>,
    /// Raw (unnormalised) channel features.
    pub channel_features: Vec<f64>,
    pub normalization_scale: f64,
}

impl StateVector {
    pub fn dim(&self) -> usize {
        self.rates.len() + self.channel_features.len()
    }

    /// Network input: rates followed by the channel features divided by
    /// the normalisation scale.
    pub fn to_input(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(&self.rates);
        v.extend(
            self.channel_features
                .iter()
                .map(|x| x / self.normalization_scale),
        );
        v
    }

    pub fn is_finite(&self) -> bool {
        self.rates
            .iter()
            .chain(&self.channel_features)
            .all(|x| x.is_finite())
            && self.normalization_scale.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub state: StateVector,
    pub reward: f64,
    pub done: bool,
    pub sum_rate: f64,
    pub rates: Vec<f64>,
    pub action: DecodedAction,
}

#[derive(Debug, Clone)]
pub struct RisEnv {
    config: EnvConfig,
    codebook: PhaseCodebook,
    scenario: Scenario,
    channels: ChannelSet,
    scale: f64,
    steps: usize,
    done: bool,
    state: StateVector,
}

impl RisEnv {
    /// Builds the environment; UE positions come from `seed`, and the first
    /// episode is reset with the same seed.
    pub fn new(config: EnvConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let net = &config.network;
        let codebook = PhaseCodebook::new(net.phase_bits)?;
        let scenario = Scenario::sample(net, &mut link_rng(seed, STREAM_POSITIONS));
        let channels = ChannelSet::draw(net, &scenario, seed)?;
        let mut env = Self {
            codebook,
            scenario,
            channels,
            scale: 1.0,
            steps: 0,
            done: false,
            state: StateVector {
                rates: Vec::new(),
                channel_features: Vec::new(),
                normalization_scale: 1.0,
            },
            config,
        };
        env.reset(seed)?;
        Ok(env)
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn network(&self) -> &NetworkConfig {
        &self.config.network
    }

    pub fn codebook(&self) -> &PhaseCodebook {
        &self.codebook
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn channels(&self) -> &ChannelSet {
        &self.channels
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn action_dim(&self) -> usize {
        action_dim(self.network())
    }

    pub fn state_dim(&self) -> usize {
        state_dim(self.network())
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Starts a new coherence interval drawn from `seed`.
    pub fn reset(&mut self, seed: u64) -> Result<StateVector> {
        let net = &self.config.network;
        if self.config.resample_ue_positions {
            self.scenario = Scenario::sample(net, &mut link_rng(seed, STREAM_POSITIONS));
        }
        self.channels = ChannelSet::draw(net, &self.scenario, seed)?;
        self.steps = 0;
        self.done = false;

        let ris_bs = self.scenario.nearest_bs(self.scenario.ris_position);
        let ue_bs: Vec<usize> = self
            .scenario
            .ue_positions
            .iter()
            .map(|p| self.scenario.nearest_bs(*p))
            .collect();
        let assoc = AssociationMatrix::from_indices(net.num_bs(), ris_bs, &ue_bs)?;
        let ris = self.ris_state(0.0, 0.0)?;

        let norms =
            candidate_channel_norms(&self.channels, Some(ris.psi_diagonal()), Some(ris_bs))?;
        let energy: f64 = norms.iter().flatten().map(|n| n * n).sum();
        let count = 2 * net.num_bs() * net.num_ue * net.bs_antennas;
        let rms = sqrt(energy / count as f64);
        self.scale = if rms > 0.0 && rms.is_finite() {
            rms
        } else {
            1.0
        };

        let budget = self.evaluate_with(&ris, &assoc)?;
        self.state = self.encode_state(vec![0.0; net.num_ue], &budget);
        Ok(self.state.clone())
    }

    pub fn ris_state(&self, theta: f64, phi: f64) -> Result<RisState> {
        let net = &self.config.network;
        RisState::new(
            theta,
            phi,
            net.ris_horizontal,
            net.ris_vertical,
            net.unit_modulus,
        )
    }

    /// Decodes a raw action, repairing the association in strict mode.
    pub fn decode(&self, raw: &[f64]) -> Result<DecodedAction> {
        let mut action = decode_action(raw, self.network(), &self.codebook)?;
        if self.config.strict_association {
            let ris = self.ris_state(action.theta, action.phi)?;
            let norms = candidate_channel_norms(
                &self.channels,
                Some(ris.psi_diagonal()),
                action.assoc.ris_bs(),
            )?;
            action.assoc = network::repair_association(&action.assoc, &norms)?;
        }
        Ok(action)
    }

    fn evaluate_with(&self, ris: &RisState, assoc: &AssociationMatrix) -> Result<LinkBudget> {
        let net = &self.config.network;
        network::evaluate(
            &self.channels,
            Some(ris.psi_diagonal()),
            assoc,
            net.max_power_watts(),
            net.noise_watts(),
        )
    }

    /// Link budget of a configuration on the current channels.
    pub fn evaluate(&self, theta: f64, phi: f64, assoc: &AssociationMatrix) -> Result<LinkBudget> {
        let ris = self.ris_state(theta, phi)?;
        self.evaluate_with(&ris, assoc)
    }

    /// Link budget with the RIS removed from every link.
    pub fn evaluate_without_ris(&self, assoc: &AssociationMatrix) -> Result<LinkBudget> {
        let net = &self.config.network;
        network::evaluate(
            &self.channels,
            None,
            assoc,
            net.max_power_watts(),
            net.noise_watts(),
        )
    }

    /// Sum-rate minus the weighted QoS shortfall.
    pub fn reward_of(&self, budget: &LinkBudget) -> f64 {
        let shortfall: f64 = budget
            .rates
            .iter()
            .map(|&r| (self.config.r_min - r).max(0.0))
            .sum();
        budget.sum_rate - self.config.penalty_weight * shortfall
    }

    pub fn step(&mut self, raw: &[f64]) -> Result<Step> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        let raw: Vec<f64> = raw.iter().map(|&r| clamp_unit(r)).collect();
        let action = self.decode(&raw)?;
        let budget = self.evaluate(action.theta, action.phi, &action.assoc)?;
        let reward = self.reward_of(&budget);
        self.steps += 1;
        self.done = self.steps >= self.config.steps_per_episode;
        self.state = self.encode_state(budget.rates.clone(), &budget);
        Ok(Step {
            state: self.state.clone(),
            reward,
            done: self.done,
            sum_rate: budget.sum_rate,
            rates: budget.rates,
            action,
        })
    }

    fn encode_state(&self, rates: Vec<f64>, budget: &LinkBudget) -> StateVector {
        let net = &self.config.network;
        let n = net.bs_antennas;
        let mut features = Vec::with_capacity(2 * net.num_bs() * net.num_ue * n);
        for row in &budget.equivalent_channels {
            for h in row {
                for v in h {
                    // Column of H_j is h̃ᴴ.
                    features.push(v.re);
                    features.push(-v.im);
                }
            }
        }
        StateVector {
            rates,
            channel_features: features,
            normalization_scale: self.scale,
        }
    }
}
