//! Soft actor-critic: squashed-Gaussian actor, twin critics with Polyak
//! targets, automatic temperature, FIFO replay, and the episode loop.

mod agent;
mod policy;
mod replay;
mod train;

pub use agent::{
    temperature_loss, CriticLosses, PolicyLoss, RewardScale, SacAgent, SacHyperparams,
    UpdateDiagnostics,
};
pub use policy::{
    sample_action, squash, GaussianPolicyOutput, PolicyBatch, LOG_STD_MAX, LOG_STD_MIN, TANH_EPS,
};
pub use replay::{Batch, ReplayMemory, Transition};
pub use train::{
    episode_seed, evaluate_policy, moving_average, segment_mean, train, BestConfig, EpisodeLog,
    PolicyEvaluation, TrainingLog,
};
