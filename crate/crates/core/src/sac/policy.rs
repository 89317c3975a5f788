use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, Error, Result};
use crate::math::{exp, log, tanh, PI};
use crate::nn::{Activations, DenseNet};

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;
/// Offset inside `log(1 − tanh²(u) + ε)`.
pub const TANH_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicyOutput {
    pub mean: Vec<f64>,
    pub log_std: Vec<f64>,
    pub sampled_action: Vec<f64>,
    pub log_prob: f64,
}

/// Actor forward pass on a batch with externally supplied standard-normal
/// noise, keeping everything the reparameterised gradient needs.
#[derive(Debug, Clone)]
pub struct PolicyBatch {
    pub size: usize,
    pub action_dim: usize,
    pub mean: Vec<f64>,
    pub log_std: Vec<f64>,
    pub noise: Vec<f64>,
    pub action: Vec<f64>,
    pub log_prob: Vec<f64>,
    clamped: Vec<bool>,
    acts: Activations,
}

/// `tanh` of a pre-squash sample together with the per-dimension log-density
/// term `−½ε² − log σ − ½log 2π − log(1 − a² + ε)`.
pub fn squash(mean: f64, log_std: f64, noise: f64) -> (f64, f64) {
    let u = mean + exp(log_std) * noise;
    let a = tanh(u);
    let lp = -0.5 * noise * noise - log_std - 0.5 * log(2.0 * PI) - log(1.0 - a * a + TANH_EPS);
    (a, lp)
}

impl PolicyBatch {
    pub fn new(actor: &DenseNet, states: &[f64], size: usize, noise: &[f64]) -> Result<Self> {
        let d = actor.output_dim() / 2;
        check_len("policy noise", size * d, noise.len())?;
        let acts = actor.forward_batch(states, size)?;
        let out = acts.output();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("actor output"));
        }
        let mut pb = Self {
            size,
            action_dim: d,
            mean: Vec::with_capacity(size * d),
            log_std: Vec::with_capacity(size * d),
            noise: noise.to_vec(),
            action: Vec::with_capacity(size * d),
            log_prob: vec![0.0; size],
            clamped: Vec::with_capacity(size * d),
            acts: acts.clone(),
        };
        for b in 0..size {
            let row = &out[b * 2 * d..(b + 1) * 2 * d];
            for i in 0..d {
                let raw = row[d + i];
                let ls = raw.clamp(LOG_STD_MIN, LOG_STD_MAX);
                let (a, lp) = squash(row[i], ls, noise[b * d + i]);
                pb.mean.push(row[i]);
                pb.log_std.push(ls);
                pb.clamped.push(raw != ls);
                pb.action.push(a);
                pb.log_prob[b] += lp;
            }
        }
        Ok(pb)
    }

    /// Actor parameter gradient of `Σ_b [w_b·logπ_b + Σ_i g_bi·a_bi]`.
    pub fn backward(&self, actor: &DenseNet, logp_weight: &[f64], action_grad: &[f64]) -> Vec<f64> {
        let d = self.action_dim;
        assert_eq!(logp_weight.len(), self.size);
        assert_eq!(action_grad.len(), self.size * d);
        let mut go = vec![0.0; self.size * 2 * d];
        for b in 0..self.size {
            for i in 0..d {
                let k = b * d + i;
                let a = self.action[k];
                let one_minus = 1.0 - a * a;
                let dlogp_du = 2.0 * a * one_minus / (one_minus + TANH_EPS);
                let dl_du = logp_weight[b] * dlogp_du + action_grad[k] * one_minus;
                go[b * 2 * d + i] = dl_du;
                if !self.clamped[k] {
                    let sigma_eps = exp(self.log_std[k]) * self.noise[k];
                    go[b * 2 * d + d + i] = dl_du * sigma_eps - logp_weight[b];
                }
            }
        }
        actor.backward(&self.acts, &go).params
    }
}

/// Draws one action. Deterministic mode returns `tanh(mean)` and the log
/// density at zero noise.
pub fn sample_action<R: Rng + ?Sized>(
    actor: &DenseNet,
    state: &[f64],
    rng: &mut R,
    deterministic: bool,
) -> Result<GaussianPolicyOutput> {
    let d = actor.output_dim() / 2;
    let noise: Vec<f64> = if deterministic {
        vec![0.0; d]
    } else {
        (0..d).map(|_| rng.sample(StandardNormal)).collect()
    };
    let pb = PolicyBatch::new(actor, state, 1, &noise)?;
    Ok(GaussianPolicyOutput {
        log_prob: pb.log_prob[0],
        mean: pb.mean,
        log_std: pb.log_std,
        sampled_action: pb.action,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// 1-input linear actor producing a fixed mean and log-std.
    fn constant_actor(mean: &[f64], log_std: &[f64]) -> DenseNet {
        let d = mean.len();
        let mut p = vec![0.0; 2 * d];
        p.extend_from_slice(mean);
        p.extend_from_slice(log_std);
        DenseNet::from_parameters(&[1, 2 * d], p).unwrap()
    }

    #[test]
    fn vanishing_std_returns_zero_action() {
        let actor = constant_actor(&[0.0, 0.0], &[-20.0, -20.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = sample_action(&actor, &[1.0], &mut rng, false).unwrap();
        assert!(out.sampled_action.iter().all(|a| a.abs() < 1e-7));
    }

    #[test]
    fn samples_are_strictly_inside_the_box() {
        let actor = constant_actor(&[0.3, -2.0, 1.0], &[1.5, 2.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let out = sample_action(&actor, &[0.5], &mut rng, false).unwrap();
            assert!(out.sampled_action.iter().all(|a| a.abs() <= 1.0));
            assert!(out.log_prob.is_finite());
        }
    }

    #[test]
    fn log_std_is_clamped() {
        let actor = constant_actor(&[0.0], &[50.0]);
        let out = sample_action(&actor, &[1.0], &mut ChaCha8Rng::seed_from_u64(0), true).unwrap();
        assert_eq!(out.log_std, vec![LOG_STD_MAX]);
        assert_eq!(out.sampled_action, vec![0.0]);
    }

    #[test]
    fn deterministic_mode_is_tanh_of_mean() {
        let actor = constant_actor(&[0.7, -0.2], &[0.0, 0.0]);
        let out = sample_action(&actor, &[1.0], &mut ChaCha8Rng::seed_from_u64(0), true).unwrap();
        assert_eq!(out.sampled_action, vec![tanh(0.7), tanh(-0.2)]);
    }

    #[test]
    fn non_finite_output_is_reported() {
        let actor = constant_actor(&[f64::NAN], &[0.0]);
        let err = sample_action(&actor, &[1.0], &mut ChaCha8Rng::seed_from_u64(0), true);
        assert!(matches!(err, Err(Error::NonFinite(_))));
    }
}
