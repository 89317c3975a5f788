#![allow(clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rissac_core::nn::{Adam, DenseNet};
use rissac_core::sac::{
    squash, temperature_loss, Batch, PolicyBatch, RewardScale, SacAgent, SacHyperparams,
};

const SD: usize = 5;
const AD: usize = 3;
const N: usize = 4;

fn agent(seed: u64) -> SacAgent {
    let hp = SacHyperparams {
        hidden: vec![8, 8],
        reward_scale: RewardScale::Fixed(1.0),
        initial_alpha: 0.3,
        ..SacHyperparams::default()
    };
    SacAgent::new(SD, AD, hp, seed).unwrap()
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn batch(rng: &mut ChaCha8Rng) -> Batch {
    Batch {
        size: N,
        states: gaussian(rng, N * SD),
        actions: (0..N * AD).map(|_| rng.random_range(-0.9..0.9)).collect(),
        rewards: gaussian(rng, N),
        next_states: gaussian(rng, N * SD),
    }
}

fn rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt()
        + numeric.iter().map(|b| b * b).sum::<f64>().sqrt();
    diff / scale.max(1e-300)
}

/// Central differences on the parameters of network `which`.
fn numeric_grad(agent: &mut SacAgent, which: usize, loss: impl Fn(&SacAgent) -> f64) -> Vec<f64> {
    let h = 1e-6;
    let n = agent.networks()[which].num_params();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let p0 = agent.networks()[which].params()[i];
        agent.networks_mut()[which].params_mut()[i] = p0 + h;
        let up = loss(agent);
        agent.networks_mut()[which].params_mut()[i] = p0 - h;
        let down = loss(agent);
        agent.networks_mut()[which].params_mut()[i] = p0;
        out.push((up - down) / (2.0 * h));
    }
    out
}

#[test]
fn actor_gradient_matches_finite_differences() {
    for seed in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = agent(seed);
        let states = gaussian(&mut rng, N * SD);
        let noise = gaussian(&mut rng, N * AD);
        let analytic = a.policy_loss(&states, N, &noise).unwrap().grad;
        let numeric = numeric_grad(&mut a, 0, |ag| {
            ag.policy_loss(&states, N, &noise).unwrap().loss
        });
        let e = rel_error(&analytic, &numeric);
        assert!(e < 1e-5, "seed {seed}: {e}");
    }
}

#[test]
fn critic_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut a = agent(9);
    let b = batch(&mut rng);
    let noise = gaussian(&mut rng, N * AD);
    let y = a.critic_targets(&b, &noise, 1.0).unwrap();
    let l = a.critic_losses(&b, &y).unwrap();
    let n1 = numeric_grad(&mut a, 1, |ag| ag.critic_losses(&b, &y).unwrap().loss1);
    let n2 = numeric_grad(&mut a, 2, |ag| ag.critic_losses(&b, &y).unwrap().loss2);
    assert!(rel_error(&l.grad1, &n1) < 1e-5);
    assert!(rel_error(&l.grad2, &n2) < 1e-5);
}

#[test]
fn temperature_gradient_matches_finite_differences() {
    let lp = [-1.2, 0.4, 2.5, -3.0];
    for la in [-2.0, 0.0, 0.7] {
        let (_, g) = temperature_loss(la, &lp, -3.0);
        let h = 1e-6;
        let fd = (temperature_loss(la + h, &lp, -3.0).0 - temperature_loss(la - h, &lp, -3.0).0)
            / (2.0 * h);
        assert!((g - fd).abs() <= 1e-7 * g.abs().max(1.0));
    }
}

fn density(mean: f64, log_std: f64, a: f64) -> f64 {
    let eps = (a.atanh() - mean) / log_std.exp();
    squash(mean, log_std, eps).1.exp()
}

#[test]
fn log_probability_matches_sample_histogram() {
    let (mean, log_std) = (0.3, -0.4);
    let draws = 1_000_000;
    let bins = 20;
    let mut counts = vec![0usize; bins];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..draws {
        let (a, _) = squash(mean, log_std, rng.sample(StandardNormal));
        let k = (((a + 1.0) / 2.0) * bins as f64) as usize;
        counts[k.min(bins - 1)] += 1;
    }
    let mut checked = 0;
    for (k, &c) in counts.iter().enumerate() {
        let (lo, hi) = (
            -1.0 + 2.0 * k as f64 / bins as f64,
            -1.0 + 2.0 * (k + 1) as f64 / bins as f64,
        );
        // Simpson on the closed-form density.
        let m = 200;
        let w = (hi - lo) / m as f64;
        let mut mass = 0.0;
        for i in 0..m {
            let x0 = lo + i as f64 * w;
            mass += w / 6.0
                * (density(mean, log_std, x0.max(-1.0 + 1e-12))
                    + 4.0 * density(mean, log_std, x0 + 0.5 * w)
                    + density(mean, log_std, (x0 + w).min(1.0 - 1e-12)));
        }
        if mass > 0.05 {
            let freq = c as f64 / draws as f64;
            assert!(
                (freq - mass).abs() <= 0.01 * mass,
                "bin {k}: {freq} vs {mass}"
            );
            checked += 1;
        }
    }
    assert!(checked >= 5);
}

fn linear_critic(coeffs: &[f64], bias: f64) -> DenseNet {
    let mut w = vec![0.0; SD];
    w.extend_from_slice(coeffs);
    w.push(bias);
    DenseNet::from_parameters(&[SD + AD, 1], w).unwrap()
}

#[test]
fn actor_follows_a_linear_critic() {
    let mut a = agent(4);
    a.set_log_alpha(-12.0);
    let c = [1.0, -1.0, 0.5];
    *a.networks_mut()[1] = linear_critic(&c, 0.0);
    *a.networks_mut()[2] = linear_critic(&c, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let states = gaussian(&mut rng, 32 * SD);
    let mean_action = |ag: &mut SacAgent| {
        let mut m = vec![0.0; AD];
        for b in 0..32 {
            let act = ag.act(&states[b * SD..(b + 1) * SD], true).unwrap();
            for i in 0..AD {
                m[i] += act[i] / 32.0;
            }
        }
        m
    };
    let before = mean_action(&mut a);
    let mut adam = Adam::new(a.networks()[0].num_params(), 1e-2);
    for _ in 0..300 {
        let noise = gaussian(&mut rng, 32 * AD);
        let g = a.policy_loss(&states, 32, &noise).unwrap().grad;
        adam.step(a.networks_mut()[0].params_mut(), &g);
    }
    let after = mean_action(&mut a);
    for i in 0..AD {
        assert!(c[i].signum() * (after[i] - before[i]) > 0.0);
        assert!(c[i].signum() * after[i] > 0.8, "{after:?}");
    }
}

#[test]
fn critic_target_uses_the_smaller_twin_and_entropy_bonus() {
    let mut a = agent(5);
    *a.networks_mut()[3] = linear_critic(&[0.0; AD], 1.0);
    *a.networks_mut()[4] = linear_critic(&[0.0; AD], 3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let b = batch(&mut rng);
    let noise = gaussian(&mut rng, N * AD);
    let y = a.critic_targets(&b, &noise, 2.0).unwrap();
    let pb = PolicyBatch::new(a.networks()[0], &b.next_states, N, &noise).unwrap();
    let gamma = a.hyperparams().discount;
    for k in 0..N {
        let want = 2.0 * b.rewards[k] + gamma * (1.0 - a.alpha() * pb.log_prob[k]);
        assert!((y[k] - want).abs() < 1e-12);
    }
    *a.networks_mut()[3] = linear_critic(&[0.0; AD], 5.0);
    let y2 = a.critic_targets(&b, &noise, 2.0).unwrap();
    for k in 0..N {
        assert!((y2[k] - y[k] - 2.0 * gamma).abs() < 1e-12);
    }
}
