//! Reference schemes evaluated on an environment's current channels: random
//! association, no RIS with optimised association, and the exhaustive
//! oracle over the decoded action space.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{bin_center, RisEnv};
use crate::error::{Error, Result};
use crate::linalg::norm_sqr;
use crate::network::{AssociationMatrix, LinkBudget};

pub const NO_RIS_ENUMERATION_LIMIT: u128 = 1_000_000;
pub const DEFAULT_ORACLE_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub mean_reward: f64,
    pub mean_sum_rate: f64,
    pub mean_rates: Vec<f64>,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub reward: f64,
    pub sum_rate: f64,
    pub rates: Vec<f64>,
    pub theta: f64,
    pub phi: f64,
    pub ris_bs: Option<usize>,
    pub ue_bs: Vec<usize>,
    pub evaluated: u64,
}

/// Mean over `trials` uniformly drawn associations and codebook angles.
pub fn random_association<R: Rng + ?Sized>(
    env: &RisEnv,
    rng: &mut R,
    trials: usize,
) -> Result<BaselineResult> {
    if trials == 0 {
        return Err(Error::InvalidConfig(
            "random association needs at least one trial".into(),
        ));
    }
    let net = env.network();
    let (j, k) = (net.num_bs(), net.num_ue);
    let codebook = env.codebook();
    let angle = |rng: &mut R| -> f64 {
        if codebook.is_continuous() {
            rng.random_range(-1.0..=1.0)
        } else {
            let n = codebook.values().len();
            bin_center(rng.random_range(0..n), n)
        }
    };
    let mut out = BaselineResult {
        mean_reward: 0.0,
        mean_sum_rate: 0.0,
        mean_rates: vec![0.0; k],
        trials,
    };
    for _ in 0..trials {
        let mut raw = vec![angle(rng), angle(rng)];
        for _ in 0..k + 1 {
            raw.push(bin_center(rng.random_range(0..j), j));
        }
        let a = env.decode(&raw)?;
        let b = env.evaluate(a.theta, a.phi, &a.assoc)?;
        out.mean_reward += env.reward_of(&b);
        out.mean_sum_rate += b.sum_rate;
        for (m, r) in out.mean_rates.iter_mut().zip(&b.rates) {
            *m += r;
        }
    }
    let t = trials as f64;
    out.mean_reward /= t;
    out.mean_sum_rate /= t;
    out.mean_rates.iter_mut().for_each(|m| *m /= t);
    Ok(out)
}

/// Next assignment in little-endian base-`j` counting; false on wrap-around.
fn advance(digits: &mut [usize], j: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < j {
            return true;
        }
        *d = 0;
    }
    false
}

fn every_bs_serves(ue_bs: &[usize], j: usize) -> bool {
    (0..j).all(|b| ue_bs.contains(&b))
}

fn result_of(
    env: &RisEnv,
    b: &LinkBudget,
    theta: f64,
    phi: f64,
    ris_bs: Option<usize>,
    ue_bs: &[usize],
) -> SearchResult {
    SearchResult {
        reward: env.reward_of(b),
        sum_rate: b.sum_rate,
        rates: b.rates.clone(),
        theta,
        phi,
        ris_bs,
        ue_bs: ue_bs.to_vec(),
        evaluated: 0,
    }
}

/// RIS removed; association by enumeration when `J^K` is at most
/// [`NO_RIS_ENUMERATION_LIMIT`], otherwise each UE joins the BS with the
/// strongest direct channel.
pub fn no_ris(env: &RisEnv) -> Result<SearchResult> {
    let net = env.network();
    let (j, k) = (net.num_bs(), net.num_ue);
    let strict = env.config().strict_association;
    let count = (j as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if count <= NO_RIS_ENUMERATION_LIMIT {
        let mut ue_bs = vec![0; k];
        let mut best: Option<SearchResult> = None;
        let mut evaluated = 0;
        loop {
            if !strict || every_bs_serves(&ue_bs, j) {
                let assoc = AssociationMatrix::from_indices(j, 0, &ue_bs)?;
                let b = env.evaluate_without_ris(&assoc)?;
                evaluated += 1;
                if best.as_ref().is_none_or(|r| env.reward_of(&b) > r.reward) {
                    best = Some(result_of(env, &b, 0.0, 0.0, None, &ue_bs));
                }
            }
            if !advance(&mut ue_bs, j) {
                break;
            }
        }
        let mut best = best.ok_or(Error::InfeasibleAssociation { bs: j, ue: k })?;
        best.evaluated = evaluated;
        return Ok(best);
    }
    let direct = &env.channels().direct;
    let ue_bs: Vec<usize> = (0..k)
        .map(|u| {
            let mut best = 0;
            for b in 1..j {
                if norm_sqr(&direct[b][u]) > norm_sqr(&direct[best][u]) {
                    best = b;
                }
            }
            best
        })
        .collect();
    let assoc = AssociationMatrix::from_indices(j, 0, &ue_bs)?;
    let b = env.evaluate_without_ris(&assoc)?;
    let mut r = result_of(env, &b, 0.0, 0.0, None, &ue_bs);
    r.evaluated = 1;
    Ok(r)
}

/// Number of decoded configurations the oracle visits: `|F|²·J·J^K`.
pub fn oracle_size(env: &RisEnv) -> Result<u128> {
    let codebook = env.codebook();
    if codebook.is_continuous() {
        return Err(Error::ContinuousCodebook);
    }
    let net = env.network();
    let f = codebook.values().len() as u128;
    let j = net.num_bs() as u128;
    Ok(j.checked_pow(net.num_ue as u32)
        .and_then(|c| c.checked_mul(f * f * j))
        .unwrap_or(u128::MAX))
}

/// Best reward over every `(θ, φ, c0, C)`; with `require_every_bs` set,
/// associations leaving a BS idle are skipped. Ties keep the first
/// configuration in enumeration order.
pub fn exhaustive_search(
    env: &RisEnv,
    budget: u128,
    require_every_bs: bool,
) -> Result<SearchResult> {
    let required = oracle_size(env)?;
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let net = env.network();
    let (j, k) = (net.num_bs(), net.num_ue);
    let values = env.codebook().values().to_vec();
    let mut best: Option<SearchResult> = None;
    let mut evaluated = 0;
    for &theta in &values {
        for &phi in &values {
            let ris = env.ris_state(theta, phi)?;
            for ris_bs in 0..j {
                let mut ue_bs = vec![0; k];
                loop {
                    if !require_every_bs || every_bs_serves(&ue_bs, j) {
                        let assoc = AssociationMatrix::from_indices(j, ris_bs, &ue_bs)?;
                        let b = crate::network::evaluate(
                            env.channels(),
                            Some(ris.psi_diagonal()),
                            &assoc,
                            net.max_power_watts(),
                            net.noise_watts(),
                        )?;
                        evaluated += 1;
                        if best.as_ref().is_none_or(|r| env.reward_of(&b) > r.reward) {
                            best = Some(result_of(env, &b, theta, phi, Some(ris_bs), &ue_bs));
                        }
                    }
                    if !advance(&mut ue_bs, j) {
                        break;
                    }
                }
            }
        }
    }
    let mut best = best.ok_or(Error::InfeasibleAssociation { bs: j, ue: k })?;
    best.evaluated = evaluated;
    Ok(best)
}

/// Fraction of entries strictly below each threshold.
pub fn outage_probability(mean_rates: &[f64], grid: &[f64]) -> Vec<f64> {
    if mean_rates.is_empty() {
        return vec![f64::NAN; grid.len()];
    }
    grid.iter()
        .map(|&r| mean_rates.iter().filter(|&&x| x < r).count() as f64 / mean_rates.len() as f64)
        .collect()
}
