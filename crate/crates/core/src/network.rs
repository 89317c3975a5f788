//! Association matrices, equivalent channels, zero-forcing precoding, SINR
//! and sum-rate for one configuration of the network.

use alloc::vec;
use alloc::vec::Vec;

use crate::channel::ChannelSet;
use crate::error::{check_len, Error, Result};
use crate::linalg::{hpd_inverse, norm_sqr, thin_qr, upper_triangular_inverse, CMat};
use crate::math::{log2, sqrt, C64};

/// Binary association `C = [c_0, c_1, …, c_K]` with one row per BS. Column
/// `c_0` marks the BS that owns the RIS; column `c_k` the BS(s) serving UE k.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AssociationMatrix {
    num_bs: usize,
    num_ue: usize,
    ris: Vec<bool>,
    ue: Vec<bool>,
}

impl AssociationMatrix {
    /// All-zero matrix (violates every equality constraint).
    pub fn empty(num_bs: usize, num_ue: usize) -> Self {
        Self {
            num_bs,
            num_ue,
            ris: vec![false; num_bs],
            ue: vec![false; num_bs * num_ue],
        }
    }

    /// One-hot columns from BS indices.
    pub fn from_indices(num_bs: usize, ris_bs: usize, ue_bs: &[usize]) -> Result<Self> {
        if ris_bs >= num_bs || ue_bs.iter().any(|&j| j >= num_bs) {
            return Err(Error::Domain("BS index out of range"));
        }
        let mut a = Self::empty(num_bs, ue_bs.len());
        a.ris[ris_bs] = true;
        for (k, &j) in ue_bs.iter().enumerate() {
            a.ue[j * a.num_ue + k] = true;
        }
        Ok(a)
    }

    pub fn num_bs(&self) -> usize {
        self.num_bs
    }

    pub fn num_ue(&self) -> usize {
        self.num_ue
    }

    /// `c_{j0}`.
    pub fn ris(&self, bs: usize) -> bool {
        self.ris[bs]
    }

    pub fn set_ris(&mut self, bs: usize, on: bool) {
        self.ris[bs] = on;
    }

    /// `c_{jk}`.
    pub fn get(&self, bs: usize, ue: usize) -> bool {
        self.ue[bs * self.num_ue + ue]
    }

    pub fn set(&mut self, bs: usize, ue: usize, on: bool) {
        self.ue[bs * self.num_ue + ue] = on;
    }

    /// `Q_j`, ascending UE indices.
    pub fn served(&self, bs: usize) -> Vec<usize> {
        (0..self.num_ue).filter(|&k| self.get(bs, k)).collect()
    }

    /// First BS with `c_{jk} = 1`.
    pub fn serving_bs(&self, ue: usize) -> Option<usize> {
        (0..self.num_bs).find(|&j| self.get(j, ue))
    }

    /// First BS with `c_{j0} = 1`.
    pub fn ris_bs(&self) -> Option<usize> {
        (0..self.num_bs).find(|&j| self.ris[j])
    }

    /// BS index per UE; `None` when some column is not one-hot.
    pub fn ue_indices(&self) -> Option<Vec<usize>> {
        (0..self.num_ue)
            .map(|k| {
                let count = (0..self.num_bs).filter(|&j| self.get(j, k)).count();
                if count == 1 {
                    self.serving_bs(k)
                } else {
                    None
                }
            })
            .collect()
    }
}

/// `h̃ = c_jk·(h_d^H + c_j0·h_r^H·Ψ·G)` as a length-N row vector, with `Ψ`
/// given by its diagonal.
pub fn equivalent_channel(
    h_d: &[C64],
    h_r: &[C64],
    g: &CMat,
    psi: &[C64],
    c_jk: bool,
    c_j0: bool,
) -> Result<Vec<C64>> {
    let n = h_d.len();
    check_len("G columns", n, g.cols())?;
    check_len("RIS-UE channel", g.rows(), h_r.len())?;
    check_len("RIS phase vector", g.rows(), psi.len())?;
    if !c_jk {
        return Ok(vec![C64::new(0.0, 0.0); n]);
    }
    let mut out: Vec<C64> = h_d.iter().map(|x| x.conj()).collect();
    if c_j0 {
        for (m, (hr, p)) in h_r.iter().zip(psi).enumerate() {
            let w = hr.conj() * p;
            for (o, gv) in out.iter_mut().zip(g.row(m)) {
                *o += w * gv;
            }
        }
    }
    Ok(out)
}

/// Zero-forcing precoder `W = √P·W₀/‖W₀‖_F` with `W₀ = H(HᴴH)⁻¹`, where the
/// columns of `H` are the conjugated user channels `h̃ᴴ`. Computed through
/// a thin QR of `H` (`W₀ = Q·R⁻ᴴ`). Rank-deficient input is rejected.
pub fn zf_precoder(h: &CMat, total_power: f64) -> Result<CMat> {
    let (q, r) = thin_qr(h)?;
    let rinv = upper_triangular_inverse(&r)?;
    let mut w = q.matmul(&rinv.conj_transpose())?;
    normalise_power(&mut w, total_power);
    Ok(w)
}

/// Tikhonov-regularised fallback `W₀ = H(HᴴH + εI)⁻¹` with
/// `ε = 1e−9·tr(HᴴH)/Q`. An all-zero `H` yields an all-zero precoder.
pub fn zf_precoder_regularized(h: &CMat, total_power: f64) -> CMat {
    let q = h.cols();
    let mut gram = match h.conj_transpose().matmul(h) {
        Ok(g) => g,
        Err(_) => return CMat::zeros(h.rows(), q),
    };
    let trace: f64 = (0..q).map(|i| gram[(i, i)].re).sum();
    if !(trace > 0.0) {
        return CMat::zeros(h.rows(), q);
    }
    let eps = 1e-9 * trace / q as f64;
    for i in 0..q {
        gram[(i, i)] += eps;
    }
    let mut w = match hpd_inverse(&gram).and_then(|inv| h.matmul(&inv)) {
        Ok(w) => w,
        Err(_) => return CMat::zeros(h.rows(), q),
    };
    normalise_power(&mut w, total_power);
    w
}

/// Exact zero forcing, falling back to the regularised inverse.
pub fn precoder(h: &CMat, total_power: f64) -> CMat {
    zf_precoder(h, total_power).unwrap_or_else(|_| zf_precoder_regularized(h, total_power))
}

fn normalise_power(w: &mut CMat, total_power: f64) {
    let norm = w.frobenius_norm();
    if norm > 0.0 {
        w.scale(sqrt(total_power) / norm);
    }
}

/// SINR matrix (J×K). `equivalent[j][k]` is `h̃_{j,k}`, `precoders[j]` holds
/// one column per UE in `served[j]` (same order).
pub fn compute_sinr(
    equivalent: &[Vec<Vec<C64>>],
    precoders: &[CMat],
    served: &[Vec<usize>],
    noise_power: f64,
) -> Vec<Vec<f64>> {
    let num_ue = equivalent.first().map_or(0, |r| r.len());
    let mut sinr = vec![vec![0.0; num_ue]; equivalent.len()];
    for (j, users) in served.iter().enumerate() {
        let w = &precoders[j];
        for (p, &k) in users.iter().enumerate() {
            let h = &equivalent[j][k];
            let mut signal = 0.0;
            let mut interference = 0.0;
            for col in 0..users.len() {
                let mut acc = C64::new(0.0, 0.0);
                for (n, hv) in h.iter().enumerate() {
                    acc += hv * w[(n, col)];
                }
                if col == p {
                    signal = acc.norm_sqr();
                } else {
                    interference += acc.norm_sqr();
                }
            }
            sinr[j][k] = signal / (interference + noise_power);
        }
    }
    sinr
}

/// Per-UE rates `R_k = Σ_j log2(1 + γ_{j,k})` and their sum.
pub fn sum_rate(sinr: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let num_ue = sinr.first().map_or(0, |r| r.len());
    let mut rates = vec![0.0; num_ue];
    for row in sinr {
        for (r, g) in rates.iter_mut().zip(row) {
            *r += log2(1.0 + g);
        }
    }
    let total = rates.iter().sum();
    (rates, total)
}

/// Everything derived from one (Ψ, C) choice on fixed channels.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    /// `h̃_{j,k}`, indexed `[j][k]`.
    pub equivalent_channels: Vec<Vec<Vec<C64>>>,
    /// `Q_j` per BS.
    pub served: Vec<Vec<usize>>,
    /// `W_j`, N×|Q_j|.
    pub precoders: Vec<CMat>,
    pub sinr: Vec<Vec<f64>>,
    pub rates: Vec<f64>,
    pub sum_rate: f64,
    pub noise_power: f64,
    /// `P_j` per BS.
    pub power_budget: Vec<f64>,
}

/// Evaluates the downlink for phase vector `psi` (`None` removes the RIS
/// entirely) and association `assoc`, with every BS transmitting at
/// `power` watts.
pub fn evaluate(
    channels: &ChannelSet,
    psi: Option<&[C64]>,
    assoc: &AssociationMatrix,
    power: f64,
    noise_power: f64,
) -> Result<LinkBudget> {
    let (num_bs, num_ue) = (channels.num_bs(), channels.num_ue());
    check_len("association rows", num_bs, assoc.num_bs())?;
    check_len("association columns", num_ue, assoc.num_ue())?;
    let zero_psi;
    let (psi, ris_enabled) = match psi {
        Some(p) => (p, true),
        None => {
            zero_psi = vec![C64::new(0.0, 0.0); channels.ris_ue.first().map_or(0, |h| h.len())];
            (&zero_psi[..], false)
        }
    };
    let mut equivalent = Vec::with_capacity(num_bs);
    let mut served = Vec::with_capacity(num_bs);
    let mut precoders = Vec::with_capacity(num_bs);
    for j in 0..num_bs {
        let c_j0 = ris_enabled && assoc.ris(j);
        let row = (0..num_ue)
            .map(|k| {
                equivalent_channel(
                    &channels.direct[j][k],
                    &channels.ris_ue[k],
                    &channels.bs_ris[j],
                    psi,
                    assoc.get(j, k),
                    c_j0,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let users = assoc.served(j);
        let n = channels.direct[j].first().map_or(0, |h| h.len());
        let conj_cols: Vec<Vec<C64>> = users
            .iter()
            .map(|&k| row[k].iter().map(|x| x.conj()).collect())
            .collect();
        let cols: Vec<&[C64]> = conj_cols.iter().map(|c| &c[..]).collect();
        let h = CMat::from_columns(n, &cols)?;
        precoders.push(if users.is_empty() {
            CMat::zeros(n, 0)
        } else {
            precoder(&h, power)
        });
        equivalent.push(row);
        served.push(users);
    }
    let sinr = compute_sinr(&equivalent, &precoders, &served, noise_power);
    let (rates, total) = sum_rate(&sinr);
    Ok(LinkBudget {
        equivalent_channels: equivalent,
        served,
        precoders,
        sinr,
        rates,
        sum_rate: total,
        noise_power,
        power_budget: vec![power; num_bs],
    })
}

/// Which constraints of the sum-rate problem a configuration meets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintReport {
    /// Per UE, `R_k ≥ R_min`.
    pub min_rate: Vec<bool>,
    /// Per BS, `Σ_k ‖w_{j,k}‖² ≤ P_j`.
    pub power: Vec<bool>,
    /// Per UE, exactly one serving BS.
    pub single_serving_bs: Vec<bool>,
    /// Per BS, at least one served UE.
    pub bs_serves_someone: Vec<bool>,
    /// Exactly one BS owns the RIS.
    pub single_ris_owner: bool,
}

impl ConstraintReport {
    pub fn min_rate_ok(&self) -> bool {
        self.min_rate.iter().all(|&b| b)
    }

    pub fn power_ok(&self) -> bool {
        self.power.iter().all(|&b| b)
    }

    pub fn single_serving_ok(&self) -> bool {
        self.single_serving_bs.iter().all(|&b| b)
    }

    pub fn nonempty_ok(&self) -> bool {
        self.bs_serves_someone.iter().all(|&b| b)
    }

    pub fn all_ok(&self) -> bool {
        self.min_rate_ok()
            && self.power_ok()
            && self.single_serving_ok()
            && self.nonempty_ok()
            && self.single_ris_owner
    }
}

pub fn check_constraints(
    assoc: &AssociationMatrix,
    budget: &LinkBudget,
    r_min: f64,
) -> ConstraintReport {
    let min_rate = budget.rates.iter().map(|&r| r >= r_min).collect();
    let power = budget
        .precoders
        .iter()
        .zip(&budget.power_budget)
        .map(|(w, &p)| w.frobenius_norm_sqr() <= p + 1e-9 * p.max(1.0))
        .collect();
    let single_serving_bs = (0..assoc.num_ue())
        .map(|k| (0..assoc.num_bs()).filter(|&j| assoc.get(j, k)).count() == 1)
        .collect();
    let bs_serves_someone = (0..assoc.num_bs())
        .map(|j| (0..assoc.num_ue()).any(|k| assoc.get(j, k)))
        .collect();
    let single_ris_owner = (0..assoc.num_bs()).filter(|&j| assoc.ris(j)).count() == 1;
    ConstraintReport {
        min_rate,
        power,
        single_serving_bs,
        bs_serves_someone,
        single_ris_owner,
    }
}

/// `‖h_d^H + c_j0·h_r^H Ψ G_j‖` for every (j, k) as if UE k were served by
/// BS j, with the RIS on `ris_bs`.
pub fn candidate_channel_norms(
    channels: &ChannelSet,
    psi: Option<&[C64]>,
    ris_bs: Option<usize>,
) -> Result<Vec<Vec<f64>>> {
    let m = channels.ris_ue.first().map_or(0, |h| h.len());
    let zero = vec![C64::new(0.0, 0.0); m];
    let psi = psi.unwrap_or(&zero);
    (0..channels.num_bs())
        .map(|j| {
            (0..channels.num_ue())
                .map(|k| {
                    let h = equivalent_channel(
                        &channels.direct[j][k],
                        &channels.ris_ue[k],
                        &channels.bs_ris[j],
                        psi,
                        true,
                        ris_bs == Some(j),
                    )?;
                    Ok(sqrt(norm_sqr(&h)))
                })
                .collect()
        })
        .collect()
}

/// Gives every BS at least one UE. BSs are visited in ascending order; an
/// empty BS takes, among UEs whose BS serves two or more, the one with the
/// largest `norms[j][k]` (lowest index on ties).
pub fn repair_association(
    assoc: &AssociationMatrix,
    norms: &[Vec<f64>],
) -> Result<AssociationMatrix> {
    let (num_bs, num_ue) = (assoc.num_bs(), assoc.num_ue());
    if num_ue < num_bs {
        return Err(Error::InfeasibleAssociation {
            bs: num_bs,
            ue: num_ue,
        });
    }
    check_len("channel norm rows", num_bs, norms.len())?;
    let mut ue_bs = assoc
        .ue_indices()
        .ok_or(Error::Domain("every UE must have exactly one serving BS"))?;
    let ris_bs = match (0..num_bs).filter(|&j| assoc.ris(j)).count() {
        1 => assoc.ris_bs().unwrap_or(0),
        _ => return Err(Error::Domain("exactly one BS must own the RIS")),
    };
    for j in 0..num_bs {
        check_len("channel norm columns", num_ue, norms[j].len())?;
        if ue_bs.contains(&j) {
            continue;
        }
        let mut load = vec![0usize; num_bs];
        for &b in &ue_bs {
            load[b] += 1;
        }
        let mut best: Option<usize> = None;
        for k in 0..num_ue {
            if load[ue_bs[k]] < 2 {
                continue;
            }
            if best.is_none_or(|b| norms[j][k] > norms[j][b]) {
                best = Some(k);
            }
        }
        match best {
            Some(k) => ue_bs[k] = j,
            None => {
                return Err(Error::InfeasibleAssociation {
                    bs: num_bs,
                    ue: num_ue,
                })
            }
        }
    }
    AssociationMatrix::from_indices(num_bs, ris_bs, &ue_bs)
}
