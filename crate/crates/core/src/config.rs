//! Scenario and environment configuration. Powers are given in dBm and
//! converted to watts at the edge; everything downstream works in watts.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{db_to_amplitude, dbm_to_watts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Los,
    Nlos,
}

/// Log-distance path loss `κ = κ_a + 10·κ_b·log10(d) + κ_c`, with the
/// shadowing term `κ_c` drawn from a zero-mean normal of std `sigma_c` dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossParams {
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub sigma_c: f64,
    pub flavor: Flavor,
}

impl PathLossParams {
    pub const NLOS: Self = Self {
        kappa_a: 72.0,
        kappa_b: 2.92,
        sigma_c: 8.7,
        flavor: Flavor::Nlos,
    };

    pub const LOS: Self = Self {
        kappa_a: 61.4,
        kappa_b: 2.0,
        sigma_c: 5.8,
        flavor: Flavor::Los,
    };

    /// Same constants without shadowing.
    pub fn deterministic(self) -> Self {
        Self {
            sigma_c: 0.0,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_b > 0.0) || !(self.sigma_c >= 0.0) || !self.kappa_a.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "path loss parameters out of range: {self:?}"
            )));
        }
        Ok(())
    }
}

/// How the direct BS→UE links are modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectLink {
    Nlos,
    Los,
    Blocked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    /// One entry per base station, in meters. Its length is J.
    pub bs_positions: Vec<[f64; 2]>,
    pub ris_position: [f64; 2],
    pub ue_center: [f64; 2],
    pub ue_radius: f64,
    /// K.
    pub num_ue: usize,
    /// N, antennas per base station.
    pub bs_antennas: usize,
    /// M_h, RIS elements along the horizontal axis.
    pub ris_horizontal: usize,
    /// M_v, RIS elements along the vertical axis.
    pub ris_vertical: usize,
    /// L, number of NLOS paths on each BS→RIS link (plus one LOS path).
    pub nlos_paths: usize,
    /// B. `None` selects continuous phase steering.
    pub phase_bits: Option<u32>,
    pub max_power_dbm: f64,
    pub noise_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub los: PathLossParams,
    pub nlos: PathLossParams,
    pub direct_link: DirectLink,
    /// Drop the `1/√M` normalisation of the RIS phase vector.
    pub unit_modulus: bool,
}

impl NetworkConfig {
    /// Full-size deployment: three BSs, sixteen UEs, 32 antennas, 8×8 RIS.
    pub fn full_scale() -> Self {
        Self {
            bs_positions: vec![[0.0, 0.0], [200.0, 0.0], [0.0, 200.0]],
            ris_position: [50.0, 100.0],
            ue_center: [150.0, 100.0],
            ue_radius: 30.0,
            num_ue: 16,
            bs_antennas: 32,
            ris_horizontal: 8,
            ris_vertical: 8,
            nlos_paths: 5,
            phase_bits: Some(3),
            max_power_dbm: 30.0,
            noise_dbm: -85.0,
            tx_gain_dbi: 9.82,
            rx_gain_dbi: 0.0,
            los: PathLossParams::LOS,
            nlos: PathLossParams::NLOS,
            direct_link: DirectLink::Nlos,
            unit_modulus: false,
        }
    }

    /// Smallest scenario that still has an association choice: J=2, K=2,
    /// N=4, 2×2 RIS, one phase bit (32 decoded configurations).
    pub fn ci() -> Self {
        Self {
            bs_positions: vec![[0.0, 0.0], [200.0, 0.0]],
            num_ue: 2,
            bs_antennas: 4,
            ris_horizontal: 2,
            ris_vertical: 2,
            phase_bits: Some(1),
            ..Self::full_scale()
        }
    }

    /// J=3, K=6, N=8, 4×4 RIS, two phase bits.
    pub fn mid_scale() -> Self {
        Self {
            num_ue: 6,
            bs_antennas: 8,
            ris_horizontal: 4,
            ris_vertical: 4,
            phase_bits: Some(2),
            ..Self::full_scale()
        }
    }

    pub fn num_bs(&self) -> usize {
        self.bs_positions.len()
    }

    /// M = M_h·M_v.
    pub fn ris_elements(&self) -> usize {
        self.ris_horizontal * self.ris_vertical
    }

    pub fn max_power_watts(&self) -> f64 {
        dbm_to_watts(self.max_power_dbm)
    }

    pub fn noise_watts(&self) -> f64 {
        dbm_to_watts(self.noise_dbm)
    }

    /// `ξ_t·ξ_r` as a field amplitude.
    pub fn antenna_gain_amplitude(&self) -> f64 {
        db_to_amplitude(self.tx_gain_dbi) * db_to_amplitude(self.rx_gain_dbi)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.bs_positions.is_empty() {
            return bad("at least one base station is required");
        }
        if self.num_ue == 0 {
            return bad("at least one UE is required");
        }
        if self.bs_antennas == 0 || self.ris_horizontal == 0 || self.ris_vertical == 0 {
            return bad("antenna and RIS dimensions must be at least 1");
        }
        if self.phase_bits == Some(0) {
            return bad("phase_bits must be at least 1 (use null for continuous)");
        }
        if matches!(self.phase_bits, Some(b) if b > 16) {
            return bad("phase_bits above 16 is not supported; use null for continuous");
        }
        if !(self.ue_radius >= 0.0) {
            return bad("ue_radius must be non-negative");
        }
        if !self.max_power_dbm.is_finite() || !self.noise_dbm.is_finite() {
            return bad("powers must be finite");
        }
        self.los.validate()?;
        self.nlos.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub network: NetworkConfig,
    pub episodes: usize,
    pub steps_per_episode: usize,
    /// R_min in bps/Hz.
    pub r_min: f64,
    /// Weight of the QoS shortfall penalty `Σ_k max(0, R_min − R_k)`.
    pub penalty_weight: f64,
    /// Redraw UE positions at every reset instead of once per environment.
    pub resample_ue_positions: bool,
    /// Repair associations that leave a BS without users.
    pub strict_association: bool,
}

impl EnvConfig {
    pub fn new(network: NetworkConfig) -> Self {
        Self {
            network,
            episodes: 500,
            steps_per_episode: 100,
            r_min: 0.0,
            penalty_weight: 0.0,
            resample_ue_positions: false,
            strict_association: false,
        }
    }

    /// The CI scenario with its episode budget (150 × 50).
    pub fn ci() -> Self {
        Self {
            episodes: 150,
            steps_per_episode: 50,
            ..Self::new(NetworkConfig::ci())
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        if self.steps_per_episode == 0 {
            return Err(Error::InvalidConfig(
                "steps_per_episode must be at least 1".into(),
            ));
        }
        if !(self.penalty_weight >= 0.0) {
            return Err(Error::InvalidConfig(
                "penalty_weight must be non-negative".into(),
            ));
        }
        if !self.r_min.is_finite() {
            return Err(Error::InvalidConfig("r_min must be finite".into()));
        }
        if self.strict_association && self.network.num_ue < self.network.num_bs() {
            return Err(Error::InfeasibleAssociation {
                bs: self.network.num_bs(),
                ue: self.network.num_ue,
            });
        }
        Ok(())
    }
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self::full_scale()
    }
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self::new(NetworkConfig::full_scale())
    }
}
