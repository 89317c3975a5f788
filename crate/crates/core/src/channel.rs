//! Node placement, path loss, array responses and the random channel draws
//! for one coherence interval.
//!
//! RIS elements are flattened as `m = i_v·M_h + i_h` (vertical index slow,
//! horizontal index fast). Both the RIS steering vector here and the RIS phase
//! vector in [`crate::ris`] use this order.
//!
//! Each link draws from its own ChaCha stream derived from the realisation
//! seed, and every link draws its gains and angles before the array response
//! is expanded. Changing `N` or `M` therefore keeps the per-path gains and
//! angles of a realisation unchanged.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::{DirectLink, NetworkConfig, PathLossParams};
use crate::error::{Error, Result};
use crate::linalg::{kron, CMat};
use crate::math::{atan2, cis, db_to_power, log10, sin, sqrt, C64, PI, TAU};

pub type Point = [f64; 2];

fn distance(a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    sqrt(dx * dx + dy * dy)
}

fn azimuth(from: Point, to: Point) -> f64 {
    atan2(to[1] - from[1], to[0] - from[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub bs_positions: Vec<Point>,
    pub ris_position: Point,
    pub ue_region_center: Point,
    pub ue_region_radius: f64,
    pub ue_positions: Vec<Point>,
}

impl Scenario {
    /// Places the UEs uniformly over the configured disc.
    pub fn sample<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> Self {
        let ue_positions = (0..config.num_ue)
            .map(|_| {
                let r = config.ue_radius * sqrt(rng.random::<f64>());
                let t = TAU * rng.random::<f64>();
                [
                    config.ue_center[0] + r * crate::math::cos(t),
                    config.ue_center[1] + r * sin(t),
                ]
            })
            .collect();
        Self {
            bs_positions: config.bs_positions.clone(),
            ris_position: config.ris_position,
            ue_region_center: config.ue_center,
            ue_region_radius: config.ue_radius,
            ue_positions,
        }
    }

    /// Uses explicit UE positions; each must lie within the UE disc.
    pub fn with_ue_positions(config: &NetworkConfig, ue_positions: Vec<Point>) -> Result<Self> {
        if ue_positions.len() != config.num_ue {
            return Err(Error::DimensionMismatch {
                what: "UE positions",
                expected: config.num_ue,
                got: ue_positions.len(),
            });
        }
        let tol = 1e-9 * (1.0 + config.ue_radius);
        if ue_positions
            .iter()
            .any(|p| distance(*p, config.ue_center) > config.ue_radius + tol)
        {
            return Err(Error::Domain("UE position outside the UE region"));
        }
        Ok(Self {
            bs_positions: config.bs_positions.clone(),
            ris_position: config.ris_position,
            ue_region_center: config.ue_center,
            ue_region_radius: config.ue_radius,
            ue_positions,
        })
    }

    pub fn num_bs(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn num_ue(&self) -> usize {
        self.ue_positions.len()
    }

    pub fn bs_ris_distance(&self, bs: usize) -> f64 {
        distance(self.bs_positions[bs], self.ris_position)
    }

    pub fn ris_ue_distance(&self, ue: usize) -> f64 {
        distance(self.ris_position, self.ue_positions[ue])
    }

    pub fn bs_ue_distance(&self, bs: usize, ue: usize) -> f64 {
        distance(self.bs_positions[bs], self.ue_positions[ue])
    }

    /// Index of the geometrically closest BS to `p` (lowest index on ties).
    pub fn nearest_bs(&self, p: Point) -> usize {
        let mut best = 0;
        for j in 1..self.bs_positions.len() {
            if distance(self.bs_positions[j], p) < distance(self.bs_positions[best], p) {
                best = j;
            }
        }
        best
    }
}

/// ULA response `[1, e^{jπ sin θ}, …, e^{jπ(n−1) sin θ}]`.
pub fn steering_vector_ula(angle: f64, n: usize) -> Result<Vec<C64>> {
    if n == 0 {
        return Err(Error::ZeroDimension("array size"));
    }
    let s = sin(angle);
    Ok((0..n).map(|i| cis(PI * i as f64 * s)).collect())
}

/// Planar-array response `a_el(elevation) ⊗ a_az(azimuth)` for an
/// `m_h × m_v` surface.
pub fn steering_vector_upa(
    azimuth: f64,
    elevation: f64,
    m_h: usize,
    m_v: usize,
) -> Result<Vec<C64>> {
    if m_h == 0 || m_v == 0 {
        return Err(Error::ZeroDimension("RIS dimension"));
    }
    let el = steering_vector_ula(elevation, m_v)?;
    let az = steering_vector_ula(azimuth, m_h)?;
    Ok(kron(&el, &az))
}

pub fn path_loss_db(distance: f64, params: &PathLossParams, shadowing_db: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::Domain("distance must be positive"));
    }
    Ok(params.kappa_a + 10.0 * params.kappa_b * log10(distance) + shadowing_db)
}

/// Draws `α ~ CN(0, 10^{−0.1·loss_db})`.
pub fn draw_complex_gain<R: Rng + ?Sized>(loss_db: f64, rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let variance = db_to_power(-loss_db);
    if variance == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let s = sqrt(variance / 2.0);
    C64::new(re * s, im * s)
}

fn draw_shadowing<R: Rng + ?Sized>(params: &PathLossParams, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    params.sigma_c * z
}

fn uniform_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(-PI / 2.0..=PI / 2.0)
}

/// One propagation path of the BS→RIS channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisPath {
    pub gain: C64,
    pub departure: f64,
    pub arrival_azimuth: f64,
    pub arrival_elevation: f64,
}

/// `G = Σ_ℓ α_ℓ · a_M^H(arrival) · a_N(departure)`, i.e.
/// `G[m][n] = Σ_ℓ α_ℓ · conj(a_M[m]) · a_N[n]`.
pub fn compose_bs_ris(paths: &[RisPath], m_h: usize, m_v: usize, n: usize) -> Result<CMat> {
    if n == 0 {
        return Err(Error::ZeroDimension("BS antennas"));
    }
    if m_h == 0 || m_v == 0 {
        return Err(Error::ZeroDimension("RIS dimension"));
    }
    let mut g = CMat::zeros(m_h * m_v, n);
    for p in paths {
        let a_m = steering_vector_upa(p.arrival_azimuth, p.arrival_elevation, m_h, m_v)?;
        let a_n = steering_vector_ula(p.departure, n)?;
        for (r, am) in a_m.iter().enumerate() {
            let left = p.gain * am.conj();
            for (c, an) in a_n.iter().enumerate() {
                g[(r, c)] += left * an;
            }
        }
    }
    Ok(g)
}

/// Draws the `L + 1` paths of the BS→RIS link. Path 0 is the geometric LOS
/// path; paths `1..=L` are NLOS with uniformly drawn angles.
pub fn draw_bs_ris_paths<R: Rng + ?Sized>(
    config: &NetworkConfig,
    scenario: &Scenario,
    bs: usize,
    rng: &mut R,
) -> Result<Vec<RisPath>> {
    let d = scenario.bs_ris_distance(bs);
    let bs_pos = scenario.bs_positions[bs];
    let mut paths = Vec::with_capacity(config.nlos_paths + 1);
    for l in 0..=config.nlos_paths {
        let params = if l == 0 { &config.los } else { &config.nlos };
        let loss = path_loss_db(d, params, draw_shadowing(params, rng))?;
        let gain = draw_complex_gain(loss, rng);
        let (departure, arrival_azimuth) = if l == 0 {
            (
                azimuth(bs_pos, scenario.ris_position),
                azimuth(scenario.ris_position, bs_pos),
            )
        } else {
            (uniform_angle(rng), uniform_angle(rng))
        };
        let arrival_elevation = uniform_angle(rng);
        paths.push(RisPath {
            gain,
            departure,
            arrival_azimuth,
            arrival_elevation,
        });
    }
    Ok(paths)
}

pub fn generate_bs_ris_channel<R: Rng + ?Sized>(
    config: &NetworkConfig,
    scenario: &Scenario,
    bs: usize,
    rng: &mut R,
) -> Result<CMat> {
    let paths = draw_bs_ris_paths(config, scenario, bs, rng)?;
    compose_bs_ris(
        &paths,
        config.ris_horizontal,
        config.ris_vertical,
        config.bs_antennas,
    )
}

/// `h_r = α·ξ_t·ξ_r·a_M(azimuth, elevation)`.
pub fn compose_ris_ue(
    gain: C64,
    antenna_gain: f64,
    azimuth: f64,
    elevation: f64,
    m_h: usize,
    m_v: usize,
) -> Result<Vec<C64>> {
    let a = steering_vector_upa(azimuth, elevation, m_h, m_v)?;
    let s = gain * antenna_gain;
    Ok(a.into_iter().map(|x| x * s).collect())
}

/// RIS→UE LOS channel. The RIS-UE hop does not depend on which BS owns the
/// RIS, so one vector per UE serves every BS.
pub fn generate_ris_ue_channel<R: Rng + ?Sized>(
    config: &NetworkConfig,
    scenario: &Scenario,
    ue: usize,
    rng: &mut R,
) -> Result<Vec<C64>> {
    if ue >= scenario.num_ue() {
        return Err(Error::Domain("UE index out of range"));
    }
    let loss = path_loss_db(
        scenario.ris_ue_distance(ue),
        &config.los,
        draw_shadowing(&config.los, rng),
    )?;
    let gain = draw_complex_gain(loss, rng);
    let departure = azimuth(scenario.ris_position, scenario.ue_positions[ue]);
    let elevation = uniform_angle(rng);
    compose_ris_ue(
        gain,
        config.antenna_gain_amplitude(),
        departure,
        elevation,
        config.ris_horizontal,
        config.ris_vertical,
    )
}

/// `h_d = α·ξ_t·ξ_r·a_N(departure)`.
pub fn compose_direct(gain: C64, antenna_gain: f64, departure: f64, n: usize) -> Result<Vec<C64>> {
    let a = steering_vector_ula(departure, n)?;
    let s = gain * antenna_gain;
    Ok(a.into_iter().map(|x| x * s).collect())
}

/// Single-path BS→UE channel; all zeros when direct links are blocked.
pub fn generate_direct_channel<R: Rng + ?Sized>(
    config: &NetworkConfig,
    scenario: &Scenario,
    bs: usize,
    ue: usize,
    rng: &mut R,
) -> Result<Vec<C64>> {
    if bs >= scenario.num_bs() || ue >= scenario.num_ue() {
        return Err(Error::Domain("BS or UE index out of range"));
    }
    let params = match config.direct_link {
        DirectLink::Blocked => {
            return Ok(vec![C64::new(0.0, 0.0); config.bs_antennas]);
        }
        DirectLink::Nlos => &config.nlos,
        DirectLink::Los => &config.los,
    };
    let loss = path_loss_db(
        scenario.bs_ue_distance(bs, ue),
        params,
        draw_shadowing(params, rng),
    )?;
    let gain = draw_complex_gain(loss, rng);
    let departure = azimuth(scenario.bs_positions[bs], scenario.ue_positions[ue]);
    compose_direct(
        gain,
        config.antenna_gain_amplitude(),
        departure,
        config.bs_antennas,
    )
}

/// All channels of one coherence interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// `G_j`, M×N per BS.
    pub bs_ris: Vec<CMat>,
    /// `h_r,k`, length M per UE.
    pub ris_ue: Vec<Vec<C64>>,
    /// `h_d,j,k`, length N, indexed `[j][k]`.
    pub direct: Vec<Vec<Vec<C64>>>,
}

const STREAM_BS_RIS: u64 = 1 << 40;
const STREAM_RIS_UE: u64 = 2 << 40;
const STREAM_DIRECT: u64 = 3 << 40;

/// Derives the RNG used for one link of one realisation.
pub fn link_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl ChannelSet {
    pub fn draw(config: &NetworkConfig, scenario: &Scenario, seed: u64) -> Result<Self> {
        let (j_count, k_count) = (scenario.num_bs(), scenario.num_ue());
        let bs_ris = (0..j_count)
            .map(|j| {
                let mut rng = link_rng(seed, STREAM_BS_RIS | j as u64);
                generate_bs_ris_channel(config, scenario, j, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        let ris_ue = (0..k_count)
            .map(|k| {
                let mut rng = link_rng(seed, STREAM_RIS_UE | k as u64);
                generate_ris_ue_channel(config, scenario, k, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        let direct = (0..j_count)
            .map(|j| {
                (0..k_count)
                    .map(|k| {
                        let mut rng = link_rng(seed, STREAM_DIRECT | ((j as u64) << 20) | k as u64);
                        generate_direct_channel(config, scenario, j, k, &mut rng)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let set = Self {
            bs_ris,
            ris_ue,
            direct,
        };
        if !set.is_finite() {
            return Err(Error::NonFinite("channel generation"));
        }
        Ok(set)
    }

    pub fn num_bs(&self) -> usize {
        self.bs_ris.len()
    }

    pub fn num_ue(&self) -> usize {
        self.ris_ue.len()
    }

    pub fn is_finite(&self) -> bool {
        let ok = |v: &C64| v.re.is_finite() && v.im.is_finite();
        self.bs_ris.iter().all(|g| g.as_slice().iter().all(ok))
            && self.ris_ue.iter().flatten().all(ok)
            && self.direct.iter().flatten().flatten().all(ok)
    }
}
