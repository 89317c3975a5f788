//! RIS passive beamforming: the two-angle phase vector and the quantised
//! steering-angle codebook.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{cis, cos, floor, sin, sqrt, C64, PI, TAU};

/// Uniform angle grid `{2π·i/2^B : i = 0..2^B}`, or continuous steering when
/// `bits` is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCodebook {
    bits: Option<u32>,
    values: Vec<f64>,
}

impl PhaseCodebook {
    pub fn new(bits: Option<u32>) -> Result<Self> {
        match bits {
            Some(0) => Err(Error::Domain("a phase codebook needs at least one bit")),
            Some(b) if b > 16 => Err(Error::Domain("phase codebooks are limited to 16 bits")),
            Some(b) => {
                let n = 1usize << b;
                let values = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
                Ok(Self { bits, values })
            }
            None => Ok(Self {
                bits: None,
                values: Vec::new(),
            }),
        }
    }

    pub fn continuous() -> Self {
        Self {
            bits: None,
            values: Vec::new(),
        }
    }

    pub fn bits(&self) -> Option<u32> {
        self.bits
    }

    pub fn is_continuous(&self) -> bool {
        self.bits.is_none()
    }

    /// Sorted codebook angles; empty in continuous mode.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Maps an actor output in `[−1, 1]` onto the codebook. Out-of-range
    /// inputs are clamped.
    pub fn quantize(&self, raw: f64) -> f64 {
        let raw = clamp_unit(raw);
        if self.is_continuous() {
            return (raw + 1.0) * PI;
        }
        self.values[bin_index(raw, self.values.len())]
    }
}

pub fn build_codebook(bits: Option<u32>) -> Result<PhaseCodebook> {
    PhaseCodebook::new(bits)
}

pub fn quantize_angle(raw: f64, codebook: &PhaseCodebook) -> f64 {
    codebook.quantize(raw)
}

pub(crate) fn clamp_unit(raw: f64) -> f64 {
    if raw.is_nan() {
        0.0
    } else {
        raw.clamp(-1.0, 1.0)
    }
}

/// `floor((raw+1)/2·n)` clamped to `0..n`.
pub(crate) fn bin_index(raw: f64, n: usize) -> usize {
    let idx = floor((clamp_unit(raw) + 1.0) / 2.0 * n as f64);
    if idx < 0.0 {
        0
    } else {
        (idx as usize).min(n - 1)
    }
}

/// Phase vector for steering angles `theta` (azimuth) and `phi`
/// (elevation), element `i_v·M_h + i_h` equal to `f_h(i_h)·f_v(i_v)` with
///
/// `f_h(i) = exp(−jπ·cos φ·sin θ·i)/√M_h`, `f_v(i) = exp(−jπ·sin φ·i)/√M_v`.
pub fn phase_vector(theta: f64, phi: f64, m_h: usize, m_v: usize) -> Result<Vec<C64>> {
    if m_h == 0 || m_v == 0 {
        return Err(Error::ZeroDimension("RIS dimension"));
    }
    let sh = cos(phi) * sin(theta);
    let sv = sin(phi);
    let nh = 1.0 / sqrt(m_h as f64);
    let nv = 1.0 / sqrt(m_v as f64);
    let f_h: Vec<C64> = (0..m_h).map(|i| cis(-PI * sh * i as f64) * nh).collect();
    let f_v: Vec<C64> = (0..m_v).map(|i| cis(-PI * sv * i as f64) * nv).collect();
    Ok(crate::linalg::kron(&f_v, &f_h))
}

/// Configured RIS: steering angles plus the diagonal of `Ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RisState {
    pub theta: f64,
    pub phi: f64,
    /// Diagonal of `Ψ = diag(f)`.
    pub f: Vec<C64>,
}

impl RisState {
    /// With `unit_modulus` the `1/√M` normalisation is dropped so every
    /// element has unit magnitude.
    pub fn new(theta: f64, phi: f64, m_h: usize, m_v: usize, unit_modulus: bool) -> Result<Self> {
        let mut f = phase_vector(theta, phi, m_h, m_v)?;
        if unit_modulus {
            let s = sqrt((m_h * m_v) as f64);
            for v in &mut f {
                *v *= s;
            }
        }
        Ok(Self { theta, phi, f })
    }

    pub fn psi_diagonal(&self) -> &[C64] {
        &self.f
    }
}
