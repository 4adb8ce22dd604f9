//! Web-browsing QoE model.
//!
//! The page download delay follows the TCP slow-start structure
//! `3 RTT + FS/r + L (MSS/r + RTT) - 2 MSS (2^L - 1)/r`, with `L` the number
//! of slow-start cycles, and the opinion score is logarithmic in that delay.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::World;

/// Bottom of the opinion scale ("poor").
pub const MOS_MIN: f64 = 1.0;
/// Top of the opinion scale ("excellent").
pub const MOS_MAX: f64 = 4.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QoeError {
    #[error("rate must be positive and finite, got {0} bit/s")]
    NonPositiveRate(f64),
    #[error("invalid MOS profile: {0}")]
    InvalidProfile(&'static str),
}

/// How the slow-start cycle count is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlowStartMode {
    /// Real-valued `L`, as the closed form produces it.
    #[default]
    Continuous,
    /// `L` floored to a whole number of cycles.
    Integer,
}

/// Per-user web-browsing QoE constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MosProfile {
    pub c1: f64,
    pub c2: f64,
    /// Round trip time in s.
    pub rtt: f64,
    /// Web page size in bits.
    pub fs: f64,
    /// Maximum segment size in bits.
    pub mss: f64,
    /// Weight of the delay-driven score.
    pub xi1: f64,
    /// Weight of the rate-driven score.
    pub xi2: f64,
    pub slow_start: SlowStartMode,
}

impl Default for MosProfile {
    fn default() -> Self {
        Self {
            c1: 1.120,
            c2: 4.6746,
            rtt: 0.1,
            fs: 1.0e6,
            mss: 11_680.0,
            xi1: 0.0,
            xi2: 1.0,
            slow_start: SlowStartMode::Continuous,
        }
    }
}

impl MosProfile {
    pub fn validate(&self) -> Result<(), QoeError> {
        let vals = [self.c1, self.c2, self.rtt, self.fs, self.mss, self.xi1, self.xi2];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(QoeError::InvalidProfile("non-finite field"));
        }
        if self.c1 <= 0.0 || self.c2 <= 0.0 {
            return Err(QoeError::InvalidProfile("c1 and c2 must be positive"));
        }
        if self.rtt <= 0.0 || self.fs <= 0.0 || self.mss <= 0.0 {
            return Err(QoeError::InvalidProfile("rtt, fs and mss must be positive"));
        }
        if self.xi1 < 0.0 || self.xi2 < 0.0 || (self.xi1 + self.xi2 - 1.0).abs() > 1e-12 {
            return Err(QoeError::InvalidProfile("xi1, xi2 must be non-negative and sum to 1"));
        }
        Ok(())
    }

    /// Weighted combination of a delay-driven and a rate-driven score.
    ///
    /// Web browsing uses the rate-driven score alone (`xi1 = 0`); the
    /// delay-driven score is not modelled here.
    pub fn combine(&self, delay_score: f64, rate_score: f64) -> f64 {
        self.xi1 * delay_score + self.xi2 * rate_score
    }

    /// Slow-start cycle count `L = max(0, min(L1, L2))` at rate `r`.
    pub fn slow_start_cycles(&self, r: f64) -> f64 {
        let l1 = (r * self.rtt / self.mss + 1.0).log2() - 1.0;
        let l2 = (self.fs / (2.0 * self.mss) + 1.0).log2() - 1.0;
        let l = l1.min(l2).max(0.0);
        match self.slow_start {
            SlowStartMode::Continuous => l,
            SlowStartMode::Integer => l.floor(),
        }
    }
}

/// Opinion score, always within `[MOS_MIN, MOS_MAX]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MosScore(f64);

impl MosScore {
    /// Clamp a raw score onto the opinion scale.
    pub fn from_raw(raw: f64) -> Self {
        Self(raw.clamp(MOS_MIN, MOS_MAX))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Page download delay in s at rate `r` bit/s.
pub fn page_delay(r: f64, profile: &MosProfile) -> Result<f64, QoeError> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(QoeError::NonPositiveRate(r));
    }
    let p = profile;
    let l = p.slow_start_cycles(r);
    Ok(3.0 * p.rtt + p.fs / r + l * (p.mss / r + p.rtt) - 2.0 * p.mss * (l.exp2() - 1.0) / r)
}

/// Unclamped score `-C1 ln(delay) + C2`.
pub fn raw_mos(r: f64, profile: &MosProfile) -> Result<f64, QoeError> {
    let delay = page_delay(r, profile)?;
    Ok(-profile.c1 * delay.ln() + profile.c2)
}

pub fn mos(r: f64, profile: &MosProfile) -> Result<MosScore, QoeError> {
    raw_mos(r, profile).map(MosScore::from_raw)
}

/// Sum of per-user MOS over every cluster of the world, at the current UAV
/// positions and user locations.
pub fn sum_mos(world: &World) -> f64 {
    world.snapshot().total_mos
}

/// Time-accumulated sum MOS: the sum of per-slot totals.
pub fn accumulated_mos(per_slot_totals: &[f64]) -> f64 {
    per_slot_totals.iter().sum()
}

/// Sum of per-user Shannon rates in bit/s. Reporting metric only.
pub fn sum_rate(world: &World) -> f64 {
    world.snapshot().sum_rate
}
