//! Link gains and Shannon rates for the V2V and V2I links.

use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::rng::{stream_rng, Stream};

/// Converts a power level in dBm to watts.
pub fn dbm_to_watt(p_dbm: f64) -> f64 {
    libm::pow(10.0, (p_dbm - 30.0) / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub noise_power_dbm: f64,
    /// Dimensionless power gain.
    pub gain: f64,
}

impl LinkBudget {
    pub fn snr(&self) -> f64 {
        dbm_to_watt(self.tx_power_dbm) * self.gain / dbm_to_watt(self.noise_power_dbm)
    }
}

/// Shannon rate `B log2(1 + P h / sigma^2)` in bit/s.
pub fn link_rate(budget: &LinkBudget) -> f64 {
    budget.bandwidth_hz * libm::log2(1.0 + budget.snr())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fading {
    Deterministic,
    /// One unit-mean exponential power fade per link and round.
    Rayleigh { seed: u64 },
}

/// Log-distance path loss `g0 * d^-eta` with optional block fading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    /// Power gain at 1 m.
    pub g0: f64,
    pub eta: f64,
    pub fading: Fading,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            g0: 1.0e-5,
            eta: 3.0,
            fading: Fading::Deterministic,
        }
    }
}

/// Identifies a link for fade seeding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    /// Between two platoon vehicles; order does not matter.
    Platoon(usize, usize),
    /// Between a VFC vehicle (by persistent id) and the leader.
    Vfc(u32),
    /// Between the leader and the RSU.
    Rsu,
}

impl Link {
    fn key(self) -> u64 {
        match self {
            Link::Platoon(a, b) => {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                (1 << 62) | ((lo as u64) << 24) | hi as u64
            }
            Link::Vfc(id) => (2 << 62) | id as u64,
            Link::Rsu => 3 << 62,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("link distance must be positive, got {0} m")]
    NonPositiveDistance(f64),
}

pub fn link_gain(model: &ChannelModel, distance_m: f64, link: Link, round: u32) -> Result<f64, ChannelError> {
    if !(distance_m > 0.0) {
        return Err(ChannelError::NonPositiveDistance(distance_m));
    }
    let path = model.g0 * libm::pow(distance_m, -model.eta);
    Ok(match model.fading {
        Fading::Deterministic => path,
        Fading::Rayleigh { seed } => {
            let fade: f64 = Exp1.sample(&mut stream_rng(seed, Stream::Fading, link.key(), round as u64));
            path * fade
        }
    })
}
