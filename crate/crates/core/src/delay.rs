//! Per-request retrieval delay over the three tiers and the round objective.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::catalog::ContentId;
use crate::channel::{link_gain, link_rate, ChannelError, ChannelModel, Link, LinkBudget};
use crate::config::SimConfig;
use crate::decision::{CachingDecision, Tier};
use crate::scenario::{PlatoonState, RequestMatrix, VfcState};

/// Link rates (bit/s) for one round's topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayTables {
    /// `platoon_rate[i][j]`, symmetric; the diagonal is unused.
    pub platoon_rate: Vec<Vec<f64>>,
    /// VFC vehicle to leader, in ascending-distance order.
    pub vfc_rate: Vec<f64>,
    /// Leader to RSU.
    pub rsu_rate: f64,
    /// RSU to cloud.
    pub backhaul_rate: f64,
    pub content_bits: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum DelayError {
    #[error("platoon vehicle {0} does not exist")]
    UnknownVehicle(usize),
    #[error("VFC vehicle {0} does not exist")]
    UnknownVfcVehicle(usize),
    #[error("requested content {0} is not placed in any tier")]
    Unplaced(ContentId),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

impl DelayTables {
    pub fn build(
        config: &SimConfig,
        channel: &ChannelModel,
        platoon: &PlatoonState,
        vfc: &VfcState,
    ) -> Result<Self, DelayError> {
        let round = vfc.round;
        let v2v = |gain| {
            link_rate(&LinkBudget {
                bandwidth_hz: config.b_v2v_hz,
                tx_power_dbm: config.p_v_dbm,
                noise_power_dbm: config.noise_dbm,
                gain,
            })
        };
        let n = platoon.len();
        let mut platoon_rate = vec![vec![f64::INFINITY; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let r = v2v(link_gain(channel, platoon.distance(i, j), Link::Platoon(i, j), round)?);
                platoon_rate[i][j] = r;
                platoon_rate[j][i] = r;
            }
        }
        let vfc_rate = vfc
            .vehicles
            .iter()
            .map(|v| Ok(v2v(link_gain(channel, v.distance_m, Link::Vfc(v.id), round)?)))
            .collect::<Result<Vec<_>, DelayError>>()?;
        let rsu_rate = link_rate(&LinkBudget {
            bandwidth_hz: config.b_v2i_hz,
            tx_power_dbm: config.p_r_dbm,
            noise_power_dbm: config.noise_dbm,
            gain: link_gain(channel, config.rsu_distance_m, Link::Rsu, round)?,
        });
        Ok(Self {
            platoon_rate,
            vfc_rate,
            rsu_rate,
            backhaul_rate: config.r_rc_bps,
            content_bits: 8.0 * config.s_bytes as f64,
        })
    }

    pub fn platoon_len(&self) -> usize {
        self.platoon_rate.len()
    }

    fn check_vehicle(&self, i: usize) -> Result<(), DelayError> {
        if i < self.platoon_len() {
            Ok(())
        } else {
            Err(DelayError::UnknownVehicle(i))
        }
    }

    /// Hop from the leader to requester `i`; zero for the leader itself.
    fn forward(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.content_bits / self.platoon_rate[i][0]
        }
    }

    /// Content cached on platoon vehicle `j`, requested by `i`.
    pub fn platoon_delay(&self, i: usize, j: usize) -> Result<f64, DelayError> {
        self.check_vehicle(i)?;
        self.check_vehicle(j)?;
        Ok(if i == j { 0.0 } else { self.content_bits / self.platoon_rate[i][j] })
    }

    /// Content cached on VFC vehicle `k`, relayed through the leader.
    pub fn vfc_delay(&self, i: usize, k: usize) -> Result<f64, DelayError> {
        self.check_vehicle(i)?;
        let rate = self.vfc_rate.get(k).ok_or(DelayError::UnknownVfcVehicle(k))?;
        Ok(self.content_bits / rate + self.forward(i))
    }

    /// Content fetched from the cloud through the RSU and the leader.
    pub fn rsu_delay(&self, i: usize) -> Result<f64, DelayError> {
        self.check_vehicle(i)?;
        Ok(self.content_bits / self.backhaul_rate + self.content_bits / self.rsu_rate + self.forward(i))
    }

    pub fn tier_delay(&self, i: usize, tier: Tier) -> Result<f64, DelayError> {
        match tier {
            Tier::Platoon(j) => self.platoon_delay(i, j),
            Tier::Vfc(k) => self.vfc_delay(i, k),
            Tier::Cloud => self.rsu_delay(i),
        }
    }

    /// The hop delays making up `tier_delay(i, tier)`, zero padded.
    fn tier_terms(&self, i: usize, tier: Tier) -> Result<[f64; 3], DelayError> {
        self.check_vehicle(i)?;
        Ok(match tier {
            Tier::Platoon(j) => [self.platoon_delay(i, j)?, 0.0, 0.0],
            Tier::Vfc(k) => {
                let rate = self.vfc_rate.get(k).ok_or(DelayError::UnknownVfcVehicle(k))?;
                [self.content_bits / rate, self.forward(i), 0.0]
            }
            Tier::Cloud => [
                self.content_bits / self.backhaul_rate,
                self.content_bits / self.rsu_rate,
                self.forward(i),
            ],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundDelay {
    /// Delay per requested (vehicle, content) pair, ascending by pair.
    pub per_request: Vec<((usize, ContentId), f64)>,
    /// Sum of request delays divided by the platoon size, in seconds.
    /// Hop terms are summed in ascending order, so placements that use the
    /// same hops in a different arrangement score identically.
    pub objective: f64,
}

pub fn round_delay(
    requests: &RequestMatrix,
    decision: &CachingDecision,
    tables: &DelayTables,
) -> Result<RoundDelay, DelayError> {
    let tiers = decision.tier_of();
    let mut terms = Vec::new();
    let per_request = requests
        .pairs()
        .map(|(i, f)| {
            let tier = *tiers.get(&f).ok_or(DelayError::Unplaced(f))?;
            terms.extend(tables.tier_terms(i, tier)?);
            Ok(((i, f), tables.tier_delay(i, tier)?))
        })
        .collect::<Result<Vec<_>, DelayError>>()?;
    terms.sort_by(f64::total_cmp);
    let total: f64 = terms.iter().sum();
    Ok(RoundDelay {
        objective: total / tables.platoon_len() as f64,
        per_request,
    })
}
