//! Per-round world state: platoon geometry, VFC membership and requests.
//!
//! VFC membership follows a discrete-time birth-death chain evaluated once
//! between rounds. With `n` members, departures are
//! `Binomial(n, mu / (mu + n * departure_norm))` and arrivals are
//! `Poisson(lambda * arrival_scale)`; the resulting count is clamped to
//! `[1, k_max]`. `arrival_scale` is the knob that sweeps the long-run mean
//! VFC size (see [`calibrate_arrival_scale`]).

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::catalog::{ContentId, UserId, VehicleAssignment};
use crate::config::SimConfig;
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatoonState {
    /// Signed road positions in meters; index 0 is the leader.
    pub positions: Vec<f64>,
    pub spacing_m: f64,
    /// Carried for provenance; delays do not depend on it.
    pub speed_kmh: f64,
    pub capacity_bytes: u32,
}

impl PlatoonState {
    pub fn new(n: usize, spacing_m: f64, speed_kmh: f64, capacity_bytes: u32) -> Self {
        Self {
            positions: (0..n).map(|i| -(i as f64) * spacing_m).collect(),
            spacing_m,
            speed_kmh,
            capacity_bytes,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        libm::fabs(self.positions[i] - self.positions[j])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VfcVehicle {
    /// Persistent id, assigned in arrival order.
    pub id: u32,
    pub distance_m: f64,
    pub capacity_bytes: u32,
}

/// VFC members sorted by ascending distance to the leader.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VfcState {
    pub round: u32,
    pub vehicles: Vec<VfcVehicle>,
    pub next_id: u32,
}

impl VfcState {
    pub fn len(&self) -> usize {
        self.vehicles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vehicles.is_empty()
    }

    pub fn capacities(&self) -> impl Iterator<Item = u32> + '_ {
        self.vehicles.iter().map(|v| v.capacity_bytes)
    }

    fn sort(&mut self) {
        self.vehicles
            .sort_by(|a, b| a.distance_m.total_cmp(&b.distance_m).then(a.id.cmp(&b.id)));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VfcDynamics {
    pub lambda_v: f64,
    pub mu_v: f64,
    pub k_max: usize,
    pub departure_norm: f64,
    pub arrival_scale: f64,
    pub m_min_bytes: u32,
    pub m_max_bytes: u32,
    pub min_distance_m: f64,
    pub comm_radius_m: f64,
}

impl VfcDynamics {
    pub fn leave_probability(&self, count: usize) -> f64 {
        let denom = self.mu_v + count as f64 * self.departure_norm;
        if denom > 0.0 {
            (self.mu_v / denom).min(1.0)
        } else {
            0.0
        }
    }

    pub fn arrival_mean(&self) -> f64 {
        self.lambda_v * self.arrival_scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("k_max must be at least 1")]
    NoVfcCapacity,
    #[error("platoon must have at least one vehicle")]
    EmptyPlatoon,
    #[error("VFC capacity range [{0}, {1}] is empty")]
    CapacityRange(u32, u32),
    #[error("target mean VFC size {target} outside [1, {k_max}]")]
    TargetOutOfRange { target: f64, k_max: usize },
}

/// Capacity and distance of a VFC vehicle depend only on its id, so the
/// n-th arrival looks the same under every sweep setting.
fn spawn_vehicle(dynamics: &VfcDynamics, seed: u64, id: u32) -> VfcVehicle {
    let mut rng = stream_rng(seed, Stream::VfcVehicle, id as u64, 0);
    let capacity_bytes = rng.random_range(dynamics.m_min_bytes..=dynamics.m_max_bytes);
    let u: f64 = rng.random();
    let span = dynamics.comm_radius_m - dynamics.min_distance_m;
    VfcVehicle {
        id,
        distance_m: dynamics.min_distance_m + span * (1.0 - u),
        capacity_bytes,
    }
}

pub fn build_initial_state(config: &SimConfig, seed: u64) -> Result<(PlatoonState, VfcState), ScenarioError> {
    if config.k_max < 1 {
        return Err(ScenarioError::NoVfcCapacity);
    }
    if config.n_platoon < 1 {
        return Err(ScenarioError::EmptyPlatoon);
    }
    if config.m_min_bytes > config.m_max_bytes {
        return Err(ScenarioError::CapacityRange(config.m_min_bytes, config.m_max_bytes));
    }
    let platoon = PlatoonState::new(config.n_platoon, config.spacing_m, config.v_p_kmh, config.m_p_bytes);
    let dynamics = config.vfc_dynamics();
    let count = stream_rng(seed, Stream::InitialVfc, 0, 0).random_range(1..=config.k_max);
    let mut vfc = VfcState {
        round: 1,
        vehicles: (0..count as u32).map(|id| spawn_vehicle(&dynamics, seed, id)).collect(),
        next_id: count as u32,
    };
    vfc.sort();
    Ok((platoon, vfc))
}

/// One between-round transition of VFC membership.
pub fn advance_vfc(state: &VfcState, dynamics: &VfcDynamics, seed: u64) -> VfcState {
    let mut rng = stream_rng(seed, Stream::VfcAdvance, state.round as u64, 0);
    let n = state.len();
    let p = dynamics.leave_probability(n);
    let departures = if p > 0.0 && n > 0 {
        Binomial::new(n as u64, p).map_or(0, |b| b.sample(&mut rng) as usize)
    } else {
        0
    };
    let mean = dynamics.arrival_mean();
    let arrivals = if mean > 0.0 {
        Poisson::new(mean).map_or(0, |d| d.sample(&mut rng) as usize)
    } else {
        0
    };
    // Keep at least one member and at most k_max.
    let departures = departures.min((n + arrivals).saturating_sub(1));
    let arrivals = arrivals.min(dynamics.k_max.saturating_sub(n - departures));

    let leaving = index::sample(&mut rng, n, departures).into_vec();
    let mut vehicles: Vec<VfcVehicle> = state
        .vehicles
        .iter()
        .enumerate()
        .filter(|(i, _)| !leaving.contains(i))
        .map(|(_, v)| *v)
        .collect();
    let mut next_id = state.next_id;
    for _ in 0..arrivals {
        vehicles.push(spawn_vehicle(dynamics, seed, next_id));
        next_id += 1;
    }
    let mut next = VfcState {
        round: state.round + 1,
        vehicles,
        next_id,
    };
    next.sort();
    next
}

fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n + 1];
    if p <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if p >= 1.0 {
        pmf[n] = 1.0;
        return pmf;
    }
    let mut coeff = 1.0;
    for (d, slot) in pmf.iter_mut().enumerate() {
        if d > 0 {
            coeff = coeff * (n - d + 1) as f64 / d as f64;
        }
        *slot = coeff * libm::pow(p, d as f64) * libm::pow(1.0 - p, (n - d) as f64);
    }
    pmf
}

/// P(A = a) for a < cap, with P(A >= cap) lumped into the last entry.
fn poisson_pmf_capped(mean: f64, cap: usize) -> Vec<f64> {
    let mut pmf = vec![0.0; cap + 1];
    if mean <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    let mut term = libm::exp(-mean);
    let mut total = 0.0;
    for (a, slot) in pmf.iter_mut().take(cap).enumerate() {
        if a > 0 {
            term *= mean / a as f64;
        }
        *slot = term;
        total += term;
    }
    pmf[cap] = (1.0 - total).max(0.0);
    pmf
}

/// Transition matrix over counts `1..=k_max` (row `n - 1`).
pub fn transition_matrix(dynamics: &VfcDynamics) -> Vec<Vec<f64>> {
    let k = dynamics.k_max;
    let arrivals = poisson_pmf_capped(dynamics.arrival_mean(), k);
    (1..=k)
        .map(|n| {
            let mut row = vec![0.0; k];
            for (d, pd) in binomial_pmf(n, dynamics.leave_probability(n)).into_iter().enumerate() {
                for (a, pa) in arrivals.iter().enumerate() {
                    let next = (n + a).saturating_sub(d).clamp(1, k);
                    row[next - 1] += pd * pa;
                }
            }
            row
        })
        .collect()
}

/// Long-run distribution of the VFC size over `1..=k_max`, by power
/// iteration from the uniform distribution.
pub fn stationary_distribution(dynamics: &VfcDynamics) -> Vec<f64> {
    let p = transition_matrix(dynamics);
    let k = p.len();
    let mut pi = vec![1.0 / k as f64; k];
    for _ in 0..100_000 {
        let mut next = vec![0.0; k];
        for (i, row) in p.iter().enumerate() {
            for (j, pij) in row.iter().enumerate() {
                next[j] += pi[i] * pij;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let delta: f64 = next.iter().zip(&pi).map(|(a, b)| libm::fabs(a - b)).sum();
        pi = next;
        if delta < 1e-14 {
            break;
        }
    }
    pi
}

pub fn stationary_mean(dynamics: &VfcDynamics) -> f64 {
    stationary_distribution(dynamics)
        .iter()
        .enumerate()
        .map(|(i, p)| (i + 1) as f64 * p)
        .sum()
}

/// Finds the `arrival_scale` whose long-run mean VFC size equals `target`.
pub fn calibrate_arrival_scale(dynamics: &VfcDynamics, target: f64) -> Result<f64, ScenarioError> {
    let out_of_range = ScenarioError::TargetOutOfRange {
        target,
        k_max: dynamics.k_max,
    };
    if !(target >= 1.0 && target <= dynamics.k_max as f64) || dynamics.lambda_v <= 0.0 {
        return Err(out_of_range);
    }
    let mean_at = |scale: f64| stationary_mean(&VfcDynamics { arrival_scale: scale, ..*dynamics });
    if mean_at(0.0) >= target {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while mean_at(hi) < target {
        hi *= 2.0;
        if hi > 1.0e6 {
            return Err(out_of_range);
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_at(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Binary request indicators: the set of (vehicle, content) pairs requested
/// this round, with the users behind each pair.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestMatrix {
    requests: BTreeMap<(usize, ContentId), Vec<UserId>>,
}

impl RequestMatrix {
    pub fn insert(&mut self, vehicle: usize, content: ContentId, user: UserId) {
        self.requests.entry((vehicle, content)).or_default().push(user);
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, ContentId)> + '_ {
        self.requests.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, ContentId), &Vec<UserId>)> {
        self.requests.iter()
    }

    pub fn contains(&self, vehicle: usize, content: ContentId) -> bool {
        self.requests.contains_key(&(vehicle, content))
    }

    /// Requesting vehicles per requested content.
    pub fn by_content(&self) -> BTreeMap<ContentId, Vec<usize>> {
        let mut out: BTreeMap<ContentId, Vec<usize>> = BTreeMap::new();
        for &(v, f) in self.requests.keys() {
            out.entry(f).or_default().push(v);
        }
        out
    }
}

/// Every user draws one content uniformly from their held-out ratings.
/// `test_by_user` lists each user's test contents.
pub fn sample_requests(
    test_by_user: &BTreeMap<UserId, Vec<ContentId>>,
    assignment: &VehicleAssignment,
    round: u32,
    seed: u64,
) -> RequestMatrix {
    let mut matrix = RequestMatrix::default();
    for (vehicle, users) in assignment.blocks() {
        for &user in users {
            let Some(pool) = test_by_user.get(&user).filter(|p| !p.is_empty()) else {
                continue;
            };
            let mut rng = stream_rng(seed, Stream::Requests, user.0 as u64, round as u64);
            matrix.insert(vehicle, pool[rng.random_range(0..pool.len())], user);
        }
    }
    matrix
}
