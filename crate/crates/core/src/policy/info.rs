use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::catalog::{ContentCatalog, ContentId, Genre, RatingLog, UserId, UserProfile, UserProfiles, VehicleAssignment};
use crate::decision::capacity_slots;
use crate::scenario::{PlatoonState, VfcState};

/// Everything the ranking policy is told about round `round`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneousInfo {
    pub round: u32,
    pub users: Vec<UserProfile>,
    /// Users served by each platoon vehicle, leader first.
    pub blocks: Vec<Vec<UserId>>,
    /// Train-split ratings as (user, content, stars).
    pub history: Vec<(UserId, ContentId, u8)>,
    /// Genres of the candidate contents shown to the ranker, ascending id.
    pub content_types: Vec<(ContentId, Vec<Genre>)>,
    pub n_platoon: usize,
    pub platoon_vehicle_bytes: u32,
    /// VFC capacities in ascending-distance order.
    pub vfc_capacities: Vec<u32>,
    pub content_size_bytes: u32,
    pub platoon_slots: usize,
    pub total_slots: usize,
}

impl HeterogeneousInfo {
    pub fn platoon_total_bytes(&self) -> u64 {
        self.n_platoon as u64 * self.platoon_vehicle_bytes as u64
    }
}

/// Gathers profiles, train history, candidate content types and the live
/// cache state. Candidates are the `top_t` most-rated train contents plus
/// every content an onboard user has rated.
#[allow(clippy::too_many_arguments)]
pub fn collect_info(
    round: u32,
    platoon: &PlatoonState,
    vfc: &VfcState,
    catalog: &ContentCatalog,
    profiles: &UserProfiles,
    train: &RatingLog,
    assignment: &VehicleAssignment,
    top_t: usize,
) -> HeterogeneousInfo {
    let blocks: Vec<Vec<UserId>> = assignment.blocks().map(|(_, b)| b.to_vec()).collect();
    let onboard: BTreeSet<UserId> = blocks.iter().flatten().copied().collect();
    let history: Vec<(UserId, ContentId, u8)> = train
        .entries
        .iter()
        .filter(|r| onboard.contains(&r.user))
        .map(|r| (r.user, r.content, r.stars))
        .collect();

    let counts = train.counts();
    let mut by_count: Vec<(ContentId, usize)> = counts.into_iter().collect();
    by_count.sort_by_key(|&(f, n)| (core::cmp::Reverse(n), f));
    let mut candidates: BTreeSet<ContentId> = by_count.iter().take(top_t).map(|(f, _)| *f).collect();
    candidates.extend(history.iter().map(|(_, f, _)| *f));
    let content_types = candidates
        .into_iter()
        .filter_map(|f| catalog.get(f).map(|c| (f, c.genres.clone())))
        .collect();

    let layout = capacity_slots(platoon, vfc, catalog.size_bytes());
    HeterogeneousInfo {
        round,
        users: profiles.as_slice().iter().filter(|u| onboard.contains(&u.user_id)).cloned().collect(),
        blocks,
        history,
        content_types,
        n_platoon: platoon.len(),
        platoon_vehicle_bytes: platoon.capacity_bytes,
        vfc_capacities: vfc.capacities().collect(),
        content_size_bytes: catalog.size_bytes(),
        platoon_slots: layout.platoon_total(),
        total_slots: layout.total(),
    }
}

/// Train-rating counts per content within the history.
pub(crate) fn history_counts(info: &HeterogeneousInfo) -> BTreeMap<ContentId, usize> {
    let mut counts = BTreeMap::new();
    for (_, f, _) in &info.history {
        *counts.entry(*f).or_insert(0) += 1;
    }
    counts
}
