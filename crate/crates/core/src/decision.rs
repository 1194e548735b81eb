//! Three-tier placement, constraint checks and the ranked-list mapper.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::catalog::{ContentCatalog, ContentId};
use crate::scenario::{PlatoonState, VfcState};

/// Where a content lives in one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tier {
    /// Platoon vehicle index (0 = leader).
    Platoon(usize),
    /// VFC vehicle index in ascending-distance order.
    Vfc(usize),
    Cloud,
}

/// Item slots per cache node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotLayout {
    pub platoon: Vec<usize>,
    pub vfc: Vec<usize>,
}

impl SlotLayout {
    pub fn platoon_total(&self) -> usize {
        self.platoon.iter().sum()
    }

    pub fn total(&self) -> usize {
        self.platoon_total() + self.vfc.iter().sum::<usize>()
    }

    /// Cache nodes in fill order with their slot counts.
    pub fn nodes(&self) -> impl Iterator<Item = (Tier, usize)> + '_ {
        let p = self.platoon.iter().enumerate().map(|(j, &n)| (Tier::Platoon(j), n));
        let v = self.vfc.iter().enumerate().map(|(k, &n)| (Tier::Vfc(k), n));
        p.chain(v)
    }
}

/// Slots are `floor(capacity / content_size)`; partial items are not cached.
pub fn capacity_slots(platoon: &PlatoonState, vfc: &VfcState, content_size_bytes: u32) -> SlotLayout {
    let slots = |bytes: u32| (bytes / content_size_bytes) as usize;
    SlotLayout {
        platoon: alloc::vec![slots(platoon.capacity_bytes); platoon.len()],
        vfc: vfc.capacities().map(slots).collect(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedList(pub Vec<ContentId>);

impl RankedList {
    /// Drops ids outside the catalog and repeats, keeping first occurrences.
    pub fn normalized(&self, catalog: &ContentCatalog) -> RankedList {
        let mut seen = BTreeSet::new();
        RankedList(
            self.0
                .iter()
                .copied()
                .filter(|f| catalog.contains(*f) && seen.insert(*f))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CachingDecision {
    pub platoon: Vec<Vec<ContentId>>,
    pub vfc: Vec<Vec<ContentId>>,
    /// Everything fetched from the cloud, ascending.
    pub cloud: Vec<ContentId>,
}

impl CachingDecision {
    pub fn tier_of(&self) -> BTreeMap<ContentId, Tier> {
        let mut map = BTreeMap::new();
        for (j, ids) in self.platoon.iter().enumerate() {
            map.extend(ids.iter().map(|f| (*f, Tier::Platoon(j))));
        }
        for (k, ids) in self.vfc.iter().enumerate() {
            map.extend(ids.iter().map(|f| (*f, Tier::Vfc(k))));
        }
        map.extend(self.cloud.iter().map(|f| (*f, Tier::Cloud)));
        map
    }

    pub fn in_platoon(&self, f: ContentId) -> bool {
        self.platoon.iter().any(|ids| ids.contains(&f))
    }

    /// SHA-256 over the cached (non-cloud) placement, hex encoded.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (tag, nodes) in [(b'P', &self.platoon), (b'V', &self.vfc)] {
            for ids in nodes {
                h.update([tag]);
                for f in ids {
                    h.update(f.0.to_le_bytes());
                }
            }
        }
        crate::hex(&h.finalize())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    /// The decision has a different number of nodes than the round.
    Shape { tier: &'static str, expected: usize, actual: usize },
    UnknownContent(ContentId),
    /// A catalog content sits in zero or several places.
    Exclusivity { content: ContentId, placements: usize },
    PlatoonFill { vehicle: usize, expected: usize, actual: usize },
    VfcFill { vehicle: usize, expected: usize, actual: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Shape { tier, expected, actual } => {
                write!(f, "{tier} tier has {actual} nodes, round has {expected}")
            }
            Self::UnknownContent(c) => write!(f, "content {c} is not in the catalog"),
            Self::Exclusivity { content, placements } => {
                write!(f, "exclusivity: content {content} placed {placements} times")
            }
            Self::PlatoonFill { vehicle, expected, actual } => {
                write!(f, "platoon fill: vehicle {vehicle} holds {actual} of {expected} slots")
            }
            Self::VfcFill { vehicle, expected, actual } => {
                write!(f, "VFC fill: vehicle {vehicle} holds {actual} of {expected} slots")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} constraint violation(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "; {v}")?;
        }
        Ok(())
    }
}

/// Checks binary exclusivity, exact capacity fill and catalog membership.
pub fn validate(decision: &CachingDecision, layout: &SlotLayout, catalog: &ContentCatalog) -> Result<(), ViolationReport> {
    let mut violations = Vec::new();
    if decision.platoon.len() != layout.platoon.len() {
        violations.push(Violation::Shape {
            tier: "platoon",
            expected: layout.platoon.len(),
            actual: decision.platoon.len(),
        });
    }
    if decision.vfc.len() != layout.vfc.len() {
        violations.push(Violation::Shape {
            tier: "vfc",
            expected: layout.vfc.len(),
            actual: decision.vfc.len(),
        });
    }
    for (vehicle, (ids, &expected)) in decision.platoon.iter().zip(&layout.platoon).enumerate() {
        if ids.len() != expected {
            violations.push(Violation::PlatoonFill { vehicle, expected, actual: ids.len() });
        }
    }
    for (vehicle, (ids, &expected)) in decision.vfc.iter().zip(&layout.vfc).enumerate() {
        if ids.len() != expected {
            violations.push(Violation::VfcFill { vehicle, expected, actual: ids.len() });
        }
    }

    let mut placements: BTreeMap<ContentId, usize> = catalog.ids().map(|f| (f, 0)).collect();
    let mut unknown = BTreeSet::new();
    let all = decision
        .platoon
        .iter()
        .chain(&decision.vfc)
        .flatten()
        .chain(&decision.cloud);
    for f in all {
        match placements.get_mut(f) {
            Some(n) => *n += 1,
            None => {
                unknown.insert(*f);
            }
        }
    }
    violations.extend(unknown.into_iter().map(Violation::UnknownContent));
    violations.extend(
        placements
            .into_iter()
            .filter(|&(_, n)| n != 1)
            .map(|(content, placements)| Violation::Exclusivity { content, placements }),
    );

    if violations.is_empty() {
        Ok(())
    } else {
        Err(ViolationReport { violations })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum DecisionError {
    #[error("{slots} cache slots cannot be filled exactly from {contents} contents")]
    Infeasible { slots: usize, contents: usize },
}

pub fn check_feasible(layout: &SlotLayout, catalog: &ContentCatalog) -> Result<(), DecisionError> {
    if layout.total() > catalog.len() {
        Err(DecisionError::Infeasible {
            slots: layout.total(),
            contents: catalog.len(),
        })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappedDecision {
    pub decision: CachingDecision,
    /// Slots filled from the fallback ranking because the list ran short.
    pub padded: usize,
}

/// Deterministic list-to-placement map.
///
/// The normalized list fills platoon vehicles leader first, then VFC
/// vehicles nearest first. A short list is extended with `fallback` (and,
/// failing that, ascending catalog ids) so every slot is filled. All other
/// contents go to the cloud.
pub fn map_list_to_decision(
    list: &RankedList,
    layout: &SlotLayout,
    catalog: &ContentCatalog,
    fallback: &RankedList,
) -> Result<MappedDecision, DecisionError> {
    check_feasible(layout, catalog)?;
    let total = layout.total();
    let mut chosen = list.normalized(catalog).0;
    chosen.truncate(total);
    let from_list = chosen.len();
    if from_list < total {
        let mut placed: BTreeSet<ContentId> = chosen.iter().copied().collect();
        let extra = fallback
            .0
            .iter()
            .copied()
            .chain(catalog.ids())
            .filter(|f| catalog.contains(*f) && placed.insert(*f))
            .take(total - from_list);
        chosen.extend(extra);
    }

    let mut next = chosen.iter().copied();
    let mut take = |n: usize| next.by_ref().take(n).collect::<Vec<_>>();
    let platoon: Vec<Vec<ContentId>> = layout.platoon.iter().map(|&n| take(n)).collect();
    let vfc: Vec<Vec<ContentId>> = layout.vfc.iter().map(|&n| take(n)).collect();
    let placed: BTreeSet<ContentId> = chosen.iter().copied().collect();
    let cloud = catalog.ids().filter(|f| !placed.contains(f)).collect();
    Ok(MappedDecision {
        decision: CachingDecision { platoon, vfc, cloud },
        padded: total - from_list,
    })
}

/// Cached contents in fill order: platoon leader first, then VFC nearest first.
pub fn decision_to_list(decision: &CachingDecision) -> RankedList {
    RankedList(decision.platoon.iter().chain(&decision.vfc).flatten().copied().collect())
}
