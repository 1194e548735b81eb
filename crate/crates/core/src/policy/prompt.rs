//! Three-layer prompt: role, task description, round data.

use alloc::string::String;
use core::fmt::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::info::HeterogeneousInfo;

pub const ROLE_MARKER: &str = "### Role";
pub const TASK_MARKER: &str = "### Task";
pub const DATA_MARKER: &str = "### Data";

const ROLE: &str = "You are an edge caching expert for a vehicular platoon network. \
You predict which movies the platoon's passengers will request next and decide where \
each movie should be stored: on a platoon vehicle, on a nearby vehicular fog cache (VFC) \
vehicle, or left on the cloud server. You only reason about content caching.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub role_text: String,
    pub task_text: String,
    pub info_text: String,
    pub assembled: String,
}

impl PromptBundle {
    /// SHA-256 of the assembled prompt, hex encoded.
    pub fn digest(&self) -> String {
        crate::hex(&Sha256::digest(self.assembled.as_bytes()))
    }
}

fn task_text(info: &HeterogeneousInfo) -> String {
    let mut t = String::new();
    let vfc_total: u64 = info.vfc_capacities.iter().map(|&c| c as u64).sum();
    let _ = writeln!(
        t,
        "Task Goal: Decide whether to cache each movie f and where to cache it, so that the \
         cache hit ratio is maximized and the transmission delay is minimized."
    );
    let _ = writeln!(
        t,
        "Task Definition: Select movies using the user profiles, rating history, movie types \
         and cache state below, without exceeding the cache capacity."
    );
    let _ = writeln!(t, "System information description:");
    let _ = writeln!(
        t,
        "- Cache capacities: Platoon ({} bytes x {} vehicles = {} bytes), VFC ({:?} bytes, {} bytes in total). \
         Every movie occupies {} bytes, so the platoon holds {} movies and platoon plus VFC hold {} movies.",
        info.platoon_vehicle_bytes,
        info.n_platoon,
        info.platoon_total_bytes(),
        info.vfc_capacities,
        vfc_total,
        info.content_size_bytes,
        info.platoon_slots,
        info.total_slots,
    );
    let _ = writeln!(t, "- User profiles: [[id, age, gender, occupation], ...]");
    let _ = writeln!(t, "- History: [[user_id, movie_id, rating], ...]");
    let _ = writeln!(t, "- Movie type: [[movie_id, type], ...]");
    let _ = writeln!(
        t,
        "Output type: A list of movie IDs, L, giving the placement sequence. Movies in L fill the \
         platoon vehicles one after another, starting with the leader vehicle, until every platoon \
         cache is full. The remaining movies in L go to the VFC vehicles in order of increasing \
         distance from the leader vehicle."
    );
    let _ = writeln!(t, "Rules:");
    let _ = writeln!(
        t,
        "- The platoon has {} vehicles, each with the same cache capacity ({} bytes). The VFC is made \
         of personal vehicles within communication range of the leader vehicle.",
        info.n_platoon, info.platoon_vehicle_bytes
    );
    let n_users: usize = info.blocks.iter().map(|b| b.len()).sum();
    let _ = write!(
        t,
        "- {n_users} users are spread evenly over the platoon vehicles. Movies a user is more likely to \
         request should sit closer to that user's vehicle."
    );
    for (v, block) in info.blocks.iter().enumerate() {
        let who = if v == 0 { String::from("The leader vehicle") } else { alloc::format!("Vehicle {}", v + 1) };
        match (block.first(), block.last()) {
            (Some(a), Some(b)) if a != b => {
                let _ = write!(t, " {who} serves users with IDs {a} to {b}.");
            }
            (Some(a), _) => {
                let _ = write!(t, " {who} serves users with IDs {a}.");
            }
            _ => {}
        }
    }
    let _ = writeln!(t);
    let _ = writeln!(t, "- Strict priority: Platoon > VFC (platoon slots weigh more).");
    let _ = writeln!(t, "- Capacity limit: the list holds at most {} movie IDs.", info.total_slots);
    let _ = writeln!(t, "- No duplicate movie IDs in the list.");
    let _ = write!(t, "Answer with the list as a JSON array of integers.");
    t
}

fn info_text(info: &HeterogeneousInfo) -> String {
    let mut t = String::new();
    let _ = writeln!(
        t,
        "Cache capacities: Platoon ({}), VFC ({:?})",
        info.platoon_total_bytes(),
        info.vfc_capacities
    );
    let _ = write!(t, "User profiles: [");
    for (n, u) in info.users.iter().enumerate() {
        let sep = if n == 0 { "" } else { ", " };
        let gender = match u.gender {
            crate::catalog::Gender::M => "M",
            crate::catalog::Gender::F => "F",
        };
        let _ = write!(t, "{sep}[{}, {}, {gender}, {}]", u.user_id, u.age.label(), u.occupation.label());
    }
    let _ = writeln!(t, "]");
    let _ = write!(t, "History: [");
    for (n, (u, f, r)) in info.history.iter().enumerate() {
        let sep = if n == 0 { "" } else { ", " };
        let _ = write!(t, "{sep}[{u}, {f}, {r}]");
    }
    let _ = writeln!(t, "]");
    let _ = write!(t, "Movie type: [");
    for (n, (f, genres)) in info.content_types.iter().enumerate() {
        let sep = if n == 0 { "" } else { ", " };
        let _ = write!(t, "{sep}[{f}, ");
        for (g, genre) in genres.iter().enumerate() {
            let _ = write!(t, "{}{}", if g == 0 { "" } else { "|" }, genre.name());
        }
        let _ = write!(t, "]");
    }
    let _ = write!(t, "]");
    t
}

pub fn build_prompt(info: &HeterogeneousInfo) -> PromptBundle {
    let role_text = String::from(ROLE);
    let task_text = task_text(info);
    let info_text = info_text(info);
    let assembled = alloc::format!(
        "{ROLE_MARKER}\n{role_text}\n\n{TASK_MARKER}\n{task_text}\n\n{DATA_MARKER}\n{info_text}\n"
    );
    PromptBundle {
        role_text,
        task_text,
        info_text,
        assembled,
    }
}
