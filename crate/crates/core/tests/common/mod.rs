#![allow(dead_code)]

use std::fmt::Write;

use platoon_cache_core::catalog::Dataset;
use platoon_cache_core::config::SimConfig;

const GENRES: [&str; 6] = ["Action", "Comedy", "Drama", "Romance", "Sci-Fi", "Thriller"];

/// A small dataset with a skewed popularity profile: user `u` rates
/// contents `u*k mod n_contents` for a few small `k`, plus the first few ids.
pub fn small_dataset(n_users: u32, n_contents: u32, per_user: u32) -> Dataset {
    let mut users = String::new();
    for u in 1..=n_users {
        let gender = if u % 3 == 0 { "F" } else { "M" };
        let age = [1, 18, 25, 35, 45, 56][(u % 6) as usize];
        writeln!(users, "{u}::{gender}::{age}::{}::12345", u % 21).unwrap();
    }
    let mut movies = String::new();
    for f in 1..=n_contents {
        let g1 = GENRES[(f % 6) as usize];
        let g2 = GENRES[(f * 7 % 6) as usize];
        let genres = if g1 == g2 { g1.to_string() } else { format!("{g1}|{g2}") };
        writeln!(movies, "{f}::Title {f} (1999)::{genres}").unwrap();
    }
    let mut ratings = String::new();
    for u in 1..=n_users {
        let mut seen = std::collections::BTreeSet::new();
        let mut k = 0;
        while (seen.len() as u32) < per_user.min(n_contents) {
            let f = if k < 4 { k + 1 } else { (u * k + k * k) % n_contents + 1 };
            if seen.insert(f) {
                writeln!(ratings, "{u}::{f}::{}::{}", 1 + (u + f) % 5, 978_300_000 + k).unwrap();
            }
            k += 1;
        }
    }
    Dataset::parse(&users, &movies, &ratings, 100).unwrap()
}

pub fn small_config(n_users: usize, n_contents: usize) -> SimConfig {
    SimConfig {
        n_users,
        n_contents,
        n_platoon: 4,
        m_p_bytes: 300,
        k_max: 3,
        rounds: 4,
        ..SimConfig::default()
    }
}
