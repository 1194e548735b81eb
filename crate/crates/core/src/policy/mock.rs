//! Offline stand-in for the language model.
//!
//! Users are grouped into demographic blocks by (gender, age cohort). For
//! each block and genre the mean train rating is taken over the block's
//! ratings of contents carrying that genre. A candidate scores, summed over
//! onboard users, the mean of their block's genre ratings across the
//! candidate's genres. Ties go to train popularity, then a seeded hash,
//! then id.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::info::{history_counts, HeterogeneousInfo};
use super::parse::render_list;
use super::provider::{ProviderError, ProviderRequest, RankProvider};
use crate::catalog::{AgeCohort, ContentId, Gender, Genre, UserId};
use crate::decision::RankedList;
use crate::rng::{derive_seed, Stream};

type Block = (Gender, AgeCohort);

pub fn mock_rank(info: &HeterogeneousInfo, seed: u64) -> RankedList {
    let block_of: BTreeMap<UserId, Block> = info.users.iter().map(|u| (u.user_id, (u.gender, u.age))).collect();
    let genres: BTreeMap<ContentId, &[Genre]> = info.content_types.iter().map(|(f, g)| (*f, g.as_slice())).collect();

    // (block, genre) -> (sum of stars, count)
    let mut acc: BTreeMap<(Block, Genre), (f64, f64)> = BTreeMap::new();
    for (u, f, stars) in &info.history {
        let (Some(block), Some(gs)) = (block_of.get(u), genres.get(f)) else {
            continue;
        };
        for g in gs.iter() {
            let e = acc.entry((*block, *g)).or_insert((0.0, 0.0));
            e.0 += *stars as f64;
            e.1 += 1.0;
        }
    }
    let mut weight: BTreeMap<Block, f64> = BTreeMap::new();
    for block in block_of.values() {
        *weight.entry(*block).or_insert(0.0) += 1.0;
    }

    let counts = history_counts(info);
    let mut scored: Vec<(f64, usize, u64, ContentId)> = info
        .content_types
        .iter()
        .map(|(f, gs)| {
            let mut score = 0.0;
            for (block, w) in &weight {
                let means: Vec<f64> = gs
                    .iter()
                    .filter_map(|g| acc.get(&(*block, *g)).map(|(sum, n)| sum / n))
                    .collect();
                if !means.is_empty() {
                    score += w * means.iter().sum::<f64>() / means.len() as f64;
                }
            }
            let pop = counts.get(f).copied().unwrap_or(0);
            (score, pop, derive_seed(seed, Stream::Mock, f.0 as u64, 0), *f)
        })
        .collect();
    scored.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(b.1.cmp(&a.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });
    RankedList(scored.into_iter().take(info.total_slots).map(|(.., f)| f).collect())
}

/// Answers with a fenced JSON array, as a chat model would.
#[derive(Debug, Clone)]
pub struct MockProvider {
    pub seed: u64,
}

impl RankProvider for MockProvider {
    fn complete(&mut self, request: &ProviderRequest<'_>) -> Result<String, ProviderError> {
        let list = mock_rank(request.info, self.seed);
        Ok(alloc::format!("```json\n{}\n```", render_list(&list)))
    }
}
