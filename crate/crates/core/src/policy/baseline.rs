//! Reference rankings that need no model.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::catalog::{ContentCatalog, ContentId, RatingLog};
use crate::decision::RankedList;
use crate::rng::{stream_rng, Stream};

/// Whole catalog by train-rating count, most rated first; ties by id.
pub fn popularity_rank(train: &RatingLog, catalog: &ContentCatalog) -> RankedList {
    let counts = train.counts();
    let mut ids: Vec<ContentId> = catalog.ids().collect();
    ids.sort_by_key(|f| (core::cmp::Reverse(counts.get(f).copied().unwrap_or(0)), *f));
    RankedList(ids)
}

/// Uniformly shuffled catalog.
pub fn random_rank(catalog: &ContentCatalog, seed: u64, round: u32) -> RankedList {
    let mut ids: Vec<ContentId> = catalog.ids().collect();
    ids.shuffle(&mut stream_rng(seed, Stream::RandomPolicy, round as u64, 0));
    RankedList(ids)
}
