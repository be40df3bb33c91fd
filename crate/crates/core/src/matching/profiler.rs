use std::cmp::Reverse;
use std::collections::HashMap;

use crate::catalogue::{ContentId, UeProfile, ZipfCatalogue};
use crate::error::ConfigError;

/// UE-side virtual cache: request counters with no payload and no capacity
/// bound. Its top-k items form the UE profile pushed to the operator.
#[derive(Debug, Clone, Default)]
pub struct VirtualCacheProfiler {
    counts: HashMap<ContentId, (u64, u64)>,
    tick: u64,
}

impl VirtualCacheProfiler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, item: ContentId) {
        self.tick += 1;
        let entry = self.counts.entry(item).or_insert((0, 0));
        entry.0 += 1;
        entry.1 = self.tick;
    }

    pub fn count(&self, item: ContentId) -> u64 {
        self.counts.get(&item).map_or(0, |e| e.0)
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// The `k` most requested items, most recent access then lower rank
    /// breaking ties.
    pub fn top(&self, k: usize, catalogue: &ZipfCatalogue) -> Result<UeProfile, ConfigError> {
        if k == 0 {
            return Err(ConfigError::invalid("k", "profile size must be at least 1"));
        }
        let mut ranked: Vec<(ContentId, u64, u64)> = self
            .counts
            .iter()
            .map(|(id, &(n, t))| (*id, n, t))
            .collect();
        ranked.sort_unstable_by_key(|&(id, n, t)| (Reverse(n), Reverse(t), id));
        ranked.truncate(k);
        UeProfile::from_items(ranked.into_iter().map(|(id, _, _)| id), catalogue)
    }
}
