use std::collections::{BTreeMap, HashMap};

use super::{Cache, Outcome};
use crate::catalogue::ContentId;

/// Least-recently-used cache. Recency is a per-cache access tick.
#[derive(Debug, Clone)]
pub struct LruCache {
    capacity: usize,
    tick: u64,
    last_use: HashMap<ContentId, u64>,
    by_recency: BTreeMap<u64, ContentId>,
}

impl LruCache {
    pub fn new(capacity: usize) -> Self {
        LruCache {
            capacity,
            tick: 0,
            last_use: HashMap::with_capacity(capacity),
            by_recency: BTreeMap::new(),
        }
    }

    /// Resident items from least to most recently used.
    pub fn recency_order(&self) -> Vec<ContentId> {
        self.by_recency.values().copied().collect()
    }
}

impl Cache for LruCache {
    fn access(&mut self, item: ContentId) -> Outcome {
        self.tick += 1;
        if let Some(prev) = self.last_use.insert(item, self.tick) {
            self.by_recency.remove(&prev);
            self.by_recency.insert(self.tick, item);
            return Outcome::HIT;
        }
        if self.capacity == 0 {
            self.last_use.remove(&item);
            return Outcome::REJECTED;
        }
        let mut evicted = None;
        if self.by_recency.len() == self.capacity {
            let (_, victim) = self
                .by_recency
                .pop_first()
                .expect("full cache is non-empty");
            self.last_use.remove(&victim);
            evicted = Some(victim);
        }
        self.by_recency.insert(self.tick, item);
        debug_assert!(self.by_recency.len() <= self.capacity);
        Outcome {
            hit: false,
            inserted: Some(item),
            evicted,
        }
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn len(&self) -> usize {
        self.by_recency.len()
    }

    fn contains(&self, item: ContentId) -> bool {
        self.last_use.contains_key(&item)
    }

    fn resident(&self) -> Vec<ContentId> {
        let mut items: Vec<ContentId> = self.by_recency.values().copied().collect();
        items.sort_unstable();
        items
    }

    fn accesses(&self) -> u64 {
        self.tick
    }
}
