use std::cmp::Reverse;
use std::collections::BTreeSet;

use super::{Cache, Outcome};
use crate::catalogue::ContentId;

#[derive(Debug, Clone, Copy, Default)]
struct Counter {
    count: u64,
    tick: u64,
    resident: bool,
}

/// Residency order: an item with a larger key is kept over one with a smaller key.
type Key = (u64, u64, Reverse<ContentId>);

/// Perfect LFU. Request counters are kept for every item ever seen, resident
/// or not, and never decay. The resident set is always the top `capacity`
/// items under (count, last access, lower rank).
#[derive(Debug, Clone)]
pub struct LfuCache {
    capacity: usize,
    tick: u64,
    counters: Vec<Counter>,
    resident: BTreeSet<Key>,
}

impl LfuCache {
    pub fn new(capacity: usize) -> Self {
        LfuCache {
            capacity,
            tick: 0,
            counters: Vec::new(),
            resident: BTreeSet::new(),
        }
    }

    /// Lifetime request count for `item`.
    pub fn count(&self, item: ContentId) -> u64 {
        self.counters.get(item.slot()).map_or(0, |c| c.count)
    }

    /// Tick of the most recent access to `item`, 0 if never seen.
    pub fn last_access(&self, item: ContentId) -> u64 {
        self.counters.get(item.slot()).map_or(0, |c| c.tick)
    }

    fn key(&self, item: ContentId) -> Key {
        let c = &self.counters[item.slot()];
        (c.count, c.tick, Reverse(item))
    }

    fn counter_mut(&mut self, item: ContentId) -> &mut Counter {
        let slot = item.slot();
        if slot >= self.counters.len() {
            self.counters.resize(slot + 1, Counter::default());
        }
        &mut self.counters[slot]
    }
}

impl Cache for LfuCache {
    fn access(&mut self, item: ContentId) -> Outcome {
        self.tick += 1;
        let tick = self.tick;
        let was_resident = self.counters.get(item.slot()).is_some_and(|c| c.resident);

        if was_resident {
            let old = self.key(item);
            self.resident.remove(&old);
        }
        let counter = self.counter_mut(item);
        counter.count += 1;
        counter.tick = tick;

        let outcome = if was_resident {
            let key = self.key(item);
            self.resident.insert(key);
            Outcome::HIT
        } else if self.capacity == 0 {
            Outcome::REJECTED
        } else if self.resident.len() < self.capacity {
            let key = self.key(item);
            self.resident.insert(key);
            self.counters[item.slot()].resident = true;
            Outcome {
                hit: false,
                inserted: Some(item),
                evicted: None,
            }
        } else {
            let key = self.key(item);
            let victim = *self.resident.first().expect("full cache has a minimum");
            // the incoming tick is the newest, so it wins any count tie
            if key > victim {
                self.resident.pop_first();
                let evicted = victim.2 .0;
                self.counters[evicted.slot()].resident = false;
                self.resident.insert(key);
                self.counters[item.slot()].resident = true;
                Outcome {
                    hit: false,
                    inserted: Some(item),
                    evicted: Some(evicted),
                }
            } else {
                Outcome::REJECTED
            }
        };
        debug_assert!(self.resident.len() <= self.capacity);
        outcome
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn len(&self) -> usize {
        self.resident.len()
    }

    fn contains(&self, item: ContentId) -> bool {
        self.counters.get(item.slot()).is_some_and(|c| c.resident)
    }

    fn resident(&self) -> Vec<ContentId> {
        let mut items: Vec<ContentId> = self.resident.iter().map(|k| k.2 .0).collect();
        items.sort_unstable();
        items
    }

    fn accesses(&self) -> u64 {
        self.tick
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(capacity: usize, trace: &[u32]) -> (LfuCache, Vec<bool>) {
        let mut cache = LfuCache::new(capacity);
        let hits = trace
            .iter()
            .map(|&r| cache.access(ContentId::new(r)).hit)
            .collect();
        (cache, hits)
    }

    #[test]
    fn newcomer_cannot_displace_more_frequent_item() {
        let (cache, hits) = run(1, &[1, 1, 2]);
        assert_eq!(hits, [false, true, false]);
        assert_eq!(cache.resident(), [ContentId::new(1)]);
    }

    #[test]
    fn tie_admits_the_most_recent() {
        // a, b, a, c, c, c
        let (cache, _) = run(2, &[1, 2, 1, 3, 3, 3]);
        assert_eq!(cache.resident(), [ContentId::new(1), ContentId::new(3)]);
        assert_eq!(cache.count(ContentId::new(3)), 3);
        assert_eq!(cache.count(ContentId::new(2)), 1);
    }

    #[test]
    fn zero_capacity_never_hits() {
        let (cache, hits) = run(0, &[1, 1, 1, 2]);
        assert!(hits.iter().all(|h| !h));
        assert!(cache.is_empty());
    }

    #[test]
    fn outcome_reports_eviction() {
        let mut cache = LfuCache::new(1);
        cache.access(ContentId::new(4));
        let out = cache.access(ContentId::new(9));
        assert_eq!(out.inserted, Some(ContentId::new(9)));
        assert_eq!(out.evicted, Some(ContentId::new(4)));
        assert_eq!(cache.access(ContentId::new(9)), Outcome::HIT);
    }
}
