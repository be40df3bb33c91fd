//! Capacity-bounded caches with hit/miss accounting and index snapshots.

mod lfu;
mod lru;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use lfu::LfuCache;
pub use lru::LruCache;

use crate::catalogue::{ContentId, ZipfCatalogue};

/// What a single access did to the cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub hit: bool,
    /// Item admitted by this access (only on a miss).
    pub inserted: Option<ContentId>,
    pub evicted: Option<ContentId>,
}

impl Outcome {
    pub(crate) const HIT: Outcome = Outcome {
        hit: true,
        inserted: None,
        evicted: None,
    };
    pub(crate) const REJECTED: Outcome = Outcome {
        hit: false,
        inserted: None,
        evicted: None,
    };
}

pub trait Cache {
    fn access(&mut self, item: ContentId) -> Outcome;
    fn capacity(&self) -> usize;
    fn len(&self) -> usize;
    fn contains(&self, item: ContentId) -> bool;
    /// Resident items in ascending rank.
    fn resident(&self) -> Vec<ContentId>;
    /// Number of accesses seen so far.
    fn accesses(&self) -> u64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn export_index(&self) -> CacheIndex {
        CacheIndex::new(self.resident(), self.accesses())
    }
}

/// Immutable snapshot of a cache's resident set: the network profile that is
/// matched against UE profiles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheIndex {
    items: Arc<[ContentId]>,
    taken_at: u64,
}

impl CacheIndex {
    pub fn new(mut items: Vec<ContentId>, taken_at: u64) -> Self {
        items.sort_unstable();
        items.dedup();
        CacheIndex {
            items: items.into(),
            taken_at,
        }
    }

    pub fn empty() -> Self {
        CacheIndex::new(Vec::new(), 0)
    }

    pub fn items(&self) -> &[ContentId] {
        &self.items
    }

    pub fn taken_at(&self) -> u64 {
        self.taken_at
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, id: ContentId) -> bool {
        self.items.binary_search(&id).is_ok()
    }

    /// Size of the intersection with an ascending, duplicate-free slice.
    pub fn overlap(&self, sorted: &[ContentId]) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        let a = &self.items;
        while i < a.len() && j < sorted.len() {
            match a[i].cmp(&sorted[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CachePolicy {
    Lfu,
    Lru,
}

impl FromStr for CachePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lfu" => Ok(CachePolicy::Lfu),
            "lru" => Ok(CachePolicy::Lru),
            other => Err(format!("expected `lfu` or `lru`, got `{other}`")),
        }
    }
}

impl fmt::Display for CachePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CachePolicy::Lfu => "lfu",
            CachePolicy::Lru => "lru",
        })
    }
}

/// Either policy behind one type, so a world can hold a homogeneous list.
#[derive(Debug, Clone)]
pub enum AnyCache {
    Lfu(LfuCache),
    Lru(LruCache),
}

impl AnyCache {
    pub fn new(policy: CachePolicy, capacity: usize) -> Self {
        match policy {
            CachePolicy::Lfu => AnyCache::Lfu(LfuCache::new(capacity)),
            CachePolicy::Lru => AnyCache::Lru(LruCache::new(capacity)),
        }
    }
}

macro_rules! delegate {
    ($self:ident, $c:ident => $e:expr) => {
        match $self {
            AnyCache::Lfu($c) => $e,
            AnyCache::Lru($c) => $e,
        }
    };
}

impl Cache for AnyCache {
    fn access(&mut self, item: ContentId) -> Outcome {
        delegate!(self, c => c.access(item))
    }
    fn capacity(&self) -> usize {
        delegate!(self, c => c.capacity())
    }
    fn len(&self) -> usize {
        delegate!(self, c => c.len())
    }
    fn contains(&self, item: ContentId) -> bool {
        delegate!(self, c => c.contains(item))
    }
    fn resident(&self) -> Vec<ContentId> {
        delegate!(self, c => c.resident())
    }
    fn accesses(&self) -> u64 {
        delegate!(self, c => c.accesses())
    }
}

/// Hit ratio of a perfect-LFU cache in steady state under independent
/// requests: it holds the `capacity` most popular items.
pub fn steady_state_lfu_chr(catalogue: &ZipfCatalogue, capacity: usize) -> f64 {
    catalogue.head_mass(capacity)
}
