use super::config::{SelectionPolicy, SimConfig};
use super::measure_chr;
use super::world::World;
use crate::caching::Outcome;
use crate::catalogue::ContentId;
use crate::error::ConfigError;
use crate::matching::{select_by_match, ApId};

/// Totals for one slot of the per-request scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotRow {
    /// 1-based.
    pub slot: u64,
    pub requests: u64,
    pub hits: u64,
}

impl SlotRow {
    pub fn chr(&self) -> Option<f64> {
        measure_chr(self.hits, self.requests)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerRequestRun {
    pub policy: SelectionPolicy,
    pub seed: u64,
    pub rows: Vec<SlotRow>,
}

/// One routed request, for callers that want the full trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RequestEvent {
    pub slot: u64,
    pub profile: usize,
    pub ap: ApId,
    pub cache: usize,
    pub item: ContentId,
    pub hit: bool,
}

/// Live `|profile ∩ cache|` for every (profile, cache) pair, updated from
/// access outcomes instead of rescanning indexes on every request.
struct OverlapTracker {
    caches: usize,
    overlap: Vec<u32>,
    holders: Vec<Vec<u32>>,
}

impl OverlapTracker {
    fn new(world: &World) -> Self {
        let caches = world.caches().len();
        let mut holders = vec![Vec::new(); world.catalogue().size()];
        for (p, profile) in world.profiles().iter().enumerate() {
            for id in profile.items() {
                holders[id.slot()].push(p as u32);
            }
        }
        OverlapTracker {
            caches,
            overlap: vec![0; world.profiles().len() * caches],
            holders,
        }
    }

    fn apply(&mut self, cache: usize, outcome: &Outcome) {
        if let Some(id) = outcome.inserted {
            for &p in &self.holders[id.slot()] {
                self.overlap[p as usize * self.caches + cache] += 1;
            }
        }
        if let Some(id) = outcome.evicted {
            for &p in &self.holders[id.slot()] {
                self.overlap[p as usize * self.caches + cache] -= 1;
            }
        }
    }

    fn get(&self, profile: usize, cache: usize) -> u32 {
        self.overlap[profile * self.caches + cache]
    }
}

/// Fixed population of `floor(N/3)` UEs; every request goes to the AP with
/// the best `F` for its requester's profile (or a random AP under the random
/// policy). The load term counts requests routed to each AP in the current
/// slot.
pub fn run_per_request_scenario(
    config: &SimConfig,
    slots: u64,
    requests_per_slot: u64,
) -> Result<PerRequestRun, ConfigError> {
    run_per_request_with(config, slots, requests_per_slot, |_| {})
}

pub fn run_per_request_with(
    config: &SimConfig,
    slots: u64,
    requests_per_slot: u64,
    mut observe: impl FnMut(&RequestEvent),
) -> Result<PerRequestRun, ConfigError> {
    if requests_per_slot == 0 {
        return Err(ConfigError::invalid(
            "requests_per_slot",
            "must be at least 1",
        ));
    }
    let mut world = World::new(config)?;
    let mut tracker = OverlapTracker::new(&world);
    let aps: Vec<usize> = world.aps().iter().map(|a| a.cache).collect();
    let profile_size = config.profile_size as f64;

    let mut ratios = vec![0.0; aps.len()];
    let mut rows = Vec::with_capacity(slots as usize);
    for slot in 1..=slots {
        let mut routed = vec![0u64; aps.len()];
        let mut row = SlotRow {
            slot,
            requests: 0,
            hits: 0,
        };
        for _ in 0..requests_per_slot {
            let (who, item) = world.draw_request().expect("population is non-empty");
            let profile = world.ue_at(who).profile;
            let ap = match config.policy {
                SelectionPolicy::Random => world.random_ap(),
                SelectionPolicy::Iccon => {
                    for (r, &cache) in ratios.iter_mut().zip(&aps) {
                        *r = tracker.get(profile, cache) as f64 / profile_size;
                    }
                    select_by_match(&ratios, &routed, config.w).ap
                }
            };
            let (cache, outcome) = world.deliver(ap, item);
            tracker.apply(cache, &outcome);
            routed[ap.0] += 1;
            row.requests += 1;
            row.hits += outcome.hit as u64;
            observe(&RequestEvent {
                slot,
                profile,
                ap,
                cache,
                item,
                hit: outcome.hit,
            });
        }
        rows.push(row);
    }
    Ok(PerRequestRun {
        policy: config.policy,
        seed: config.seed,
        rows,
    })
}
