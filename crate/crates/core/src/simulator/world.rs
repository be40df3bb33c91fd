use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{SelectionPolicy, SimConfig, Stabilization};
use crate::caching::{AnyCache, Cache, CacheIndex, Outcome};
use crate::catalogue::{ContentId, ProfileAssigner, UeProfile, ZipfCatalogue};
use crate::error::ConfigError;
use crate::matching::{select_ap, ApId, FitScore};

// Substream ids. Both selection policies consume the shared streams
// identically, so runs that differ only in policy see the same warm-up,
// arrivals and per-UE request sequences.
const STREAM_PROFILES: u64 = 0;
const STREAM_ASSIGN: u64 = 1;
const STREAM_INITIAL_ATTACH: u64 = 2;
const STREAM_RANDOM_ATTACH: u64 = 3;
const STREAM_REQUESTER: u64 = 4;
const STREAM_UE_BASE: u64 = 1 << 32;

pub(crate) fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A UE in the system.
#[derive(Debug, Clone)]
pub struct UeState {
    pub id: u64,
    /// Position in the world's profile list.
    pub profile: usize,
    pub attached_ap: Option<ApId>,
    pub arrival_order: u64,
    requests: ChaCha8Rng,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApState {
    pub id: ApId,
    pub cache: usize,
    /// Attached UEs.
    pub n: u64,
}

/// Requests and hits of one stabilization phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseStats {
    pub requests: u64,
    pub hits: u64,
    /// The phase ended on the request cap rather than on stability.
    pub capped: bool,
}

/// Window-based stability detector for one cache.
#[derive(Debug, Clone, Default)]
struct StabilityWindow {
    requests: u64,
    hits: u64,
    previous: Option<f64>,
    stable: bool,
}

impl StabilityWindow {
    /// Returns true when this access latches the cache as stable.
    fn record(&mut self, hit: bool, window: u64, eps: f64) -> bool {
        self.requests += 1;
        self.hits += hit as u64;
        if self.requests < window {
            return false;
        }
        let chr = self.hits as f64 / self.requests as f64;
        self.requests = 0;
        self.hits = 0;
        let became = !self.stable && self.previous.is_some_and(|p| (chr - p).abs() < eps);
        self.previous = Some(chr);
        if became {
            self.stable = true;
        }
        became
    }
}

/// One simulated location: APs, their caches and the UEs in range.
#[derive(Debug, Clone)]
pub struct World {
    config: SimConfig,
    catalogue: ZipfCatalogue,
    profiles: Vec<UeProfile>,
    assigner: ProfileAssigner,
    caches: Vec<AnyCache>,
    aps: Vec<ApState>,
    ues: VecDeque<UeState>,
    next_ue: u64,
    clock: f64,
    assign_rng: ChaCha8Rng,
    random_attach_rng: ChaCha8Rng,
    requester_rng: ChaCha8Rng,
}

impl World {
    /// Builds the catalogue, profiles and empty caches, then places the
    /// initial `N/3` UEs on uniformly random APs.
    pub fn new(config: &SimConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let catalogue = ZipfCatalogue::new(config.catalogue_size, config.slope)?;
        let profiles = catalogue.generate_profiles(
            config.profile_count,
            config.profile_size,
            &mut substream(config.seed, STREAM_PROFILES),
        )?;
        let assigner = ProfileAssigner::new(config.profile_count, config.slope)?;
        let map = config.topology.cache_map(config.aps)?;
        let cache_count = map.iter().max().map_or(0, |x| x + 1);
        let caches = (0..cache_count)
            .map(|_| AnyCache::new(config.cache_policy, config.cache_size))
            .collect();
        let aps = map
            .iter()
            .enumerate()
            .map(|(i, &cache)| ApState {
                id: ApId(i),
                cache,
                n: 0,
            })
            .collect();

        let mut world = World {
            config: config.clone(),
            catalogue,
            profiles,
            assigner,
            caches,
            aps,
            ues: VecDeque::new(),
            next_ue: 0,
            clock: 0.0,
            assign_rng: substream(config.seed, STREAM_ASSIGN),
            random_attach_rng: substream(config.seed, STREAM_RANDOM_ATTACH),
            requester_rng: substream(config.seed, STREAM_REQUESTER),
        };
        let mut attach_rng = substream(config.seed, STREAM_INITIAL_ATTACH);
        for _ in 0..config.initial_ues() {
            let profile = world.assigner.assign(&mut world.assign_rng);
            let ap = ApId(attach_rng.gen_range(0..config.aps));
            world.admit(profile, ap);
        }
        Ok(world)
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn catalogue(&self) -> &ZipfCatalogue {
        &self.catalogue
    }

    pub fn profiles(&self) -> &[UeProfile] {
        &self.profiles
    }

    pub fn caches(&self) -> &[AnyCache] {
        &self.caches
    }

    pub fn aps(&self) -> &[ApState] {
        &self.aps
    }

    /// UEs in arrival order; the front departs next.
    pub fn ues(&self) -> impl Iterator<Item = &UeState> {
        self.ues.iter()
    }

    pub fn population(&self) -> usize {
        self.ues.len()
    }

    pub fn users_per_ap(&self) -> Vec<u64> {
        self.aps.iter().map(|a| a.n).collect()
    }

    /// Simulated seconds elapsed.
    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn cache_indexes(&self) -> Vec<CacheIndex> {
        self.caches.iter().map(|c| c.export_index()).collect()
    }

    fn admit(&mut self, profile: usize, ap: ApId) {
        let id = self.next_ue;
        self.next_ue += 1;
        self.aps[ap.0].n += 1;
        self.ues.push_back(UeState {
            id,
            profile,
            attached_ap: Some(ap),
            arrival_order: id,
            requests: substream(self.config.seed, STREAM_UE_BASE + id),
        });
    }

    /// Removes the longest-standing UE.
    pub fn depart(&mut self) -> Option<UeState> {
        let mut ue = self.ues.pop_front()?;
        if let Some(ap) = ue.attached_ap.take() {
            self.aps[ap.0].n -= 1;
        }
        Some(ue)
    }

    /// Admits a UE with a freshly assigned profile, placed by `policy`.
    /// Returns the chosen AP and, for ICCON, its score.
    pub fn arrive(&mut self, policy: SelectionPolicy) -> (ApId, Option<FitScore>) {
        let profile = self.assigner.assign(&mut self.assign_rng);
        let (ap, score) = match policy {
            SelectionPolicy::Random => (self.random_ap(), None),
            SelectionPolicy::Iccon => {
                let snapshots = self.cache_indexes();
                let per_ap: Vec<&CacheIndex> =
                    self.aps.iter().map(|a| &snapshots[a.cache]).collect();
                let score = select_ap(
                    &self.profiles[profile],
                    &per_ap,
                    &self.users_per_ap(),
                    self.config.w,
                )
                .expect("validated configuration");
                (score.ap, Some(score))
            }
        };
        self.admit(profile, ap);
        (ap, score)
    }

    /// Picks a uniformly random in-system UE and draws its next request.
    /// The clock advances by an exponential gap at the aggregate rate
    /// `n * lambda_c`. Returns the requester's queue position and the item.
    pub fn draw_request(&mut self) -> Option<(usize, ContentId)> {
        let n = self.ues.len();
        if n == 0 {
            return None;
        }
        let who = self.requester_rng.gen_range(0..n);
        let u: f64 = self.requester_rng.gen();
        self.clock += -(1.0 - u).ln() / (n as f64 * self.config.request_rate);
        let ue = &mut self.ues[who];
        let item = self.profiles[ue.profile].sample_request(&mut ue.requests);
        Some((who, item))
    }

    pub fn ue_at(&self, position: usize) -> &UeState {
        &self.ues[position]
    }

    /// Serves `item` from the cache behind `ap`.
    pub fn deliver(&mut self, ap: ApId, item: ContentId) -> (usize, Outcome) {
        let cache = self.aps[ap.0].cache;
        (cache, self.caches[cache].access(item))
    }

    pub fn random_ap(&mut self) -> ApId {
        ApId(self.random_attach_rng.gen_range(0..self.aps.len()))
    }

    /// Issues one request through the requester's attached AP.
    pub fn step_request(&mut self) -> Option<(usize, ContentId, Outcome)> {
        let (who, item) = self.draw_request()?;
        let ap = self.ues[who].attached_ap.expect("in-system UE is attached");
        let (cache, outcome) = self.deliver(ap, item);
        Some((cache, item, outcome))
    }

    /// Runs requests until every cache that has attached UEs is stable or
    /// the phase cap is reached.
    pub fn stabilize(&mut self) -> PhaseStats {
        let st: Stabilization = self.config.stabilization;
        let c = self.config.cache_size as u64;
        let window = st.window_mult as u64 * c;
        let eps = st.eps;

        let mut active = vec![false; self.caches.len()];
        for ap in &self.aps {
            if ap.n > 0 {
                active[ap.cache] = true;
            }
        }
        let mut unstable = active.iter().filter(|a| **a).count();
        let cap = st.cap_mult as u64 * c * unstable as u64;
        let mut windows = vec![StabilityWindow::default(); self.caches.len()];

        let mut stats = PhaseStats::default();
        while unstable > 0 {
            if stats.requests >= cap {
                stats.capped = true;
                break;
            }
            let Some((cache, _, outcome)) = self.step_request() else {
                break;
            };
            stats.requests += 1;
            stats.hits += outcome.hit as u64;
            if windows[cache].record(outcome.hit, window, eps) {
                unstable -= 1;
            }
        }
        debug_assert_eq!(
            self.aps.iter().map(|a| a.n).sum::<u64>(),
            self.ues.len() as u64
        );
        stats
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::config::Topology;

    fn small() -> SimConfig {
        SimConfig {
            ues: 30,
            aps: 3,
            catalogue_size: 200,
            cache_size: 10,
            profile_count: 5,
            profile_size: 20,
            ..SimConfig::fig3(3)
        }
    }

    #[test]
    fn initial_population() {
        let world = World::new(&small()).unwrap();
        assert_eq!(world.population(), 10);
        assert_eq!(world.users_per_ap().iter().sum::<u64>(), 10);
        assert!(world.ues().all(|u| u.attached_ap.is_some()));
    }

    #[test]
    fn fifo_departure() {
        let mut world = World::new(&small()).unwrap();
        let first = world.ues().next().unwrap().arrival_order;
        let gone = world.depart().unwrap();
        assert_eq!(gone.arrival_order, first);
        assert!(gone.attached_ap.is_none());
        assert_eq!(world.users_per_ap().iter().sum::<u64>(), 9);
    }

    #[test]
    fn stability_window_latches() {
        let mut w = StabilityWindow::default();
        assert!(!w.record(true, 2, 0.01));
        assert!(!w.record(true, 2, 0.01));
        assert!(!w.record(true, 2, 0.01));
        assert!(w.record(true, 2, 0.01));
        assert!(w.stable);
        // later windows do not unlatch
        w.record(false, 2, 0.01);
        assert!(!w.record(false, 2, 0.01));
        assert!(w.stable);
    }

    #[test]
    fn small_cache_holding_whole_profile_stabilizes_at_one() {
        let cfg = SimConfig {
            ues: 3,
            aps: 1,
            catalogue_size: 50,
            cache_size: 5,
            profile_count: 1,
            profile_size: 1,
            ..SimConfig::fig3(11)
        };
        let mut world = World::new(&cfg).unwrap();
        let stats = world.stabilize();
        assert!(!stats.capped);
        // windows of 50: 49/50, then 50/50 (gap 0.02), then 50/50
        assert_eq!(stats.requests, 150);
        assert_eq!(stats.hits, 149);
    }

    #[test]
    fn random_arrivals_on_one_ap() {
        let cfg = SimConfig {
            aps: 1,
            policy: SelectionPolicy::Random,
            ..small()
        };
        let mut world = World::new(&cfg).unwrap();
        for _ in 0..5 {
            world.depart();
            assert_eq!(world.arrive(SelectionPolicy::Random).0, ApId(0));
        }
    }

    #[test]
    fn shared_topology_single_cache() {
        let cfg = SimConfig {
            topology: Topology::Shared,
            ..small()
        };
        let mut world = World::new(&cfg).unwrap();
        assert_eq!(world.caches().len(), 1);
        world.stabilize();
        assert!(world.caches()[0].len() <= cfg.cache_size);
    }
}
