//! Content catalogue with Zipf-like popularity and the synthetic UE profiles
//! built on top of it.
//!
//! Every experiment draws its workload from here. Sampling is inverse-CDF over
//! a precomputed cumulative table, so draws are exact and a pure function of
//! the random stream.

use std::collections::HashSet;
use std::fmt;

use rand::Rng;

use crate::error::ConfigError;

/// Distinct profiles are regenerated on collision at most this many times.
pub const MAX_PROFILE_ATTEMPTS: usize = 1000;

/// Content identifier. The rank is 1-based; rank 1 is the most popular item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContentId(u32);

impl ContentId {
    /// Panics on rank 0.
    pub fn new(rank: u32) -> Self {
        assert!(rank >= 1, "content ranks start at 1");
        ContentId(rank)
    }

    pub fn rank(self) -> u32 {
        self.0
    }

    pub(crate) fn slot(self) -> usize {
        (self.0 - 1) as usize
    }
}

impl fmt::Display for ContentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Items `1..=C` with popularity `p_i = i^-s / H`.
#[derive(Debug, Clone)]
pub struct ZipfCatalogue {
    slope: f64,
    norm: f64,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ZipfCatalogue {
    pub fn new(size: usize, slope: f64) -> Result<Self, ConfigError> {
        if size == 0 {
            return Err(ConfigError::invalid(
                "C",
                "catalogue must hold at least one item",
            ));
        }
        if size > u32::MAX as usize {
            return Err(ConfigError::invalid("C", "catalogue too large"));
        }
        if !slope.is_finite() || slope < 0.0 {
            return Err(ConfigError::invalid(
                "s",
                format!("slope must be a finite value >= 0, got {slope}"),
            ));
        }

        let raw: Vec<f64> = (1..=size).map(|i| (i as f64).powf(-slope)).collect();
        // smallest terms first
        let norm: f64 = raw.iter().rev().sum();
        let probs: Vec<f64> = raw.into_iter().map(|w| w / norm).collect();

        let mut cumulative = Vec::with_capacity(size);
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cumulative.push(acc);
        }
        // guard the top of the table against rounding below 1
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }

        Ok(ZipfCatalogue {
            slope,
            norm,
            probs,
            cumulative,
        })
    }

    pub fn size(&self) -> usize {
        self.probs.len()
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    /// The normalisation constant `H = sum_j j^-s`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, id: ContentId) -> f64 {
        self.probs[id.slot()]
    }

    /// Sum of the `count` largest probabilities.
    pub fn head_mass(&self, count: usize) -> f64 {
        match count {
            0 => 0.0,
            n if n >= self.size() => 1.0,
            n => self.cumulative[n - 1],
        }
    }

    pub fn contains(&self, id: ContentId) -> bool {
        id.slot() < self.size()
    }

    /// Draws an item with probability `p_i`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ContentId {
        let idx = sample_cumulative(&self.cumulative, rng);
        ContentId(idx as u32 + 1)
    }

    /// Uniformly random distinct profiles of `items_per_profile` items each.
    pub fn generate_profiles<R: Rng + ?Sized>(
        &self,
        count: usize,
        items_per_profile: usize,
        rng: &mut R,
    ) -> Result<Vec<UeProfile>, ConfigError> {
        if count == 0 {
            return Err(ConfigError::invalid(
                "U",
                "at least one profile is required",
            ));
        }
        if items_per_profile == 0 || items_per_profile > self.size() {
            return Err(ConfigError::invalid(
                "u",
                format!(
                    "profile size must be in [1, {}], got {items_per_profile}",
                    self.size()
                ),
            ));
        }

        let mut seen: HashSet<Vec<ContentId>> = HashSet::with_capacity(count);
        let mut profiles = Vec::with_capacity(count);
        let mut attempts = 0;
        while profiles.len() < count {
            let mut items: Vec<ContentId> =
                rand::seq::index::sample(rng, self.size(), items_per_profile)
                    .into_iter()
                    .map(|i| ContentId(i as u32 + 1))
                    .collect();
            items.sort_unstable();
            if seen.contains(&items) {
                attempts += 1;
                if attempts >= MAX_PROFILE_ATTEMPTS {
                    return Err(ConfigError::ProfileCollision {
                        wanted: count,
                        attempts,
                    });
                }
                continue;
            }
            seen.insert(items.clone());
            profiles.push(UeProfile::from_sorted(items, self));
        }
        Ok(profiles)
    }
}

fn sample_cumulative<R: Rng + ?Sized>(cumulative: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let idx = cumulative.partition_point(|&c| c <= u);
    idx.min(cumulative.len() - 1)
}

/// A UE's interest set and the distribution its requests follow: global
/// popularity renormalised over the set.
#[derive(Debug, Clone, PartialEq)]
pub struct UeProfile {
    items: Vec<ContentId>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl UeProfile {
    /// Builds a profile from distinct catalogue items in any order.
    pub fn from_items(
        items: impl IntoIterator<Item = ContentId>,
        catalogue: &ZipfCatalogue,
    ) -> Result<Self, ConfigError> {
        let mut items: Vec<ContentId> = items.into_iter().collect();
        items.sort_unstable();
        if let Some(bad) = items.iter().find(|id| !catalogue.contains(**id)) {
            return Err(ConfigError::invalid(
                "profile",
                format!(
                    "item {bad} is outside the catalogue of {} items",
                    catalogue.size()
                ),
            ));
        }
        if items.windows(2).any(|w| w[0] == w[1]) {
            return Err(ConfigError::invalid("profile", "items must be distinct"));
        }
        Ok(Self::from_sorted(items, catalogue))
    }

    pub(crate) fn from_sorted(items: Vec<ContentId>, catalogue: &ZipfCatalogue) -> Self {
        let raw: Vec<f64> = items.iter().map(|id| catalogue.probability(*id)).collect();
        let total: f64 = raw.iter().rev().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        UeProfile {
            items,
            weights,
            cumulative,
        }
    }

    /// Items in ascending rank, i.e. descending popularity.
    pub fn items(&self) -> &[ContentId] {
        &self.items
    }

    pub fn request_weights(&self) -> &[f64] {
        &self.weights
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

    /// Draws one of the profile's items. Panics on an empty profile.
    pub fn sample_request<R: Rng + ?Sized>(&self, rng: &mut R) -> ContentId {
        assert!(
            !self.items.is_empty(),
            "cannot sample from an empty profile"
        );
        self.items[sample_cumulative(&self.cumulative, rng)]
    }
}

/// Zipf-weighted choice among a fixed list of profiles: profile `j` is picked
/// with probability `j^-s / sum_k k^-s`.
#[derive(Debug, Clone)]
pub struct ProfileAssigner {
    weights: ZipfCatalogue,
}

impl ProfileAssigner {
    pub fn new(profile_count: usize, slope: f64) -> Result<Self, ConfigError> {
        let weights = ZipfCatalogue::new(profile_count, slope).map_err(|_| {
            ConfigError::invalid(
                "U",
                "profile assignment needs at least one profile and s >= 0",
            )
        })?;
        Ok(ProfileAssigner { weights })
    }

    pub fn weights(&self) -> &[f64] {
        self.weights.probabilities()
    }

    /// Returns a 0-based profile index.
    pub fn assign<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.weights.sample(rng).slot()
    }
}

/// Picks one of `profiles` with Zipf weights over its position.
pub fn assign_profile<'a, R: Rng + ?Sized>(
    profiles: &'a [UeProfile],
    slope: f64,
    rng: &mut R,
) -> &'a UeProfile {
    assert!(!profiles.is_empty(), "no profiles to assign");
    let assigner = ProfileAssigner::new(profiles.len(), slope).expect("non-empty profile list");
    &profiles[assigner.assign(rng)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    fn frequencies(n: usize, draws: usize, mut draw: impl FnMut() -> usize) -> Vec<f64> {
        let mut counts = vec![0usize; n];
        for _ in 0..draws {
            counts[draw()] += 1;
        }
        counts
            .into_iter()
            .map(|c| c as f64 / draws as f64)
            .collect()
    }

    fn within_sigma(freq: f64, p: f64, n: usize, k: f64) -> bool {
        (freq - p).abs() <= k * (p * (1.0 - p) / n as f64).sqrt()
    }

    #[test]
    fn two_items_slope_one() {
        let cat = ZipfCatalogue::new(2, 1.0).unwrap();
        assert!((cat.probabilities()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((cat.probabilities()[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((cat.norm() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn zero_slope_is_uniform() {
        let cat = ZipfCatalogue::new(5, 0.0).unwrap();
        for p in cat.probabilities() {
            assert!((p - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn fig3_catalogue_head_matches_direct_sum() {
        // reference: plain left-to-right summation, independent of the
        // reverse-order sum used by the constructor
        let mut h = 0.0f64;
        for i in 1..=10_000u32 {
            h += (i as f64).powf(-0.8);
        }
        let cat = ZipfCatalogue::new(10_000, 0.8).unwrap();
        assert!((cat.probabilities()[0] - 1.0 / h).abs() < 1e-14);
        let total: f64 = cat.probabilities().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(cat.probabilities().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ZipfCatalogue::new(0, 1.0).is_err());
        assert!(ZipfCatalogue::new(10, -0.1).is_err());
        assert!(ZipfCatalogue::new(10, f64::NAN).is_err());
    }

    #[test]
    fn single_item_always_sampled() {
        let cat = ZipfCatalogue::new(1, 2.3).unwrap();
        let mut r = rng();
        for _ in 0..1000 {
            assert_eq!(cat.sample(&mut r).rank(), 1);
        }
    }

    #[test]
    fn uniform_sampling_within_three_sigma() {
        let cat = ZipfCatalogue::new(5, 0.0).unwrap();
        let mut r = rng();
        let n = 1_000_000;
        let freq = frequencies(5, n, || cat.sample(&mut r).slot());
        for f in freq {
            assert!(within_sigma(f, 0.2, n, 3.0), "freq {f}");
        }
    }

    #[test]
    fn two_item_sampling_within_three_sigma() {
        let cat = ZipfCatalogue::new(2, 1.0).unwrap();
        let mut r = rng();
        let n = 1_000_000;
        let freq = frequencies(2, n, || cat.sample(&mut r).slot());
        assert!(within_sigma(freq[0], 2.0 / 3.0, n, 3.0), "freq {}", freq[0]);
    }

    #[test]
    fn full_catalogue_profile() {
        let cat = ZipfCatalogue::new(10, 0.8).unwrap();
        let profiles = cat.generate_profiles(1, 10, &mut rng()).unwrap();
        let ranks: Vec<u32> = profiles[0].items().iter().map(|c| c.rank()).collect();
        assert_eq!(ranks, (1..=10).collect::<Vec<_>>());
    }

    #[test]
    fn fig3_profiles_are_distinct_and_sized() {
        let cat = ZipfCatalogue::new(10_000, 0.8).unwrap();
        let profiles = cat.generate_profiles(50, 1000, &mut rng()).unwrap();
        assert_eq!(profiles.len(), 50);
        let sets: HashSet<Vec<ContentId>> = profiles.iter().map(|p| p.items().to_vec()).collect();
        assert_eq!(sets.len(), 50);
        for p in &profiles {
            assert_eq!(p.len(), 1000);
            assert!(p.items().windows(2).all(|w| w[0] < w[1]));
            assert!(p.items().iter().all(|c| (1..=10_000).contains(&c.rank())));
            let total: f64 = p.request_weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(p.request_weights().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn singleton_profiles_distinct() {
        let cat = ZipfCatalogue::new(100, 0.8).unwrap();
        let profiles = cat.generate_profiles(2, 1, &mut rng()).unwrap();
        assert_eq!(profiles[0].len(), 1);
        assert_ne!(profiles[0].items(), profiles[1].items());
    }

    #[test]
    fn profile_generation_errors() {
        let cat = ZipfCatalogue::new(10, 0.8).unwrap();
        assert!(matches!(
            cat.generate_profiles(1, 11, &mut rng()),
            Err(ConfigError::Invalid { name: "u", .. })
        ));
        assert!(matches!(
            cat.generate_profiles(2, 10, &mut rng()),
            Err(ConfigError::ProfileCollision {
                attempts: MAX_PROFILE_ATTEMPTS,
                ..
            })
        ));
    }

    #[test]
    fn assign_single_profile() {
        let cat = ZipfCatalogue::new(10, 0.8).unwrap();
        let profiles = cat.generate_profiles(1, 3, &mut rng()).unwrap();
        let mut r = rng();
        for _ in 0..100 {
            assert_eq!(assign_profile(&profiles, 0.8, &mut r), &profiles[0]);
        }
    }

    #[test]
    fn assign_two_profiles_slope_one() {
        let assigner = ProfileAssigner::new(2, 1.0).unwrap();
        let mut r = rng();
        let n = 1_000_000;
        let freq = frequencies(2, n, || assigner.assign(&mut r));
        assert!(within_sigma(freq[0], 2.0 / 3.0, n, 3.0));
    }

    #[test]
    fn assign_fifty_profiles_matches_weights() {
        let assigner = ProfileAssigner::new(50, 0.8).unwrap();
        let h: f64 = (1..=50).map(|j| (j as f64).powf(-0.8)).sum();
        let mut r = rng();
        let freq = frequencies(50, 1_000_000, || assigner.assign(&mut r));
        let max_dev = freq
            .iter()
            .enumerate()
            .map(|(j, f)| (f - ((j + 1) as f64).powf(-0.8) / h).abs())
            .fold(0.0, f64::max);
        assert!(max_dev < 0.005, "max deviation {max_dev}");
    }

    #[test]
    fn singleton_profile_requests() {
        let cat = ZipfCatalogue::new(5, 0.8).unwrap();
        let profile = UeProfile::from_items([ContentId::new(1)], &cat).unwrap();
        let mut r = rng();
        for _ in 0..100 {
            assert_eq!(profile.sample_request(&mut r), ContentId::new(1));
        }
    }

    #[test]
    fn two_item_profile_renormalises() {
        let cat = ZipfCatalogue::new(2, 1.0).unwrap();
        let profile = UeProfile::from_items([ContentId::new(2), ContentId::new(1)], &cat).unwrap();
        assert!((profile.request_weights()[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sparse_profile_request_frequencies() {
        let cat = ZipfCatalogue::new(10, 0.8).unwrap();
        let ids = [3u32, 7, 9];
        let profile = UeProfile::from_items(ids.map(ContentId::new), &cat).unwrap();
        let raw: Vec<f64> = ids.iter().map(|&i| (i as f64).powf(-0.8)).collect();
        let total: f64 = raw.iter().sum();
        let mut r = rng();
        let n = 1_000_000;
        let freq = frequencies(3, n, || {
            let id = profile.sample_request(&mut r);
            ids.iter()
                .position(|&i| i == id.rank())
                .expect("item outside profile")
        });
        for (f, w) in freq.iter().zip(&raw) {
            assert!(
                within_sigma(*f, w / total, n, 3.0),
                "freq {f} vs {}",
                w / total
            );
        }
    }

    #[test]
    fn profile_validation() {
        let cat = ZipfCatalogue::new(5, 0.8).unwrap();
        assert!(UeProfile::from_items([ContentId::new(6)], &cat).is_err());
        assert!(UeProfile::from_items([ContentId::new(2), ContentId::new(2)], &cat).is_err());
    }
}
