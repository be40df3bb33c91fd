//! Property checks shared by the proptest suite and the acceptance runner.
//! Each check takes a generated case and compares the library against a
//! small brute-force model.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use iccon::caching::{Cache, CacheIndex, LfuCache, LruCache};
use iccon::catalogue::{ContentId, UeProfile, ZipfCatalogue};
use iccon::che::{bisect_increasing, CheInput, CheModel};
use iccon::matching::{approx_match_f, VirtualCacheProfiler};
use iccon::matching::{
    argmax_lowest, fit_f, load_l, profile_match_f, select_by_match, ApId, BloomFilter,
};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub type CheckResult = Result<(), TestCaseError>;

fn id(rank: u32) -> ContentId {
    ContentId::new(rank)
}

// ---------------------------------------------------------------- caches

/// (capacity, trace of ranks).
pub fn cache_trace(
    max_item: u32,
    max_cap: usize,
    max_len: usize,
) -> impl Strategy<Value = (usize, Vec<u32>)> {
    (
        0..=max_cap,
        prop::collection::vec(1..=max_item, 0..=max_len),
    )
}

/// Recency list, least recent first.
pub fn check_lru((capacity, trace): (usize, Vec<u32>)) -> CheckResult {
    let mut cache = LruCache::new(capacity);
    let mut list: Vec<u32> = Vec::new();
    for &rank in &trace {
        let expected_hit = match list.iter().position(|&x| x == rank) {
            Some(pos) => {
                list.remove(pos);
                list.push(rank);
                true
            }
            None => {
                if capacity > 0 {
                    if list.len() == capacity {
                        list.remove(0);
                    }
                    list.push(rank);
                }
                false
            }
        };
        let outcome = cache.access(id(rank));
        prop_assert_eq!(outcome.hit, expected_hit);
        prop_assert!(cache.len() <= capacity);
        let order: Vec<u32> = cache.recency_order().iter().map(|c| c.rank()).collect();
        prop_assert_eq!(&order, &list);
    }
    Ok(())
}

/// Perfect LFU by full scan: after every access the resident set is the top
/// `capacity` requested items under (count, last access, lower rank), with
/// the incoming item admitted only if it beats the weakest resident.
pub fn check_lfu((capacity, trace): (usize, Vec<u32>)) -> CheckResult {
    let mut cache = LfuCache::new(capacity);
    let mut count: HashMap<u32, u64> = HashMap::new();
    let mut last: HashMap<u32, u64> = HashMap::new();
    let mut resident: HashSet<u32> = HashSet::new();
    for (t, &rank) in trace.iter().enumerate() {
        let tick = t as u64 + 1;
        let was = resident.contains(&rank);
        *count.entry(rank).or_default() += 1;
        last.insert(rank, tick);
        let key = |r: u32| (count[&r], last[&r], std::cmp::Reverse(r));
        if !was && capacity > 0 {
            if resident.len() < capacity {
                resident.insert(rank);
            } else {
                let weakest = *resident.iter().min_by_key(|&&r| key(r)).unwrap();
                if key(rank) > key(weakest) {
                    resident.remove(&weakest);
                    resident.insert(rank);
                }
            }
        }
        let outcome = cache.access(id(rank));
        prop_assert_eq!(outcome.hit, was);
        prop_assert!(cache.len() <= capacity);

        let mut want: Vec<u32> = resident.iter().copied().collect();
        want.sort_unstable();
        let got: Vec<u32> = cache.resident().iter().map(|c| c.rank()).collect();
        prop_assert_eq!(&got, &want);

        // No requested outsider has a strictly larger count than any resident.
        let min_resident = resident.iter().map(|r| count[r]).min();
        if let (Some(min_resident), true) = (min_resident, resident.len() == capacity) {
            for (r, c) in &count {
                if !resident.contains(r) {
                    prop_assert!(
                        *c <= min_resident,
                        "outsider {} has {} > {}",
                        r,
                        c,
                        min_resident
                    );
                }
            }
        }
        prop_assert_eq!(cache.count(id(rank)), count[&rank]);
    }
    Ok(())
}

// -------------------------------------------------------------- matching

/// Scores on a dyadic grid so that scaling by powers of two and shifting by
/// grid multiples is exact in floating point.
pub fn score_vector() -> impl Strategy<Value = (Vec<f64>, u32, i32)> {
    (
        prop::collection::vec((0u32..=64).prop_map(|k| k as f64 / 64.0), 1..12),
        0u32..6,
        -64i32..=64,
    )
}

pub fn check_argmax_invariance((scores, log_scale, shift): (Vec<f64>, u32, i32)) -> CheckResult {
    let base = argmax_lowest(&scores);
    let scale = (1u64 << log_scale) as f64;
    let scaled: Vec<f64> = scores.iter().map(|x| x * scale).collect();
    let shifted: Vec<f64> = scores.iter().map(|x| x + shift as f64 / 64.0).collect();
    prop_assert_eq!(argmax_lowest(&scaled), base);
    prop_assert_eq!(argmax_lowest(&shifted), base);
    Ok(())
}

/// (match ratios, users per AP, w).
pub fn ap_landscape() -> impl Strategy<Value = (Vec<f64>, Vec<u64>, f64)> {
    (1usize..10).prop_flat_map(|m| {
        (
            prop::collection::vec(0.0f64..=1.0, m),
            prop::collection::vec(0u64..20, m),
            0.0f64..=1.0,
        )
    })
}

/// The AP chosen by `select_by_match` is the lowest-id argmax of the F vector
/// built from `fit_f` and `load_l`.
pub fn check_select_invariance((ratios, users, w): (Vec<f64>, Vec<u64>, f64)) -> CheckResult {
    let choice = select_by_match(&ratios, &users, w);
    let fits: Vec<f64> = ratios
        .iter()
        .enumerate()
        .map(|(i, &f)| fit_f(f, load_l(ApId(i), &users), w).unwrap())
        .collect();
    prop_assert_eq!(Some(choice.ap.0), argmax_lowest(&fits));
    let max = fits[choice.ap.0];
    for (i, &x) in fits.iter().enumerate() {
        prop_assert!(x <= max);
        if x == max {
            prop_assert!(i >= choice.ap.0);
        }
    }
    prop_assert_eq!(choice.fit, max);
    Ok(())
}

/// With equal loads, raising the chosen AP's match ratio keeps it chosen.
pub fn check_match_monotone(
    (ratios, users, w): (Vec<f64>, Vec<u64>, f64),
    bump: f64,
) -> CheckResult {
    let flat = vec![users[0]; users.len()];
    let before = select_by_match(&ratios, &flat, w).ap;
    let mut raised = ratios.clone();
    raised[before.0] = (raised[before.0] + bump).min(1.0);
    prop_assert_eq!(select_by_match(&raised, &flat, w).ap, before);
    Ok(())
}

pub fn check_load_sum(users: Vec<u64>) -> CheckResult {
    let total: f64 = (0..users.len())
        .map(|i| 1.0 - load_l(ApId(i), &users))
        .sum();
    if users.iter().sum::<u64>() > 0 {
        prop_assert!((total - 1.0).abs() < 1e-12, "sum of (1 - l) = {}", total);
    } else {
        prop_assert!(total.abs() < 1e-12);
    }
    Ok(())
}

/// (profile items, cached items, filter bits, seed) over a 500-item catalogue.
pub fn bloom_case() -> impl Strategy<Value = (Vec<u32>, Vec<u32>, usize, u64)> {
    (
        prop::collection::hash_set(1u32..=500, 1..60),
        prop::collection::hash_set(1u32..=500, 0..80),
        8usize..2048,
        any::<u64>(),
    )
        .prop_map(|(p, c, bits, seed)| {
            let mut p: Vec<u32> = p.into_iter().collect();
            let mut c: Vec<u32> = c.into_iter().collect();
            p.sort_unstable();
            c.sort_unstable();
            (p, c, bits, seed)
        })
}

pub fn check_approx_dominates(
    (profile, cached, bits, seed): (Vec<u32>, Vec<u32>, usize, u64),
) -> CheckResult {
    let catalogue = ZipfCatalogue::new(500, 0.8).unwrap();
    let profile = UeProfile::from_items(profile.into_iter().map(id), &catalogue).unwrap();
    let index = CacheIndex::new(cached.into_iter().map(id).collect(), 0);
    let filter = BloomFilter::from_index(&index, bits, seed).unwrap();
    let exact = profile_match_f(&profile, &index).unwrap();
    let approx = approx_match_f(&profile, &filter).unwrap();
    prop_assert!(approx >= exact, "approx {} < exact {}", approx, exact);
    for item in index.items() {
        prop_assert!(filter.contains(*item));
    }
    Ok(())
}

/// Random trace over a small alphabet, plus k.
pub fn profiler_case() -> impl Strategy<Value = (Vec<u32>, usize)> {
    (prop::collection::vec(1u32..=40, 1..300), 1usize..50)
}

pub fn check_profiler_top((trace, k): (Vec<u32>, usize)) -> CheckResult {
    let catalogue = ZipfCatalogue::new(40, 0.8).unwrap();
    let mut profiler = VirtualCacheProfiler::new();
    let mut count: HashMap<u32, (u64, usize)> = HashMap::new();
    for (t, &r) in trace.iter().enumerate() {
        profiler.record(id(r));
        let e = count.entry(r).or_default();
        e.0 += 1;
        e.1 = t;
    }
    let mut brute: Vec<(u32, u64, usize)> = count.iter().map(|(&r, &(c, t))| (r, c, t)).collect();
    brute.sort_by(|a, b| b.1.cmp(&a.1).then(b.2.cmp(&a.2)).then(a.0.cmp(&b.0)));
    let mut want: Vec<u32> = brute.iter().take(k).map(|e| e.0).collect();
    want.sort_unstable();
    let got: Vec<u32> = profiler
        .top(k, &catalogue)
        .unwrap()
        .items()
        .iter()
        .map(|c| c.rank())
        .collect();
    prop_assert_eq!(got, want);
    Ok(())
}

// ------------------------------------------------------------------- che

/// A strictly increasing cubic with a root somewhere in the bracket.
pub fn bisection_case() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.01f64..10.0, 0.0f64..5.0, -50.0f64..50.0, 1e-12f64..1e-3)
}

pub fn check_bisection_bracket((a, b, root, tol): (f64, f64, f64, f64)) -> CheckResult {
    let g = |x: f64| a * (x - root).powi(3) + b * (x - root);
    let lo = root - 60.0;
    let hi = root + 40.0;
    let r = bisect_increasing(g, lo, hi, tol).expect("the bracket holds a sign change");
    prop_assert!(
        r.g_lo <= 0.0 && r.g_hi >= 0.0,
        "bracket lost: g(lo)={} g(hi)={}",
        r.g_lo,
        r.g_hi
    );
    prop_assert!(r.lo <= r.x && r.x <= r.hi);
    prop_assert!(lo <= r.lo && r.hi <= hi);
    prop_assert_eq!(g(r.lo), r.g_lo);
    prop_assert_eq!(g(r.hi), r.g_hi);
    Ok(())
}

/// (C, s, c, alpha, beta).
pub fn che_case() -> impl Strategy<Value = (usize, f64, usize, f64, f64)> {
    (20usize..400)
        .prop_flat_map(|size| (Just(size), 0.0f64..1.5, 1..size, 1.0f64..1e4, 1.0f64..1e3))
}

pub fn check_che_bracket_and_scaling(
    (size, s, c, alpha, beta): (usize, f64, usize, f64, f64),
) -> CheckResult {
    let model = CheModel::new(size, s).unwrap();
    let input = CheInput {
        catalogue_size: size,
        slope: s,
        cache_size: c,
        alpha,
        request_rate: 0.01,
    };
    let root = model.solve_root(&input).unwrap();
    prop_assert!(root.g_lo <= 0.0 && 0.0 <= root.g_hi);
    prop_assert!(root.lo <= root.x && root.x <= root.hi);

    let base = model.solve(&input).unwrap();
    let scaled = model
        .solve(&CheInput {
            alpha: alpha * beta,
            ..input
        })
        .unwrap();
    prop_assert!(((scaled.tau * beta - base.tau) / base.tau).abs() <= 1e-9);
    prop_assert!(((scaled.r * beta - base.r) / base.r).abs() <= 1e-9);
    prop_assert!(base.chr > 0.0 && base.chr < 1.0);
    Ok(())
}
