//! Profile matching and AP selection.
//!
//! An AP is scored for a UE with `F = w*f + (1-w)*l`, where `f` is the share
//! of the UE's profile found in the AP's cache index and `l = 1 - n_i / sum n`
//! favours lightly loaded APs. The UE is sent to the AP with the highest `F`.

mod bloom;
mod profiler;

use std::fmt;

pub use bloom::{approx_match_f, bloom_optimal_k, bloom_theoretical_fpr, BloomFilter};
pub use profiler::VirtualCacheProfiler;

use crate::caching::CacheIndex;
use crate::catalogue::UeProfile;
use crate::error::ConfigError;

/// 0-based AP position; displayed 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ApId(pub usize);

impl fmt::Display for ApId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AP{}", self.0 + 1)
    }
}

/// Score of one AP for one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitScore {
    pub ap: ApId,
    /// Profile match.
    pub f: f64,
    /// Load term.
    pub l: f64,
    /// Combined fit.
    pub fit: f64,
}

/// Share of `profile`'s items present in `index`.
pub fn profile_match_f(profile: &UeProfile, index: &CacheIndex) -> Result<f64, ConfigError> {
    if profile.is_empty() {
        return Err(ConfigError::invalid(
            "profile",
            "cannot match an empty profile",
        ));
    }
    Ok(index.overlap(profile.items()) as f64 / profile.len() as f64)
}

/// `1 - n_ap / sum n`. With nobody attached anywhere every AP scores 1.
pub fn load_l(ap: ApId, users_per_ap: &[u64]) -> f64 {
    let total: u64 = users_per_ap.iter().sum();
    if total == 0 {
        return 1.0;
    }
    1.0 - users_per_ap[ap.0] as f64 / total as f64
}

fn check_unit(name: &'static str, v: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ConfigError::invalid(
            name,
            format!("must lie in [0, 1], got {v}"),
        ))
    }
}

/// `w*f + (1-w)*l`.
pub fn fit_f(f: f64, l: f64, w: f64) -> Result<f64, ConfigError> {
    check_unit("f", f)?;
    check_unit("l", l)?;
    check_unit("w", w)?;
    Ok(combine(f, l, w))
}

#[inline]
fn combine(f: f64, l: f64, w: f64) -> f64 {
    w * f + (1.0 - w) * l
}

/// Position of the largest value; the lowest position wins ties.
pub fn argmax_lowest(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        match best {
            Some(b) if *v <= values[b] => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Scores every AP from precomputed match ratios and returns the best one.
pub fn select_by_match(match_ratios: &[f64], users_per_ap: &[u64], w: f64) -> FitScore {
    assert_eq!(
        match_ratios.len(),
        users_per_ap.len(),
        "one match ratio per AP"
    );
    assert!(!match_ratios.is_empty(), "no APs to select from");
    let total: u64 = users_per_ap.iter().sum();
    let mut best: Option<FitScore> = None;
    for (i, (&f, &n)) in match_ratios.iter().zip(users_per_ap).enumerate() {
        let l = if total == 0 {
            1.0
        } else {
            1.0 - n as f64 / total as f64
        };
        let score = FitScore {
            ap: ApId(i),
            f,
            l,
            fit: combine(f, l, w),
        };
        match best {
            Some(b) if score.fit <= b.fit => {}
            _ => best = Some(score),
        }
    }
    best.expect("at least one AP")
}

/// Picks the AP whose cache index best fits `profile`. APs behind a shared
/// cache pass the same index.
pub fn select_ap(
    profile: &UeProfile,
    indexes: &[&CacheIndex],
    users_per_ap: &[u64],
    w: f64,
) -> Result<FitScore, ConfigError> {
    check_unit("w", w)?;
    if indexes.is_empty() {
        return Err(ConfigError::invalid("M", "no APs to select from"));
    }
    if indexes.len() != users_per_ap.len() {
        return Err(ConfigError::invalid(
            "M",
            "one load count per AP is required",
        ));
    }
    let ratios = indexes
        .iter()
        .map(|idx| profile_match_f(profile, idx))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(select_by_match(&ratios, users_per_ap, w))
}
