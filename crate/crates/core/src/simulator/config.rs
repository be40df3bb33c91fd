use std::fmt;
use std::str::FromStr;

use crate::caching::CachePolicy;
use crate::error::ConfigError;

/// How a newly arriving UE picks its AP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectionPolicy {
    /// Best fit `F` between the UE profile and each AP's cache index.
    Iccon,
    /// Uniformly random AP.
    Random,
}

impl FromStr for SelectionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iccon" => Ok(SelectionPolicy::Iccon),
            "random" => Ok(SelectionPolicy::Random),
            other => Err(format!("expected `iccon` or `random`, got `{other}`")),
        }
    }
}

impl fmt::Display for SelectionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionPolicy::Iccon => "iccon",
            SelectionPolicy::Random => "random",
        })
    }
}

/// Which APs share a cache.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Topology {
    /// One cache behind every AP.
    PerAp,
    /// A single cache shared by all APs.
    Shared,
    /// Consecutive runs of APs share a cache; sizes sum to M.
    Groups(Vec<usize>),
}

impl Topology {
    /// Cache position for each of `aps` APs.
    pub fn cache_map(&self, aps: usize) -> Result<Vec<usize>, ConfigError> {
        match self {
            Topology::PerAp => Ok((0..aps).collect()),
            Topology::Shared => Ok(vec![0; aps]),
            Topology::Groups(sizes) => {
                if sizes.iter().sum::<usize>() != aps || sizes.contains(&0) {
                    return Err(ConfigError::invalid(
                        "topology",
                        format!("group sizes {sizes:?} must be positive and sum to M = {aps}"),
                    ));
                }
                Ok(sizes
                    .iter()
                    .enumerate()
                    .flat_map(|(g, &n)| std::iter::repeat_n(g, n))
                    .collect())
            }
        }
    }
}

impl FromStr for Topology {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per-ap" => Ok(Topology::PerAp),
            "shared" => Ok(Topology::Shared),
            other => {
                let list = other.strip_prefix("groups:").ok_or_else(|| {
                    format!("expected `per-ap`, `shared` or `groups:<n,n,..>`, got `{other}`")
                })?;
                list.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<usize>()
                            .map_err(|e| format!("bad group size `{t}`: {e}"))
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map(Topology::Groups)
            }
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::PerAp => f.write_str("per-ap"),
            Topology::Shared => f.write_str("shared"),
            Topology::Groups(sizes) => {
                let parts: Vec<String> = sizes.iter().map(|n| n.to_string()).collect();
                write!(f, "groups:{}", parts.join(","))
            }
        }
    }
}

/// When a cache counts as stable: the hit ratios of its two latest disjoint
/// windows of `window_mult * c` requests differ by less than `eps`. A phase
/// gives up after `cap_mult * c` requests per active cache.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stabilization {
    pub window_mult: usize,
    pub eps: f64,
    pub cap_mult: usize,
}

impl Default for Stabilization {
    fn default() -> Self {
        Stabilization {
            window_mult: 10,
            eps: 0.005,
            cap_mult: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Total UEs `N`; a third start in the system, two thirds arrive later.
    pub ues: usize,
    /// APs `M`.
    pub aps: usize,
    /// Catalogue size `C`.
    pub catalogue_size: usize,
    /// Cache capacity in items.
    pub cache_size: usize,
    pub slope: f64,
    /// Per-UE request rate, requests per second.
    pub request_rate: f64,
    /// Churn rate, users per second.
    pub churn_rate: f64,
    pub profile_count: usize,
    /// Items per profile.
    pub profile_size: usize,
    /// Weight of the profile match in `F`.
    pub w: f64,
    pub policy: SelectionPolicy,
    pub cache_policy: CachePolicy,
    pub topology: Topology,
    pub seed: u64,
    pub stabilization: Stabilization,
}

impl SimConfig {
    /// Parameters of the published churn experiment with the given seed.
    pub fn fig3(seed: u64) -> Self {
        SimConfig {
            ues: 150,
            aps: 10,
            catalogue_size: 10_000,
            cache_size: 500,
            slope: 0.8,
            request_rate: 0.01,
            churn_rate: 0.003,
            profile_count: 50,
            profile_size: 1000,
            w: 0.65,
            policy: SelectionPolicy::Iccon,
            cache_policy: CachePolicy::Lfu,
            topology: Topology::PerAp,
            seed,
            stabilization: Stabilization::default(),
        }
    }

    pub fn initial_ues(&self) -> usize {
        self.ues / 3
    }

    pub fn churn_steps(&self) -> usize {
        2 * self.ues / 3
    }

    pub fn cache_count(&self) -> usize {
        self.topology
            .cache_map(self.aps)
            .map(|m| m.iter().max().map_or(0, |x| x + 1))
            .unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.ues < 3 {
            return Err(ConfigError::invalid(
                "N",
                format!("need at least 3 UEs, got {}", self.ues),
            ));
        }
        if self.aps == 0 {
            return Err(ConfigError::invalid("M", "need at least one AP"));
        }
        if self.cache_size == 0 || self.cache_size >= self.catalogue_size {
            return Err(ConfigError::invalid(
                "c",
                format!(
                    "cache size must satisfy 0 < c < C = {}, got {}",
                    self.catalogue_size, self.cache_size
                ),
            ));
        }
        if !self.slope.is_finite() || self.slope < 0.0 {
            return Err(ConfigError::invalid(
                "s",
                format!("must be >= 0, got {}", self.slope),
            ));
        }
        if !self.request_rate.is_finite() || self.request_rate <= 0.0 {
            return Err(ConfigError::invalid(
                "lambda_c",
                format!("must be > 0, got {}", self.request_rate),
            ));
        }
        if !self.churn_rate.is_finite() || self.churn_rate <= 0.0 {
            return Err(ConfigError::invalid(
                "lambda_v",
                format!("must be > 0, got {}", self.churn_rate),
            ));
        }
        if self.profile_count == 0 {
            return Err(ConfigError::invalid("U", "need at least one profile"));
        }
        if self.profile_size == 0 || self.profile_size > self.catalogue_size {
            return Err(ConfigError::invalid(
                "u",
                format!(
                    "must lie in [1, C = {}], got {}",
                    self.catalogue_size, self.profile_size
                ),
            ));
        }
        if !(0.0..=1.0).contains(&self.w) {
            return Err(ConfigError::invalid(
                "w",
                format!("must lie in [0, 1], got {}", self.w),
            ));
        }
        let st = &self.stabilization;
        if st.window_mult == 0 {
            return Err(ConfigError::invalid(
                "stab_window_mult",
                "must be at least 1",
            ));
        }
        if !st.eps.is_finite() || st.eps <= 0.0 {
            return Err(ConfigError::invalid("stab_eps", "must be > 0"));
        }
        if st.cap_mult < 2 * st.window_mult {
            return Err(ConfigError::invalid(
                "stab_cap_mult",
                "must allow at least two stabilization windows (>= 2 * stab_window_mult)",
            ));
        }
        self.topology.cache_map(self.aps)?;
        Ok(())
    }
}
