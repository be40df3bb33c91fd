//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comment
//! N = 150
//! c = 5%C
//! alpha_list = 1, 10, 10^2
//! ```

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::caching::CachePolicy;
use crate::che::SweepSpec;
use crate::error::{ConfigError, ParseError};
use crate::simulator::{SelectionPolicy, SimConfig, Stabilization, Topology};

pub const KEYS: &[&str] = &[
    "N",
    "M",
    "C",
    "c",
    "s",
    "lambda_c",
    "lambda_v",
    "U",
    "u",
    "w",
    "policy",
    "cache_policy",
    "topology",
    "seed",
    "stab_window_mult",
    "stab_eps",
    "stab_cap_mult",
    "scenario",
    "slots",
    "requests_per_slot",
    "alpha_list",
    "c_ratio_list",
];

const SIM_REQUIRED: &[&str] = &[
    "N", "M", "C", "c", "s", "lambda_c", "lambda_v", "U", "u", "w",
];
const SWEEP_REQUIRED: &[&str] = &["C", "s", "lambda_c"];

pub const DEFAULT_SLOTS: u64 = 50;
pub const DEFAULT_REQUESTS_PER_SLOT: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Churn,
    PerRequest,
    CheSweep,
}

impl Scenario {
    pub fn is_simulation(self) -> bool {
        !matches!(self, Scenario::CheSweep)
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "churn" => Ok(Scenario::Churn),
            "per-request" => Ok(Scenario::PerRequest),
            "che-sweep" => Ok(Scenario::CheSweep),
            other => Err(format!(
                "expected `churn`, `per-request` or `che-sweep`, got `{other}`"
            )),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Churn => "churn",
            Scenario::PerRequest => "per-request",
            Scenario::CheSweep => "che-sweep",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioConfig {
    Simulation {
        sim: SimConfig,
        slots: u64,
        requests_per_slot: u64,
    },
    CheSweep(SweepSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Whether `seed` was set explicitly.
    pub seed: Option<u64>,
    pub body: ScenarioConfig,
}

impl ExperimentConfig {
    pub fn sim(&self) -> Option<&SimConfig> {
        match &self.body {
            ScenarioConfig::Simulation { sim, .. } => Some(sim),
            ScenarioConfig::CheSweep(_) => None,
        }
    }

    pub fn sweep(&self) -> Option<&SweepSpec> {
        match &self.body {
            ScenarioConfig::CheSweep(spec) => Some(spec),
            ScenarioConfig::Simulation { .. } => None,
        }
    }
}

struct Entries<'a> {
    map: HashMap<&'a str, (usize, &'a str)>,
}

impl<'a> Entries<'a> {
    fn parse(text: &'a str) -> Result<Self, ParseError> {
        let mut map = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ParseError::Syntax {
                line,
                text: raw.trim().to_string(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ParseError::Syntax {
                    line,
                    text: raw.trim().to_string(),
                });
            }
            if !KEYS.contains(&key) {
                return Err(ParseError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            if map.insert(key, (line, value)).is_some() {
                return Err(ParseError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
        }
        Ok(Entries { map })
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn line(&self, key: &str) -> usize {
        self.map.get(key).map_or(0, |e| e.0)
    }

    fn require(&self, keys: &[&str]) -> Result<(), ParseError> {
        match keys.iter().find(|k| !self.has(k)) {
            Some(k) => Err(ParseError::Missing { key: k.to_string() }),
            None => Ok(()),
        }
    }

    fn get<T>(
        &self,
        key: &str,
        parse: impl FnOnce(&str) -> Result<T, String>,
    ) -> Result<Option<T>, ParseError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(&(line, value)) => {
                parse(value)
                    .map(Some)
                    .map_err(|reason| ParseError::Malformed {
                        line,
                        key: key.to_string(),
                        reason,
                    })
            }
        }
    }

    fn must<T>(
        &self,
        key: &str,
        parse: impl FnOnce(&str) -> Result<T, String>,
    ) -> Result<T, ParseError> {
        self.get(key, parse)?.ok_or_else(|| ParseError::Missing {
            key: key.to_string(),
        })
    }
}

/// Integer, `10^k`, or a float literal with an integral value.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Some((base, exp)) = s.split_once('^') {
        let base: u64 = base
            .trim()
            .parse()
            .map_err(|e| format!("bad base in `{s}`: {e}"))?;
        let exp: u32 = exp
            .trim()
            .parse()
            .map_err(|e| format!("bad exponent in `{s}`: {e}"))?;
        return base
            .checked_pow(exp)
            .ok_or_else(|| format!("`{s}` overflows"));
    }
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(format!("`{s}` is not a non-negative integer"))
    }
}

/// Float literal or `b^k`.
fn parse_real(s: &str) -> Result<f64, String> {
    if let Some((base, exp)) = s.split_once('^') {
        let base: f64 = base
            .trim()
            .parse()
            .map_err(|e| format!("bad base in `{s}`: {e}"))?;
        let exp: i32 = exp
            .trim()
            .parse()
            .map_err(|e| format!("bad exponent in `{s}`: {e}"))?;
        return Ok(base.powi(exp));
    }
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    let values = s
        .split(',')
        .map(|t| parse_real(t.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("empty list".into());
    }
    Ok(values)
}

/// Absolute item count or `p%C`, floored and at least 1.
fn parse_items(s: &str, catalogue: u64) -> Result<u64, String> {
    match s.strip_suffix("%C") {
        Some(pct) => {
            let pct = parse_real(pct.trim())?;
            if pct < 0.0 {
                return Err(format!("negative percentage `{s}`"));
            }
            Ok(((pct / 100.0 * catalogue as f64).floor() as u64).max(1))
        }
        None => parse_count(s),
    }
}

fn parse_with<T: FromStr<Err = String>>(s: &str) -> Result<T, String> {
    s.parse()
}

fn out_of_range(entries: &Entries, err: ConfigError) -> ParseError {
    match err {
        ConfigError::Invalid { name, reason } => ParseError::OutOfRange {
            line: entries.line(name),
            key: name.to_string(),
            reason,
        },
        other => ParseError::OutOfRange {
            line: 0,
            key: "U".into(),
            reason: other.to_string(),
        },
    }
}

/// Parses and validates a configuration. `expected` is the scenario the
/// caller wants to run; when given, a conflicting `scenario` key is an error.
/// Without either, a document with an `N` key is a churn simulation and
/// anything else a Che sweep.
pub fn parse_config(
    text: &str,
    expected: Option<Scenario>,
) -> Result<ExperimentConfig, ParseError> {
    let entries = Entries::parse(text)?;
    let declared: Option<Scenario> = entries.get("scenario", parse_with)?;
    let scenario = match (declared, expected) {
        (Some(d), Some(e)) if d != e => {
            return Err(ParseError::OutOfRange {
                line: entries.line("scenario"),
                key: "scenario".into(),
                reason: format!("is `{d}` but `{e}` was requested"),
            })
        }
        (Some(d), _) => d,
        (None, Some(e)) => e,
        (None, None) if entries.has("N") => Scenario::Churn,
        (None, None) => Scenario::CheSweep,
    };
    let seed: Option<u64> = entries.get("seed", parse_count)?;

    let body = if scenario.is_simulation() {
        entries.require(SIM_REQUIRED)?;
        let catalogue = entries.must("C", parse_count)?;
        let defaults = Stabilization::default();
        let sim = SimConfig {
            ues: entries.must("N", parse_count)? as usize,
            aps: entries.must("M", parse_count)? as usize,
            catalogue_size: catalogue as usize,
            cache_size: entries.must("c", |s| parse_items(s, catalogue))? as usize,
            slope: entries.must("s", parse_real)?,
            request_rate: entries.must("lambda_c", parse_real)?,
            churn_rate: entries.must("lambda_v", parse_real)?,
            profile_count: entries.must("U", parse_count)? as usize,
            profile_size: entries.must("u", |s| parse_items(s, catalogue))? as usize,
            w: entries.must("w", parse_real)?,
            policy: entries
                .get("policy", parse_with)?
                .unwrap_or(SelectionPolicy::Iccon),
            cache_policy: entries
                .get("cache_policy", parse_with)?
                .unwrap_or(CachePolicy::Lfu),
            topology: entries
                .get("topology", parse_with)?
                .unwrap_or(Topology::PerAp),
            seed: seed.unwrap_or(1),
            stabilization: Stabilization {
                window_mult: entries
                    .get("stab_window_mult", parse_count)?
                    .map_or(defaults.window_mult, |v| v as usize),
                eps: entries.get("stab_eps", parse_real)?.unwrap_or(defaults.eps),
                cap_mult: entries
                    .get("stab_cap_mult", parse_count)?
                    .map_or(defaults.cap_mult, |v| v as usize),
            },
        };
        sim.validate().map_err(|e| out_of_range(&entries, e))?;
        let slots = entries.get("slots", parse_count)?.unwrap_or(DEFAULT_SLOTS);
        let requests_per_slot = entries
            .get("requests_per_slot", parse_count)?
            .unwrap_or(DEFAULT_REQUESTS_PER_SLOT);
        for (key, v) in [("slots", slots), ("requests_per_slot", requests_per_slot)] {
            if v == 0 {
                return Err(ParseError::OutOfRange {
                    line: entries.line(key),
                    key: key.into(),
                    reason: "must be at least 1".into(),
                });
            }
        }
        ScenarioConfig::Simulation {
            sim,
            slots,
            requests_per_slot,
        }
    } else {
        entries.require(SWEEP_REQUIRED)?;
        let spec = SweepSpec {
            catalogue_size: entries.must("C", parse_count)? as usize,
            slope: entries.must("s", parse_real)?,
            request_rate: entries.must("lambda_c", parse_real)?,
            alphas: entries
                .get("alpha_list", parse_list)?
                .unwrap_or_else(SweepSpec::default_alphas),
            c_ratios: entries
                .get("c_ratio_list", parse_list)?
                .unwrap_or_else(SweepSpec::default_c_ratios),
        };
        validate_sweep(&entries, &spec)?;
        ScenarioConfig::CheSweep(spec)
    };

    Ok(ExperimentConfig {
        scenario,
        seed,
        body,
    })
}

fn validate_sweep(entries: &Entries, spec: &SweepSpec) -> Result<(), ParseError> {
    let bad = |key: &str, reason: String| ParseError::OutOfRange {
        line: entries.line(key),
        key: key.to_string(),
        reason,
    };
    if spec.catalogue_size < 2 {
        return Err(bad("C", "catalogue needs at least two items".into()));
    }
    if spec.slope.is_nan() || spec.slope < 0.0 {
        return Err(bad("s", format!("must be >= 0, got {}", spec.slope)));
    }
    if spec.request_rate.is_nan() || spec.request_rate <= 0.0 {
        return Err(bad(
            "lambda_c",
            format!("must be > 0, got {}", spec.request_rate),
        ));
    }
    if let Some(a) = spec.alphas.iter().find(|a| a.is_nan() || **a < 1.0) {
        return Err(bad(
            "alpha_list",
            format!("aggregation levels must be >= 1, got {a}"),
        ));
    }
    if let Some(r) = spec.c_ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(bad(
            "c_ratio_list",
            format!("cache ratios must lie in (0, 1), got {r}"),
        ));
    }
    Ok(())
}
