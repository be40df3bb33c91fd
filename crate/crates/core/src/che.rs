//! Che's approximation for an LRU cache shared by `alpha` UEs.
//!
//! Item `i` is requested at rate `q_i = alpha * lambda_c * p_i`. The
//! characteristic time `tau` is the unique root of
//!
//! ```text
//! g(tau) = sum_i (1 - exp(-q_i * tau)) - c
//! ```
//!
//! which is strictly increasing from `-c` towards `C - c`. From it follow
//! `r = tau * lambda_c` (how long an item outlives one UE inter-request gap)
//! and the hit ratio `sum_i p_i (1 - exp(-q_i * tau))`.

use rayon::prelude::*;

use crate::catalogue::ZipfCatalogue;
use crate::error::ConfigError;

/// Bisection stops early once `|g| <= RESIDUAL_TOL * c` and the bracket has
/// collapsed to adjacent floats.
pub const RESIDUAL_TOL: f64 = 1e-9;

const MAX_DOUBLINGS: usize = 2048;
const MAX_BISECTIONS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheInput {
    pub catalogue_size: usize,
    pub slope: f64,
    /// Cache size in items.
    pub cache_size: usize,
    /// Number of UEs sharing the cache.
    pub alpha: f64,
    /// Per-UE request rate, requests per second.
    pub request_rate: f64,
}

impl CheInput {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.cache_size == 0 || self.cache_size >= self.catalogue_size {
            return Err(ConfigError::invalid(
                "c",
                format!(
                    "cache size must satisfy 0 < c < C = {}, got {}",
                    self.catalogue_size, self.cache_size
                ),
            ));
        }
        if !self.alpha.is_finite() || self.alpha < 1.0 {
            return Err(ConfigError::invalid(
                "alpha",
                format!("must be >= 1, got {}", self.alpha),
            ));
        }
        if !self.request_rate.is_finite() || self.request_rate <= 0.0 {
            return Err(ConfigError::invalid(
                "lambda_c",
                format!("must be > 0, got {}", self.request_rate),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheSolution {
    /// Characteristic time in seconds.
    pub tau: f64,
    pub r: f64,
    pub chr: f64,
}

/// Result of bracketing a non-decreasing function's root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub lo: f64,
    pub hi: f64,
    pub g_lo: f64,
    pub g_hi: f64,
    pub iterations: usize,
}

/// Bisection for a non-decreasing `g` with `g(lo) <= 0 < g(hi)`. Runs until
/// the bracket cannot be split further or `|g(mid)| <= tol` is hit at full
/// resolution, whichever comes first; `g(lo) <= 0 <= g(hi)` holds throughout.
pub fn bisect_increasing<G: FnMut(f64) -> f64>(
    mut g: G,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Option<Root> {
    let mut g_lo = g(lo);
    let mut g_hi = g(hi);
    if !(g_lo <= 0.0 && g_hi >= 0.0) {
        return None;
    }
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let g_mid = g(mid);
        if g_mid <= 0.0 {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
        debug_assert!(g_lo <= 0.0 && g_hi >= 0.0);
    }
    let (x, residual) = if -g_lo <= g_hi {
        (lo, g_lo)
    } else {
        (hi, g_hi)
    };
    if residual.abs() > tol {
        // bracket exhausted without meeting the tolerance
        return None;
    }
    Some(Root {
        x,
        residual,
        lo,
        hi,
        g_lo,
        g_hi,
        iterations,
    })
}

/// Precomputed popularity for repeated solves over one catalogue.
#[derive(Debug, Clone)]
pub struct CheModel {
    catalogue: ZipfCatalogue,
}

impl CheModel {
    pub fn new(catalogue_size: usize, slope: f64) -> Result<Self, ConfigError> {
        Ok(CheModel {
            catalogue: ZipfCatalogue::new(catalogue_size, slope)?,
        })
    }

    pub fn from_catalogue(catalogue: ZipfCatalogue) -> Self {
        CheModel { catalogue }
    }

    pub fn catalogue(&self) -> &ZipfCatalogue {
        &self.catalogue
    }

    /// Expected number of distinct items requested within `tau`, minus `c`.
    pub fn occupancy_gap(&self, cache_size: usize, total_rate: f64, tau: f64) -> f64 {
        let x = total_rate * tau;
        let occupied: f64 = self
            .catalogue
            .probabilities()
            .iter()
            .rev()
            .map(|p| -(-x * p).exp_m1())
            .sum();
        occupied - cache_size as f64
    }

    fn check(&self, input: &CheInput) -> Result<(), ConfigError> {
        input.validate()?;
        if input.catalogue_size != self.catalogue.size() {
            return Err(ConfigError::invalid(
                "C",
                "input does not match the model's catalogue",
            ));
        }
        Ok(())
    }

    pub fn solve_root(&self, input: &CheInput) -> Result<Root, ConfigError> {
        self.check(input)?;
        let rate = input.alpha * input.request_rate;
        let c = input.cache_size;
        let g = |tau: f64| self.occupancy_gap(c, rate, tau);

        let mut hi = 1.0 / rate;
        let mut doublings = 0;
        while g(hi) <= 0.0 {
            hi *= 2.0;
            doublings += 1;
            if doublings > MAX_DOUBLINGS || !hi.is_finite() {
                return Err(ConfigError::invalid("c", "no finite characteristic time"));
            }
        }
        bisect_increasing(g, 0.0, hi, RESIDUAL_TOL * c as f64)
            .ok_or_else(|| ConfigError::invalid("c", "characteristic time did not converge"))
    }

    pub fn characteristic_time(&self, input: &CheInput) -> Result<f64, ConfigError> {
        Ok(self.solve_root(input)?.x)
    }

    pub fn predicted_chr(&self, input: &CheInput, tau: f64) -> f64 {
        let x = input.alpha * input.request_rate * tau;
        self.catalogue
            .probabilities()
            .iter()
            .rev()
            .map(|p| p * -(-x * p).exp_m1())
            .sum()
    }

    pub fn solve(&self, input: &CheInput) -> Result<CheSolution, ConfigError> {
        let tau = self.characteristic_time(input)?;
        Ok(CheSolution {
            tau,
            r: r_value(tau, input.request_rate),
            chr: self.predicted_chr(input, tau),
        })
    }
}

pub fn characteristic_time(input: &CheInput) -> Result<f64, ConfigError> {
    input.validate()?;
    CheModel::new(input.catalogue_size, input.slope)?.characteristic_time(input)
}

pub fn predicted_chr(input: &CheInput, tau: f64) -> Result<f64, ConfigError> {
    Ok(CheModel::new(input.catalogue_size, input.slope)?.predicted_chr(input, tau))
}

/// `tau * lambda_c`; above 1 a cached item tends to outlive a UE's gap
/// between requests.
pub fn r_value(tau: f64, request_rate: f64) -> f64 {
    tau * request_rate
}

/// Parameters of an `alpha` x cache-size grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub catalogue_size: usize,
    pub slope: f64,
    pub request_rate: f64,
    pub alphas: Vec<f64>,
    /// Cache sizes as fractions of the catalogue.
    pub c_ratios: Vec<f64>,
}

impl SweepSpec {
    pub fn default_alphas() -> Vec<f64> {
        (0..=5).map(|e| 10f64.powi(e)).collect()
    }

    pub fn default_c_ratios() -> Vec<f64> {
        (1..=4).rev().map(|e| 10f64.powi(-e)).collect()
    }

    /// Items for a ratio: floored, at least one.
    pub fn cache_items(&self, c_ratio: f64) -> usize {
        ((c_ratio * self.catalogue_size as f64).floor() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub c_ratio: f64,
    pub c_items: usize,
    /// A cell that cannot be solved carries the reason instead.
    pub solution: Result<CheSolution, String>,
}

/// One row per `(c_ratio, alpha)` pair, cache sizes outermost, in input order.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, ConfigError> {
    let model = CheModel::new(spec.catalogue_size, spec.slope)?;
    Ok(sweep_with(&model, spec))
}

pub fn sweep_with(model: &CheModel, spec: &SweepSpec) -> Vec<SweepRow> {
    let cells: Vec<(f64, f64)> = spec
        .c_ratios
        .iter()
        .flat_map(|&cr| spec.alphas.iter().map(move |&a| (cr, a)))
        .collect();
    cells
        .into_par_iter()
        .map(|(c_ratio, alpha)| {
            let c_items = spec.cache_items(c_ratio);
            let input = CheInput {
                catalogue_size: spec.catalogue_size,
                slope: spec.slope,
                cache_size: c_items,
                alpha,
                request_rate: spec.request_rate,
            };
            SweepRow {
                alpha,
                c_ratio,
                c_items,
                solution: model.solve(&input).map_err(|e| e.to_string()),
            }
        })
        .collect()
}
