use super::config::{SelectionPolicy, SimConfig};
use super::measure_chr;
use super::world::{PhaseStats, World};
use crate::error::ConfigError;

/// Metrics for one departure/arrival event.
#[derive(Debug, Clone, PartialEq)]
pub struct ChurnRow {
    /// 1-based count of departure/arrival events so far.
    pub event_index: u64,
    /// Requests issued since the previous event.
    pub requests: u64,
    pub hits: u64,
    pub cumulative_requests: u64,
    pub cumulative_hits: u64,
    pub users_per_ap: Vec<u64>,
    pub capped: bool,
}

impl ChurnRow {
    pub fn chr_window(&self) -> Option<f64> {
        measure_chr(self.hits, self.requests)
    }

    pub fn chr_cumulative(&self) -> Option<f64> {
        measure_chr(self.cumulative_hits, self.cumulative_requests)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChurnRun {
    pub policy: SelectionPolicy,
    pub seed: u64,
    pub warmup: PhaseStats,
    pub rows: Vec<ChurnRow>,
    /// Simulated seconds at the end of the run.
    pub clock: f64,
}

impl ChurnRun {
    pub fn final_chr(&self) -> Option<f64> {
        self.rows.last().and_then(ChurnRow::chr_window)
    }
}

/// Drives the initial caches to stability.
pub fn run_warmup(world: &mut World) -> PhaseStats {
    world.stabilize()
}

/// One FIFO departure, one arrival placed by `policy`, then stabilization.
pub fn churn_step(
    world: &mut World,
    policy: SelectionPolicy,
    event_index: u64,
    previous: Option<&ChurnRow>,
) -> ChurnRow {
    world.depart().expect("churn needs a UE in the system");
    world.arrive(policy);
    let phase = world.stabilize();
    let (cum_req, cum_hits) =
        previous.map_or((0, 0), |p| (p.cumulative_requests, p.cumulative_hits));
    ChurnRow {
        event_index,
        requests: phase.requests,
        hits: phase.hits,
        cumulative_requests: cum_req + phase.requests,
        cumulative_hits: cum_hits + phase.hits,
        users_per_ap: world.users_per_ap(),
        capped: phase.capped,
    }
}

/// Warm-up followed by `floor(2N/3)` churn events under `config.policy`.
pub fn run_churn_scenario(config: &SimConfig) -> Result<ChurnRun, ConfigError> {
    let mut world = World::new(config)?;
    let warmup = run_warmup(&mut world);
    let mut rows: Vec<ChurnRow> = Vec::with_capacity(config.churn_steps());
    for event in 1..=config.churn_steps() as u64 {
        let row = churn_step(&mut world, config.policy, event, rows.last());
        rows.push(row);
    }
    Ok(ChurnRun {
        policy: config.policy,
        seed: config.seed,
        warmup,
        rows,
        clock: world.clock(),
    })
}
