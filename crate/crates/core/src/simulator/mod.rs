//! Discrete-event reproduction of the offloading experiments: a warm-up
//! until caches settle, then either FIFO churn with ICCON or random AP
//! selection, or per-request routing over a fixed population.
//!
//! Wall-clock time only orders events. Between churn events the caches are
//! driven to stability, so the churn rate does not change any result.

mod churn;
mod config;
mod per_request;
mod world;

pub use churn::{churn_step, run_churn_scenario, run_warmup, ChurnRow, ChurnRun};
pub use config::{SelectionPolicy, SimConfig, Stabilization, Topology};
pub use per_request::{
    run_per_request_scenario, run_per_request_with, PerRequestRun, RequestEvent, SlotRow,
};
pub use world::{ApState, PhaseStats, UeState, World};

/// `hits / requests`, or `None` when nothing was requested.
pub fn measure_chr(hits: u64, requests: u64) -> Option<f64> {
    (requests > 0).then(|| hits as f64 / requests as f64)
}
