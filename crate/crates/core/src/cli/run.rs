use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{parse_config, ExperimentConfig, Scenario, ScenarioConfig};
use super::table::{Cell, Table};
use crate::che::{sweep, SweepRow, SweepSpec};
use crate::error::{ConfigError, RunError};
use crate::simulator::{
    run_churn_scenario, run_per_request_scenario, ChurnRun, PerRequestRun, SelectionPolicy,
    SimConfig,
};

pub const DEFAULT_SEEDS: std::ops::RangeInclusive<u64> = 1..=10;

/// Everything needed to reproduce one invocation.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config_text: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    /// Only meaningful for simulations; the che sweep ignores it.
    pub policies: Vec<SelectionPolicy>,
    pub out_dir: PathBuf,
}

/// Which policies a churn run covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyChoice {
    One(SelectionPolicy),
    Both,
}

impl std::str::FromStr for PolicyChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "both" => Ok(PolicyChoice::Both),
            other => other.parse().map(PolicyChoice::One),
        }
    }
}

impl RunManifest {
    /// Seeds resolve as: explicit list, then the config's `seed`, then 1..=10.
    pub fn build(
        config_text: String,
        scenario: Scenario,
        seeds: Option<Vec<u64>>,
        policy: Option<PolicyChoice>,
        out_dir: PathBuf,
    ) -> Result<Self, RunError> {
        let config = parse_config(&config_text, Some(scenario))?;
        let seeds = match seeds {
            Some(list) => list,
            None => config
                .seed
                .map_or_else(|| DEFAULT_SEEDS.collect(), |s| vec![s]),
        };
        if seeds.is_empty() {
            return Err(ConfigError::invalid("seeds", "need at least one seed").into());
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(ConfigError::invalid("seeds", "seeds must be distinct").into());
        }
        let default_policy = config.sim().map_or(SelectionPolicy::Iccon, |s| s.policy);
        let policies = match policy.unwrap_or(PolicyChoice::One(default_policy)) {
            PolicyChoice::One(p) => vec![p],
            PolicyChoice::Both => vec![SelectionPolicy::Iccon, SelectionPolicy::Random],
        };
        Ok(RunManifest {
            config_text,
            config,
            seeds,
            policies,
            out_dir,
        })
    }

    fn echo(&self) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let policies: Vec<String> = self.policies.iter().map(ToString::to_string).collect();
        format!(
            "artifact = {} {}\nscenario = {}\nseeds = {}\npolicies = {}\n\n{}",
            env!("CARGO_PKG_NAME"),
            env!("CARGO_PKG_VERSION"),
            self.config.scenario,
            seeds.join(","),
            policies.join(","),
            self.config_text,
        )
    }
}

/// What a run produced, for the caller to report on.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    /// `(policy, seed)` pairs whose warm-up ended on the request cap.
    pub capped_warmups: Vec<(SelectionPolicy, u64)>,
}

pub fn churn_table(run: &ChurnRun, aps: usize) -> Table {
    let mut header: Vec<String> = [
        "event_index",
        "policy",
        "seed",
        "requests",
        "hits",
        "chr_window",
        "chr_cumulative",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=aps).map(|i| format!("n_{i}")));
    let mut table = Table::new(header);
    for row in &run.rows {
        let mut cells = vec![
            row.event_index.into(),
            run.policy.to_string().into(),
            run.seed.into(),
            row.requests.into(),
            row.hits.into(),
            row.chr_window().into(),
            row.chr_cumulative().into(),
        ];
        cells.extend(row.users_per_ap.iter().map(|&n| Cell::from(n)));
        table.push(cells);
    }
    table
}

pub fn per_request_table(run: &PerRequestRun) -> Table {
    let mut table = Table::new(["slot", "seed", "requests", "hits", "chr"]);
    for row in &run.rows {
        table.push(vec![
            row.slot.into(),
            run.seed.into(),
            row.requests.into(),
            row.hits.into(),
            row.chr().into(),
        ]);
    }
    table
}

/// Cells the solver rejected keep their coordinates and read `invalid` in
/// place of the numbers.
pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut table = Table::new(["alpha", "c_ratio", "c_items", "tau_seconds", "r", "chr"]);
    for row in rows {
        let mut cells = vec![row.alpha.into(), row.c_ratio.into(), row.c_items.into()];
        match &row.solution {
            Ok(sol) => cells.extend([sol.tau.into(), sol.r.into(), sol.chr.into()]),
            Err(_) => cells.extend(std::iter::repeat_with(|| Cell::from("invalid")).take(3)),
        }
        table.push(cells);
    }
    table
}

/// Sample mean and standard deviation (n - 1 denominator; 0 for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Mean and spread across seeds for each row index. `series[k]` is one seed's
/// per-row values; a row missing from a seed (or `None`) is left out.
fn aggregate_rows(series: &[Vec<Option<f64>>]) -> Vec<(usize, usize, f64, f64)> {
    let rows = series.iter().map(Vec::len).max().unwrap_or(0);
    (0..rows)
        .filter_map(|i| {
            let values: Vec<f64> = series
                .iter()
                .filter_map(|s| s.get(i).copied().flatten())
                .collect();
            (!values.is_empty()).then(|| {
                let (mean, std) = mean_std(&values);
                (i, values.len(), mean, std)
            })
        })
        .collect()
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    fs::write(path, contents).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn save(report: &mut RunReport, table: &Table, path: PathBuf) -> Result<(), RunError> {
    table.save(&path)?;
    report.files.push(path);
    Ok(())
}

/// Runs the experiment described by `manifest` and writes its CSVs, the
/// per-seed summary and a manifest echo into `manifest.out_dir`. Seeds run in
/// parallel; results are merged in the order given.
pub fn run_experiment(manifest: &RunManifest) -> Result<RunReport, RunError> {
    let out = &manifest.out_dir;
    fs::create_dir_all(out).map_err(|source| RunError::Io {
        path: out.clone(),
        source,
    })?;
    let mut report = RunReport::default();

    match &manifest.config.body {
        ScenarioConfig::CheSweep(spec) => run_sweep(spec, out, &mut report)?,
        ScenarioConfig::Simulation {
            sim,
            slots,
            requests_per_slot,
        } => match manifest.config.scenario {
            Scenario::Churn => run_churn(manifest, sim, out, &mut report)?,
            _ => run_per_request(manifest, sim, *slots, *requests_per_slot, out, &mut report)?,
        },
    }

    let path = out.join("manifest.txt");
    write_file(&path, &manifest.echo())?;
    report.files.push(path);
    Ok(report)
}

fn run_sweep(spec: &SweepSpec, out: &Path, report: &mut RunReport) -> Result<(), RunError> {
    let rows = sweep(spec)?;
    save(report, &sweep_table(&rows), out.join("che_sweep.csv"))
}

fn jobs(manifest: &RunManifest, sim: &SimConfig) -> Vec<SimConfig> {
    manifest
        .policies
        .iter()
        .flat_map(|&policy| {
            manifest.seeds.iter().map(move |&seed| SimConfig {
                policy,
                seed,
                ..sim.clone()
            })
        })
        .collect()
}

fn run_churn(
    manifest: &RunManifest,
    sim: &SimConfig,
    out: &Path,
    report: &mut RunReport,
) -> Result<(), RunError> {
    let runs: Vec<ChurnRun> = jobs(manifest, sim)
        .par_iter()
        .map(run_churn_scenario)
        .collect::<Result<_, _>>()?;

    for run in &runs {
        let path = out.join(format!("churn_{}_seed{}.csv", run.policy, run.seed));
        save(report, &churn_table(run, sim.aps), path)?;
    }

    let mut aggregate = Table::new([
        "event_index",
        "policy",
        "seeds",
        "chr_window_mean",
        "chr_window_std",
        "chr_cumulative_mean",
        "chr_cumulative_std",
    ]);
    for &policy in &manifest.policies {
        let mine: Vec<&ChurnRun> = runs.iter().filter(|r| r.policy == policy).collect();
        let window: Vec<Vec<Option<f64>>> = mine
            .iter()
            .map(|r| r.rows.iter().map(|row| row.chr_window()).collect())
            .collect();
        let cumulative: Vec<Vec<Option<f64>>> = mine
            .iter()
            .map(|r| r.rows.iter().map(|row| row.chr_cumulative()).collect())
            .collect();
        let cum = aggregate_rows(&cumulative);
        for (i, n, mean, std) in aggregate_rows(&window) {
            let (cm, cs) = cum
                .iter()
                .find(|c| c.0 == i)
                .map_or((None, None), |c| (Some(c.2), Some(c.3)));
            aggregate.push(vec![
                (i + 1).into(),
                policy.to_string().into(),
                n.into(),
                mean.into(),
                std.into(),
                cm.into(),
                cs.into(),
            ]);
        }
    }
    save(report, &aggregate, out.join("churn_aggregate.csv"))?;

    let mut summary = Table::new([
        "policy",
        "seed",
        "warmup_requests",
        "warmup_hits",
        "warmup_capped",
        "capped_events",
        "final_chr_window",
        "final_chr_cumulative",
    ]);
    for run in &runs {
        if run.warmup.capped {
            report.capped_warmups.push((run.policy, run.seed));
        }
        summary.push(vec![
            run.policy.to_string().into(),
            run.seed.into(),
            run.warmup.requests.into(),
            run.warmup.hits.into(),
            u64::from(run.warmup.capped).into(),
            run.rows.iter().filter(|r| r.capped).count().into(),
            run.final_chr().into(),
            run.rows.last().and_then(|r| r.chr_cumulative()).into(),
        ]);
    }
    save(report, &summary, out.join("churn_summary.csv"))
}

fn run_per_request(
    manifest: &RunManifest,
    sim: &SimConfig,
    slots: u64,
    requests_per_slot: u64,
    out: &Path,
    report: &mut RunReport,
) -> Result<(), RunError> {
    let runs: Vec<PerRequestRun> = jobs(manifest, sim)
        .par_iter()
        .map(|cfg| run_per_request_scenario(cfg, slots, requests_per_slot))
        .collect::<Result<_, _>>()?;

    for run in &runs {
        let path = out.join(format!("per_request_{}_seed{}.csv", run.policy, run.seed));
        save(report, &per_request_table(run), path)?;
    }

    let mut aggregate = Table::new(["slot", "policy", "seeds", "chr_mean", "chr_std"]);
    for &policy in &manifest.policies {
        let series: Vec<Vec<Option<f64>>> = runs
            .iter()
            .filter(|r| r.policy == policy)
            .map(|r| r.rows.iter().map(|row| row.chr()).collect())
            .collect();
        for (i, n, mean, std) in aggregate_rows(&series) {
            aggregate.push(vec![
                (i + 1).into(),
                policy.to_string().into(),
                n.into(),
                mean.into(),
                std.into(),
            ]);
        }
    }
    save(report, &aggregate, out.join("per_request_aggregate.csv"))
}
