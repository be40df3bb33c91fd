use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use iccon::cli::{parse_config, run_experiment, PolicyChoice, RunManifest, Scenario};
use iccon::RunError;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "iccon",
    version,
    about = "Information-centric connectivity experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Warm-up followed by FIFO churn under ICCON and/or random AP selection.
    Churn {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_policy)]
        policy: Option<PolicyChoice>,
    },
    /// Fixed population with per-request AP selection, reported per slot.
    PerRequest {
        #[command(flatten)]
        common: Common,
    },
    /// Che-approximation sweep over aggregation levels and cache ratios.
    CheSweep {
        #[command(flatten)]
        common: Common,
    },
    /// Parse and validate a configuration without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated seeds; defaults to the config's `seed`, else 1..=10.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, default_value = "./out")]
    out: PathBuf,
}

fn parse_policy(s: &str) -> Result<PolicyChoice, String> {
    s.parse()
}

fn read_config(path: &PathBuf) -> Result<String, RunError> {
    std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })
}

fn execute(command: Command) -> Result<(), RunError> {
    let (scenario, common, policy) = match command {
        Command::Validate { config } => {
            let parsed = parse_config(&read_config(&config)?, None)?;
            println!(
                "{}: valid {} configuration",
                config.display(),
                parsed.scenario
            );
            return Ok(());
        }
        Command::Churn { common, policy } => (Scenario::Churn, common, policy),
        Command::PerRequest { common } => (Scenario::PerRequest, common, None),
        Command::CheSweep { common } => (Scenario::CheSweep, common, None),
    };
    let text = read_config(&common.config)?;
    let manifest = RunManifest::build(text, scenario, common.seeds, policy, common.out)?;
    let report = run_experiment(&manifest)?;
    for (policy, seed) in &report.capped_warmups {
        eprintln!("warning: warm-up for {policy} seed {seed} stopped at the request cap before all caches settled");
    }
    for file in &report.files {
        println!("{}", file.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match &err {
                RunError::Io { .. } | RunError::Csv { .. } => EXIT_RUNTIME,
                _ if err.is_config() => EXIT_CONFIG,
                _ => EXIT_RUNTIME,
            };
            ExitCode::from(code)
        }
    }
}
