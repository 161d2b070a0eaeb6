use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use uavcharge_core::matching::Stage2Mode;
use uavcharge_core::powerctl::PowerPolicy;
use uavcharge_core::sim::{Preset, Strategy};

use crate::artifact::Format;

/// Parses a kebab-case enum through its serde names so flags and config
/// files accept the same spellings.
fn kebab<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unrecognized value `{s}`"))
}

#[derive(Debug, Parser)]
#[command(
    name = "uavcharge",
    version,
    about = "Drone charging scheduler, power controller and simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// Scenario file (TOML); omitted keys take the reference defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// reference | stage1-fairness | stage2 | coverage-sweep
    #[arg(long, value_parser = kebab::<Preset>)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Horizon in unit times.
    #[arg(long)]
    pub horizon: Option<u32>,
    /// Stage-2 formulation: allocate | literal
    #[arg(long, value_parser = kebab::<Stage2Mode>)]
    pub mode: Option<Stage2Mode>,
    /// Matching strategy for both stages: proposed | random | greedy-best | greedy-worst
    #[arg(long, value_parser = kebab::<Strategy>)]
    pub baseline: Option<Strategy>,
    /// Transmit-power policy: dpp | max-pa | min-pa
    #[arg(long, value_parser = kebab::<PowerPolicy>)]
    pub power: Option<PowerPolicy>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output directory; match commands print to stdout without it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the two-stage simulation and write snapshots, residual profiles,
    /// queue traces and a coverage summary.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solve one tower-phase matching on the initial rosters.
    MatchStage1 {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Instance record file replacing the scenario rosters.
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Solve one MBS-phase matching on the initial rosters.
    MatchStage2 {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Run one isolated queue under a power policy for horizon x slots-per-unit slots.
    PowerControl {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Coverage time against the number of MBS drones.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Ascending MBS counts, comma separated; defaults to 1..=roster size.
        #[arg(long, value_delimiter = ',')]
        counts: Vec<u32>,
    },
    /// Compare the matching solvers with exhaustive search.
    OracleCheck {
        #[arg(long, default_value_t = 200)]
        instances: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        max_towers: u32,
        #[arg(long, default_value_t = 3)]
        max_plates: u32,
        #[arg(long, default_value_t = 5)]
        max_chargers: u32,
        #[arg(long, default_value_t = 4)]
        max_mbs: u32,
        #[arg(long, default_value_t = 2)]
        max_mbs_plates: u32,
    },
}
