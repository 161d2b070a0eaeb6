//! Scenario files.
//!
//! A scenario file is TOML. Every key is optional; omitted keys take the
//! reference defaults (25 MBS drones, 50 charging drones, one tower with 4
//! panels, 60 minutes). Rosters are generated from the `[system]` and
//! `[uav]` sections unless they are given explicitly, either inline as
//! `[[tower]]` / `[[charger]]` / `[[mbs]]` tables or through an instance
//! record file (`instance = "path"`).
//!
//! ```toml
//! preset = "stage2"          # reference | stage1-fairness | stage2 | coverage-sweep
//! seed = 7
//! horizon_minutes = 60       # or horizon_units = 30
//!
//! [uav]
//! flight_speed_max = 20.0            # m/s
//! battery_capacity_mah = 5870.0
//! charger_voltage = 17.4             # V
//! battery_charging_power_max = 160.0 # W, caps each stage-2 transfer
//! charger_rated_power = 100.0        # W, tower plate output
//! charging_efficiency = 0.81
//! move_power = 204.0                 # W while flying
//! hover_power = 204.0                # W drawn by MBS drones
//!
//! [system]
//! map_width = 1299.0
//! map_height = 750.0
//! altitude = 100.0
//! mbs_drones = 25
//! charging_drones = 50
//! charging_towers = 1
//! tower_panels = 4
//! mbs_plates = 1
//! initial_residual_min = 0.3
//! initial_residual_max = 1.0
//!
//! [timing]
//! tower_phase = 60.0
//! mbs_phase = 60.0
//! slots_per_unit = 120
//!
//! [control]
//! policy = "dpp"             # dpp | max-pa | min-pa
//! typical_backlog = 1e6      # calibrates v when v is omitted
//! power_min = 0.0
//! power_max = 160.0
//! power_levels = 17
//! bandwidth = 1000.0
//! gain = 1e-3
//! noise = 1e-2
//! arrival = "constant"       # constant | uniform
//! arrival_mean = 2000.0
//!
//! [matching]
//! mode = "allocate"          # allocate | literal
//! stage1 = "proposed"        # proposed | random | greedy-best | greedy-worst
//! stage2 = "proposed"
//! epsilon = 1.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use uavcharge_core::energy::{ChargerDrone, MbsDrone, TimingConfig, Tower};
use uavcharge_core::matching::{Stage2Mode, Stage2Params};
use uavcharge_core::powerctl::{uniform_action_set, ArrivalModel, Channel, DppConfig, PowerAction, PowerPolicy};
use uavcharge_core::sim::{battery_joules, minutes_to_units, GeneratorConfig, Preset, Scenario, Strategy};

use crate::instance::{self, Instance};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Instance { path: String, line: usize, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(#[from] uavcharge_core::Error),
    #[error("invalid scenario: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UavSection {
    pub flight_speed_max: Option<f64>,
    pub battery_capacity_mah: Option<f64>,
    pub charger_voltage: Option<f64>,
    /// Overrides the mAh × V conversion.
    pub battery_capacity_j: Option<f64>,
    pub battery_charging_power_max: Option<f64>,
    pub charger_rated_power: Option<f64>,
    pub charging_efficiency: Option<f64>,
    pub move_power: Option<f64>,
    pub hover_power: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub map_width: Option<f64>,
    pub map_height: Option<f64>,
    pub altitude: Option<f64>,
    pub mbs_drones: Option<u32>,
    pub charging_drones: Option<u32>,
    pub charging_towers: Option<u32>,
    pub tower_panels: Option<u32>,
    pub mbs_plates: Option<u32>,
    pub initial_residual_min: Option<f64>,
    pub initial_residual_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingSection {
    pub tower_phase: Option<f64>,
    pub mbs_phase: Option<f64>,
    pub slots_per_unit: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrivalKind {
    Constant,
    Uniform,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSection {
    pub policy: Option<PowerPolicy>,
    pub v: Option<f64>,
    pub typical_backlog: Option<f64>,
    pub power_min: Option<f64>,
    pub power_max: Option<f64>,
    pub power_levels: Option<usize>,
    /// Explicit action set; overrides the three keys above.
    pub actions: Option<Vec<f64>>,
    pub bandwidth: Option<f64>,
    pub gain: Option<f64>,
    pub noise: Option<f64>,
    pub arrival: Option<ArrivalKind>,
    pub arrival_mean: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchingSection {
    pub mode: Option<Stage2Mode>,
    pub stage1: Option<Strategy>,
    pub stage2: Option<Strategy>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFile {
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub horizon_minutes: Option<f64>,
    pub horizon_units: Option<u32>,
    pub instance: Option<PathBuf>,
    pub uav: UavSection,
    pub system: SystemSection,
    pub timing: TimingSection,
    pub control: ControlSection,
    pub matching: MatchingSection,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tower: Vec<Tower>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub charger: Vec<ChargerDrone>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mbs: Vec<MbsDrone>,
}

/// A validated scenario plus the unit conversions applied on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub scenario: Scenario,
    pub provenance: Vec<String>,
}

pub fn parse_scenario(text: &str, origin: &str) -> Result<ScenarioFile, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse {
        path: origin.to_string(),
        message: e.to_string().trim_end().to_string(),
    })
}

pub fn load_scenario(path: &Path) -> Result<Loaded, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file = parse_scenario(&text, &path.display().to_string())?;
    build(&file, path.parent())
}

/// Resolves defaults, conversions and rosters. Relative instance paths are
/// taken relative to `base`.
pub fn build(file: &ScenarioFile, base: Option<&Path>) -> Result<Loaded, ConfigError> {
    let preset = file.preset.unwrap_or(Preset::Reference);
    let mut g: GeneratorConfig = preset.generator();
    let mut provenance = Vec::new();
    let u = &file.uav;
    let s = &file.system;

    let mah = u.battery_capacity_mah.unwrap_or(5870.0);
    let volts = u.charger_voltage.unwrap_or(17.4);
    g.capacity = match u.battery_capacity_j {
        Some(j) => {
            provenance.push(format!("battery capacity {j} J (given)"));
            j
        }
        None => {
            let j = battery_joules(mah, volts);
            provenance.push(format!("battery capacity {mah} mAh x {volts} V = {j} J"));
            j
        }
    };
    set(&mut g.speed, u.flight_speed_max);
    set(&mut g.tower_power, u.charger_rated_power);
    if let Some(eta) = u.charging_efficiency {
        g.tower_efficiency = eta;
        g.charger_efficiency = eta;
        g.mbs_efficiency = eta;
    }
    set(&mut g.move_power, u.move_power);
    set(&mut g.hover_power, u.hover_power);
    set(&mut g.map_width, s.map_width);
    set(&mut g.map_height, s.map_height);
    set(&mut g.altitude, s.altitude);
    set(&mut g.mbs, s.mbs_drones);
    set(&mut g.chargers, s.charging_drones);
    set(&mut g.towers, s.charging_towers);
    set(&mut g.tower_plates, s.tower_panels);
    set(&mut g.mbs_plates, s.mbs_plates);
    set(&mut g.initial_min, s.initial_residual_min);
    set(&mut g.initial_max, s.initial_residual_max);

    let t = &file.timing;
    let timing = TimingConfig::from_phases(
        t.tower_phase.unwrap_or(60.0),
        t.mbs_phase.unwrap_or(60.0),
        t.slots_per_unit.unwrap_or(120),
    );
    timing.validate()?;

    let horizon = match (file.horizon_units, file.horizon_minutes) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::Inconsistent(
                "give either horizon_units or horizon_minutes, not both".into(),
            ))
        }
        (Some(units), None) => units,
        (None, minutes) => {
            let minutes = minutes.unwrap_or(preset.minutes());
            if !(minutes > 0.0 && minutes.is_finite()) {
                return Err(uavcharge_core::Error::Config(format!("horizon_minutes = {minutes} must be > 0")).into());
            }
            let units = minutes_to_units(minutes, &timing);
            provenance.push(format!(
                "horizon {minutes} min / {} s per unit time = {units} unit times",
                timing.unit_time
            ));
            units
        }
    };

    let c = &file.control;
    let action_set = match &c.actions {
        Some(list) => list.iter().map(|&a| PowerAction(a)).collect(),
        None => uniform_action_set(
            c.power_min.unwrap_or(0.0),
            c.power_max.unwrap_or(160.0),
            c.power_levels.unwrap_or(17),
        ),
    };
    let mean = c.arrival_mean.unwrap_or(2000.0);
    let mut dpp = DppConfig {
        v: 0.0,
        action_set,
        slot: timing.dpp_slot,
        channel: Channel {
            bandwidth: c.bandwidth.unwrap_or(1000.0),
            gain: c.gain.unwrap_or(1e-3),
            noise: c.noise.unwrap_or(1e-2),
        },
        arrival: match c.arrival.unwrap_or(ArrivalKind::Constant) {
            ArrivalKind::Constant => ArrivalModel::Constant { mean },
            ArrivalKind::Uniform => ArrivalModel::Uniform { mean },
        },
    };
    dpp.validate()?;
    dpp.v = match c.v {
        Some(v) => v,
        None => {
            let q = c.typical_backlog.unwrap_or(1e6);
            let v = dpp.calibrated_v(q);
            provenance.push(format!("v calibrated at a typical backlog of {q} bits = {v}"));
            v
        }
    };

    let seed = file.seed.unwrap_or(0);
    let explicit = !(file.tower.is_empty() && file.charger.is_empty() && file.mbs.is_empty());
    let (towers, chargers, mbs) = match (&file.instance, explicit) {
        (Some(_), true) => {
            return Err(ConfigError::Inconsistent(
                "give rosters either inline or through `instance`, not both".into(),
            ))
        }
        (Some(p), false) => {
            let path = match base {
                Some(b) if p.is_relative() => b.join(p),
                _ => p.clone(),
            };
            let inst = instance::read(&path)?;
            (inst.towers, inst.chargers, inst.mbs)
        }
        (None, true) => (file.tower.clone(), file.charger.clone(), file.mbs.clone()),
        (None, false) => g.rosters(seed)?,
    };

    let m = &file.matching;
    let scenario = Scenario {
        towers,
        chargers,
        mbs,
        timing,
        dpp,
        stage2: Stage2Params {
            epsilon: m.epsilon.unwrap_or(1.0),
            charge_power_cap: u.battery_charging_power_max.unwrap_or(160.0),
        },
        mode: m.mode.unwrap_or_default(),
        stage1_strategy: m.stage1.unwrap_or_default(),
        stage2_strategy: m.stage2.unwrap_or_default(),
        power: c.policy.unwrap_or_default(),
        horizon,
        seed,
    };
    scenario.validate()?;
    Ok(Loaded { scenario, provenance })
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Writes a scenario as a self-contained file with explicit rosters; loading
/// it gives back the same scenario. Fails only for integers TOML cannot hold
/// (seeds above `i64::MAX`).
pub fn emit_scenario(s: &Scenario) -> Result<String, ConfigError> {
    let (arrival, mean) = match s.dpp.arrival {
        ArrivalModel::Constant { mean } => (ArrivalKind::Constant, mean),
        ArrivalModel::Uniform { mean } => (ArrivalKind::Uniform, mean),
    };
    let file = ScenarioFile {
        preset: None,
        seed: Some(s.seed),
        horizon_minutes: None,
        horizon_units: Some(s.horizon),
        instance: None,
        uav: UavSection {
            battery_charging_power_max: Some(s.stage2.charge_power_cap),
            ..UavSection::default()
        },
        system: SystemSection::default(),
        timing: TimingSection {
            tower_phase: Some(s.timing.tower_phase),
            mbs_phase: Some(s.timing.mbs_phase),
            slots_per_unit: Some(s.timing.slots_per_unit),
        },
        control: ControlSection {
            policy: Some(s.power),
            v: Some(s.dpp.v),
            actions: Some(s.dpp.action_set.iter().map(|a| a.0).collect()),
            bandwidth: Some(s.dpp.channel.bandwidth),
            gain: Some(s.dpp.channel.gain),
            noise: Some(s.dpp.channel.noise),
            arrival: Some(arrival),
            arrival_mean: Some(mean),
            ..ControlSection::default()
        },
        matching: MatchingSection {
            mode: Some(s.mode),
            stage1: Some(s.stage1_strategy),
            stage2: Some(s.stage2_strategy),
            epsilon: Some(s.stage2.epsilon),
        },
        tower: s.towers.clone(),
        charger: s.chargers.clone(),
        mbs: s.mbs.clone(),
    };
    let body = toml::to_string(&file).map_err(|e| ConfigError::Inconsistent(e.to_string()))?;
    Ok(format!("# uavcharge scenario\n{body}"))
}

/// Rosters of a scenario as an instance.
pub fn instance_of(s: &Scenario) -> Instance {
    Instance {
        towers: s.towers.clone(),
        chargers: s.chargers.clone(),
        mbs: s.mbs.clone(),
    }
}
