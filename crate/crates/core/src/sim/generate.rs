use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{ChargerDrone, ChargerId, MbsDrone, MbsId, Position, TimingConfig, Tower, TowerId};
use crate::matching::{Stage2Mode, Stage2Params};
use crate::powerctl::{DppConfig, PowerPolicy};
use crate::rng::{stream, Stream};
use crate::{Error, Result};

use super::{Scenario, Strategy};

/// Battery energy in joules from a charge rating and a voltage, rounded to
/// 0.1 J.
pub fn battery_joules(milliamp_hours: f64, volts: f64) -> f64 {
    libm::round(milliamp_hours * 3.6 * volts * 10.0) / 10.0
}

/// Whole unit times covering `minutes` of simulated time.
pub fn minutes_to_units(minutes: f64, timing: &TimingConfig) -> u32 {
    libm::ceil(minutes * 60.0 / timing.unit_time - 1e-9) as u32
}

/// Random roster generator. Towers sit evenly spaced on the ground along the
/// horizontal midline of the map; drones are placed uniformly over the map
/// at the given altitude with residual energies uniform in
/// `[initial_min, initial_max]` of capacity. Drone `k` of a role always
/// draws from the same stream, so a larger roster extends a smaller one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub map_width: f64,
    pub map_height: f64,
    pub altitude: f64,
    pub towers: u32,
    pub tower_plates: u32,
    pub tower_power: f64,
    pub tower_efficiency: f64,
    pub chargers: u32,
    pub mbs: u32,
    pub mbs_plates: u32,
    pub capacity: f64,
    pub charger_efficiency: f64,
    pub mbs_efficiency: f64,
    pub speed: f64,
    pub move_power: f64,
    pub hover_power: f64,
    pub initial_min: f64,
    pub initial_max: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            map_width: 1299.0,
            map_height: 750.0,
            altitude: 100.0,
            towers: 1,
            tower_plates: 4,
            tower_power: 100.0,
            tower_efficiency: 0.81,
            chargers: 50,
            mbs: 25,
            mbs_plates: 1,
            capacity: battery_joules(5870.0, 17.4),
            charger_efficiency: 0.81,
            mbs_efficiency: 0.81,
            speed: 20.0,
            move_power: 204.0,
            hover_power: 204.0,
            initial_min: 0.3,
            initial_max: 1.0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("map_width", self.map_width), ("map_height", self.map_height)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, v, "a finite size > 0"));
            }
        }
        if !(0.0 <= self.initial_min && self.initial_min <= self.initial_max && self.initial_max <= 1.0) {
            return Err(Error::param(
                "initial_min",
                self.initial_min,
                "0 <= initial_min <= initial_max <= 1",
            ));
        }
        Ok(())
    }

    pub fn rosters(&self, seed: u64) -> Result<(Vec<Tower>, Vec<ChargerDrone>, Vec<MbsDrone>)> {
        self.validate()?;
        let n = f64::from(self.towers);
        let towers: Vec<Tower> = (0..self.towers)
            .map(|k| Tower {
                id: TowerId(k),
                position: Position::new(
                    self.map_width * (f64::from(k) + 1.0) / (n + 1.0),
                    self.map_height / 2.0,
                    0.0,
                ),
                plates: self.tower_plates,
                charge_power: self.tower_power,
                efficiency: self.tower_efficiency,
            })
            .collect();
        let place = |purpose, k| {
            let mut rng = stream(seed, purpose, k);
            let x = rng.gen_range(0.0..=self.map_width);
            let y = rng.gen_range(0.0..=self.map_height);
            let f = rng.gen_range(self.initial_min..=self.initial_max);
            (Position::new(x, y, self.altitude), f * self.capacity)
        };
        let chargers: Vec<ChargerDrone> = (0..self.chargers)
            .map(|k| {
                let (position, residual) = place(Stream::Charger, k);
                ChargerDrone {
                    id: ChargerId(k),
                    position,
                    capacity: self.capacity,
                    residual,
                    speed: self.speed,
                    efficiency: self.charger_efficiency,
                    move_power: self.move_power,
                }
            })
            .collect();
        let mbs: Vec<MbsDrone> = (0..self.mbs)
            .map(|k| {
                let (position, residual) = place(Stream::Mbs, k);
                MbsDrone {
                    id: MbsId(k),
                    position,
                    capacity: self.capacity,
                    residual,
                    efficiency: self.mbs_efficiency,
                    plates: self.mbs_plates,
                    hover_power: self.hover_power,
                    queue: Default::default(),
                    dropped: false,
                }
            })
            .collect();
        for t in &towers {
            t.validate()?;
        }
        for c in &chargers {
            c.validate()?;
        }
        for m in &mbs {
            m.validate()?;
        }
        Ok((towers, chargers, mbs))
    }

    /// A scenario with default timing, controller, proposed strategies and
    /// the given horizon.
    pub fn scenario(&self, seed: u64, horizon: u32) -> Result<Scenario> {
        let (towers, chargers, mbs) = self.rosters(seed)?;
        let timing = TimingConfig::default();
        let dpp = DppConfig {
            slot: timing.dpp_slot,
            ..DppConfig::default()
        };
        Ok(Scenario {
            towers,
            chargers,
            mbs,
            timing,
            dpp,
            stage2: Stage2Params::default(),
            mode: Stage2Mode::default(),
            stage1_strategy: Strategy::Proposed,
            stage2_strategy: Strategy::Proposed,
            power: PowerPolicy::Dpp,
            horizon,
            seed,
        })
    }
}

/// Canonical experiment setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// 25 MBS drones, 50 chargers, one 4-plate tower, 60 minutes.
    Reference,
    /// 25 chargers and one 4-plate tower, no MBS drones, 60 minutes.
    Stage1Fairness,
    /// 25 chargers serving 50 MBS drones, 60 minutes.
    Stage2,
    /// 25 chargers and a pool of 50 single-plate MBS drones, 120 minutes.
    CoverageSweep,
}

impl Preset {
    pub fn generator(self) -> GeneratorConfig {
        let base = GeneratorConfig::default();
        match self {
            Preset::Reference => base,
            Preset::Stage1Fairness => GeneratorConfig {
                chargers: 25,
                mbs: 0,
                ..base
            },
            Preset::Stage2 => GeneratorConfig {
                chargers: 25,
                mbs: 50,
                hover_power: 0.0,
                ..base
            },
            Preset::CoverageSweep => GeneratorConfig {
                chargers: 25,
                mbs: 50,
                mbs_plates: 1,
                ..base
            },
        }
    }

    pub fn minutes(self) -> f64 {
        match self {
            Preset::CoverageSweep => 120.0,
            _ => 60.0,
        }
    }

    pub fn scenario(self, seed: u64) -> Scenario {
        let horizon = minutes_to_units(self.minutes(), &TimingConfig::default());
        self.generator().scenario(seed, horizon).expect("presets are valid")
    }
}
