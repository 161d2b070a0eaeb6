//! Network entities, geometry and the energy model shared by every other
//! module.
//!
//! Energies are joules, powers watts, distances meters and durations
//! seconds throughout.

use core::fmt;

use serde::{Deserialize, Serialize};

use crate::powerctl::QueueState;
use crate::{Error, Result};

macro_rules! entity_id {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

entity_id!(
    /// Identifier of a ground charging tower.
    TowerId,
    "T"
);
entity_id!(
    /// Identifier of a charging drone.
    ChargerId,
    "C"
);
entity_id!(
    /// Identifier of an MBS drone.
    MbsId,
    "M"
);

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    /// Altitude.
    pub z: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Position { x, y, z }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("x", self.x), ("y", self.y), ("z", self.z)] {
            if !v.is_finite() {
                return Err(Error::param(name, v, "a finite coordinate"));
            }
        }
        if self.z < 0.0 {
            return Err(Error::param("z", self.z, "altitude >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tower {
    pub id: TowerId,
    pub position: Position,
    /// Number of charging plates, i.e. chargers served at once.
    pub plates: u32,
    /// Rated output power of the charger.
    pub charge_power: f64,
    pub efficiency: f64,
}

impl Tower {
    pub fn validate(&self) -> Result<()> {
        self.position.validate()?;
        if self.plates == 0 {
            return Err(Error::param("tower.plates", 0.0, "at least one plate"));
        }
        positive("tower.charge_power", self.charge_power)?;
        efficiency("tower.efficiency", self.efficiency)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargerDrone {
    pub id: ChargerId,
    pub position: Position,
    pub capacity: f64,
    pub residual: f64,
    pub speed: f64,
    pub efficiency: f64,
    /// Constant power drawn while flying.
    pub move_power: f64,
}

impl ChargerDrone {
    /// Room left in the battery, `E - e`.
    pub fn deficit(&self) -> f64 {
        (self.capacity - self.residual).max(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        self.position.validate()?;
        positive("charger.capacity", self.capacity)?;
        stored("charger.residual", self.residual, self.capacity)?;
        positive("charger.speed", self.speed)?;
        non_negative("charger.move_power", self.move_power)?;
        efficiency("charger.efficiency", self.efficiency)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MbsDrone {
    pub id: MbsId,
    pub position: Position,
    pub capacity: f64,
    pub residual: f64,
    pub efficiency: f64,
    pub plates: u32,
    pub hover_power: f64,
    #[serde(default)]
    pub queue: QueueState,
    /// Set once the battery has hit zero; never cleared.
    #[serde(default)]
    pub dropped: bool,
}

impl MbsDrone {
    pub fn deficit(&self) -> f64 {
        (self.capacity - self.residual).max(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        self.position.validate()?;
        positive("mbs.capacity", self.capacity)?;
        stored("mbs.residual", self.residual, self.capacity)?;
        efficiency("mbs.efficiency", self.efficiency)?;
        if self.plates == 0 {
            return Err(Error::param("mbs.plates", 0.0, "at least one plate"));
        }
        non_negative("mbs.hover_power", self.hover_power)
    }
}

/// Split of one unit time into the tower phase and the MBS phase, and of
/// the unit time into transmit-power slots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingConfig {
    pub unit_time: f64,
    pub tower_phase: f64,
    pub mbs_phase: f64,
    pub dpp_slot: f64,
    pub slots_per_unit: u32,
}

impl TimingConfig {
    /// Builds a consistent configuration from the two phase lengths and the
    /// number of controller slots per unit time.
    pub fn from_phases(tower_phase: f64, mbs_phase: f64, slots_per_unit: u32) -> Self {
        let unit_time = tower_phase + mbs_phase;
        TimingConfig {
            unit_time,
            tower_phase,
            mbs_phase,
            dpp_slot: unit_time / f64::from(slots_per_unit.max(1)),
            slots_per_unit,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("timing.unit_time", self.unit_time)?;
        positive("timing.tower_phase", self.tower_phase)?;
        positive("timing.mbs_phase", self.mbs_phase)?;
        positive("timing.dpp_slot", self.dpp_slot)?;
        if self.slots_per_unit == 0 {
            return Err(Error::param("timing.slots_per_unit", 0.0, "at least one slot"));
        }
        let tol = 1e-9 * self.unit_time;
        if (self.tower_phase + self.mbs_phase - self.unit_time).abs() > tol {
            return Err(Error::param(
                "timing.unit_time",
                self.unit_time,
                "tower_phase + mbs_phase",
            ));
        }
        if (f64::from(self.slots_per_unit) * self.dpp_slot - self.unit_time).abs() > tol {
            return Err(Error::param(
                "timing.dpp_slot",
                self.dpp_slot,
                "slots_per_unit * dpp_slot == unit_time",
            ));
        }
        Ok(())
    }
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig::from_phases(60.0, 60.0, 120)
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, v, "a finite value > 0"))
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, v, "a finite value >= 0"))
    }
}

fn efficiency(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, v, "an efficiency in (0, 1]"))
    }
}

fn stored(name: &'static str, v: f64, capacity: f64) -> Result<()> {
    if v.is_finite() && (0.0..=capacity).contains(&v) {
        Ok(())
    } else {
        Err(Error::param(name, v, "0 <= residual <= capacity"))
    }
}

/// Euclidean distance.
pub fn distance(a: Position, b: Position) -> f64 {
    let (dx, dy, dz) = (a.x - b.x, a.y - b.y, a.z - b.z);
    libm::sqrt(dx * dx + dy * dy + dz * dz)
}

pub fn travel_time(distance: f64, speed: f64) -> Result<f64> {
    if !(speed > 0.0) {
        return Err(Error::param("speed", speed, "speed > 0"));
    }
    Ok(distance / speed)
}

/// Energy spent covering `distance` at constant `speed` while drawing the
/// constant `move_power`.
pub fn travel_energy(distance: f64, speed: f64, move_power: f64) -> Result<f64> {
    if !(move_power >= 0.0) {
        return Err(Error::param("move_power", move_power, "move_power >= 0"));
    }
    Ok(move_power * travel_time(distance, speed)?)
}

/// Energy a tower plate puts into a charger during the tower phase.
///
/// The charger first flies `distance` to the tower; only the remainder of the
/// phase is spent on the plate. Clamped at zero when the flight alone takes
/// the whole phase.
pub fn tower_charge_amount(
    charge_power: f64,
    tower_efficiency: f64,
    charger_efficiency: f64,
    tower_phase: f64,
    distance: f64,
    speed: f64,
) -> Result<f64> {
    if !(tower_phase > 0.0) {
        return Err(Error::param("tower_phase", tower_phase, "tower_phase > 0"));
    }
    let window = (tower_phase - travel_time(distance, speed)?).max(0.0);
    Ok(charge_power * tower_efficiency * charger_efficiency * window)
}

/// Credits `amount` to a battery, saturating at `capacity`.
pub fn apply_charge(residual: f64, amount: f64, capacity: f64) -> Result<f64> {
    if !(amount >= 0.0) {
        return Err(Error::param("amount", amount, "amount >= 0"));
    }
    Ok((residual + amount).min(capacity))
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn distance_examples() {
        let o = Position::new(0.0, 0.0, 0.0);
        assert_eq!(distance(o, o), 0.0);
        assert_eq!(distance(o, Position::new(3.0, 4.0, 0.0)), 5.0);
        assert_eq!(
            distance(Position::new(100.0, 0.0, 0.0), Position::new(100.0, 0.0, 100.0)),
            100.0
        );
    }

    #[test]
    fn travel_examples() {
        assert_eq!(travel_time(100.0, 20.0).unwrap(), 5.0);
        assert_eq!(travel_time(0.0, 20.0).unwrap(), 0.0);
        assert_eq!(travel_time(1200.0, 20.0).unwrap(), 60.0);
        assert!(matches!(
            travel_time(10.0, 0.0),
            Err(Error::InvalidParameter { name: "speed", .. })
        ));
        assert!(travel_time(10.0, -1.0).is_err());

        assert_relative_eq!(travel_energy(100.0, 20.0, 204.0).unwrap(), 1020.0);
        assert_eq!(travel_energy(0.0, 20.0, 204.0).unwrap(), 0.0);
        assert_eq!(travel_energy(100.0, 20.0, 0.0).unwrap(), 0.0);
        assert!(travel_energy(100.0, 0.0, 204.0).is_err());
        assert!(travel_energy(100.0, 20.0, -1.0).is_err());
    }

    #[test]
    fn tower_charge_examples() {
        let e = tower_charge_amount(100.0, 0.81, 0.81, 60.0, 100.0, 20.0).unwrap();
        assert_relative_eq!(e, 3608.55, max_relative = 1e-12);
        assert_eq!(tower_charge_amount(100.0, 0.81, 0.81, 60.0, 1200.0, 20.0).unwrap(), 0.0);
        // flight longer than the whole phase
        assert_eq!(tower_charge_amount(100.0, 0.81, 0.81, 60.0, 5000.0, 20.0).unwrap(), 0.0);
        assert_eq!(tower_charge_amount(1.0, 1.0, 1.0, 1.0, 0.0, 1.0).unwrap(), 1.0);
        assert!(tower_charge_amount(1.0, 1.0, 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(tower_charge_amount(1.0, 1.0, 1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn apply_charge_examples() {
        assert_eq!(apply_charge(367_000.0, 3608.55, 367_700.0).unwrap(), 367_700.0);
        assert_eq!(apply_charge(0.0, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(apply_charge(100.0, 50.0, 1000.0).unwrap(), 150.0);
        assert!(apply_charge(100.0, -1.0, 1000.0).is_err());
    }

    #[test]
    fn timing_validation() {
        let t = TimingConfig::default();
        t.validate().unwrap();
        assert_eq!(t.unit_time, 120.0);
        assert_eq!(t.dpp_slot, 1.0);

        let mut bad = t;
        bad.unit_time = 100.0;
        assert!(bad.validate().is_err());
        let mut bad = t;
        bad.slots_per_unit = 7;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn entity_validation() {
        let c = ChargerDrone {
            id: ChargerId(0),
            position: Position::new(0.0, 0.0, 100.0),
            capacity: 100.0,
            residual: 120.0,
            speed: 20.0,
            efficiency: 0.81,
            move_power: 204.0,
        };
        assert!(c.validate().is_err());
        assert!(ChargerDrone {
            residual: 50.0,
            ..c.clone()
        }
        .validate()
        .is_ok());
        assert!(ChargerDrone {
            residual: 50.0,
            efficiency: 0.0,
            ..c.clone()
        }
        .validate()
        .is_err());
        assert!(ChargerDrone {
            residual: 50.0,
            position: Position::new(0.0, f64::NAN, 1.0),
            ..c
        }
        .validate()
        .is_err());

        let t = Tower {
            id: TowerId(0),
            position: Position::default(),
            plates: 0,
            charge_power: 100.0,
            efficiency: 0.81,
        };
        assert!(t.validate().is_err());
        assert!(Tower { plates: 4, ..t }.validate().is_ok());
    }

    proptest! {
        #[test]
        fn charge_monotone_in_distance(d1 in 0.0..3000.0f64, d2 in 0.0..3000.0f64,
                                       u in 1.0..200.0f64, p in 1.0..500.0f64) {
            let (near, far) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            let a = tower_charge_amount(p, 0.81, 0.9, u, near, 20.0).unwrap();
            let b = tower_charge_amount(p, 0.81, 0.9, u, far, 20.0).unwrap();
            prop_assert!(a >= b);
            let longer = tower_charge_amount(p, 0.81, 0.9, u + 1.0, near, 20.0).unwrap();
            prop_assert!(longer >= a);
        }

        #[test]
        fn apply_charge_never_overcredits(cap in 1.0..1e6f64, frac in 0.0..=1.0f64, amount in 0.0..1e6f64) {
            let r = cap * frac;
            let out = apply_charge(r, amount, cap).unwrap();
            prop_assert!(out <= cap);
            prop_assert!(out - r <= amount + 1e-9 * cap);
            prop_assert!(out >= r);
        }

        #[test]
        fn travel_energy_is_additive(d1 in 0.0..5000.0f64, d2 in 0.0..5000.0f64,
                                     s in 0.5..40.0f64, p in 0.0..400.0f64) {
            let sum = travel_energy(d1, s, p).unwrap() + travel_energy(d2, s, p).unwrap();
            let joint = travel_energy(d1 + d2, s, p).unwrap();
            prop_assert!((sum - joint).abs() <= 1e-9 * joint.max(1.0));
        }

        #[test]
        fn distance_symmetric(ax in -1e4..1e4f64, ay in -1e4..1e4f64, az in 0.0..1e3f64,
                              bx in -1e4..1e4f64, by in -1e4..1e4f64, bz in 0.0..1e3f64) {
            let a = Position::new(ax, ay, az);
            let b = Position::new(bx, by, bz);
            prop_assert_eq!(distance(a, b), distance(b, a));
            prop_assert!(distance(a, b) >= 0.0);
        }
    }
}
