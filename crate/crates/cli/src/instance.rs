//! Instance record files: one entity per line, `kind key=value ...`.
//!
//! ```text
//! # towers, chargers and MBS drones; blank lines and # comments are skipped
//! tower id=0 x=649.5 y=375 z=0 plates=4 power=100 efficiency=0.81
//! charger id=0 x=10 y=20 z=100 capacity=367696.8 residual=200000 speed=20 efficiency=0.81 move_power=204
//! mbs id=0 x=30 y=40 z=100 capacity=367696.8 residual=150000 efficiency=0.81 plates=1 hover_power=204
//! ```
//!
//! `mbs` records also accept `backlog`, `slot` and `dropped`. Every other key
//! is required.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use uavcharge_core::energy::{ChargerDrone, ChargerId, MbsDrone, MbsId, Position, Tower, TowerId};
use uavcharge_core::powerctl::QueueState;

use crate::config::ConfigError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Instance {
    pub towers: Vec<Tower>,
    pub chargers: Vec<ChargerDrone>,
    pub mbs: Vec<MbsDrone>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct RecordError {
    pub line: usize,
    pub message: String,
}

struct Fields<'a> {
    map: BTreeMap<&'a str, &'a str>,
    line: usize,
}

impl<'a> Fields<'a> {
    fn err(&self, message: String) -> RecordError {
        RecordError {
            line: self.line,
            message,
        }
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<T, RecordError> {
        let raw = self
            .map
            .remove(key)
            .ok_or_else(|| self.err(format!("missing key `{key}`")))?;
        raw.parse().map_err(|_| self.err(format!("cannot parse `{key}={raw}`")))
    }

    fn take_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T, RecordError> {
        if self.map.contains_key(key) {
            self.take(key)
        } else {
            Ok(default)
        }
    }

    fn position(&mut self) -> Result<Position, RecordError> {
        Ok(Position::new(self.take("x")?, self.take("y")?, self.take("z")?))
    }

    fn finish(self) -> Result<(), RecordError> {
        match self.map.keys().next() {
            Some(k) => Err(self.err(format!("unknown key `{k}`"))),
            None => Ok(()),
        }
    }
}

pub fn parse(text: &str) -> Result<Instance, RecordError> {
    let mut inst = Instance::default();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut words = body.split_whitespace();
        let kind = words.next().expect("non-empty line");
        let mut map = BTreeMap::new();
        for w in words {
            let (key, value) = w.split_once('=').ok_or_else(|| RecordError {
                line,
                message: format!("expected key=value, got `{w}`"),
            })?;
            if map.insert(key, value).is_some() {
                return Err(RecordError {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        let mut f = Fields { map, line };
        match kind {
            "tower" => {
                let t = Tower {
                    id: TowerId(f.take("id")?),
                    position: f.position()?,
                    plates: f.take("plates")?,
                    charge_power: f.take("power")?,
                    efficiency: f.take("efficiency")?,
                };
                f.finish()?;
                inst.towers.push(t);
            }
            "charger" => {
                let c = ChargerDrone {
                    id: ChargerId(f.take("id")?),
                    position: f.position()?,
                    capacity: f.take("capacity")?,
                    residual: f.take("residual")?,
                    speed: f.take("speed")?,
                    efficiency: f.take("efficiency")?,
                    move_power: f.take("move_power")?,
                };
                f.finish()?;
                inst.chargers.push(c);
            }
            "mbs" => {
                let m = MbsDrone {
                    id: MbsId(f.take("id")?),
                    position: f.position()?,
                    capacity: f.take("capacity")?,
                    residual: f.take("residual")?,
                    efficiency: f.take("efficiency")?,
                    plates: f.take("plates")?,
                    hover_power: f.take("hover_power")?,
                    queue: QueueState {
                        backlog: f.take_or("backlog", 0.0)?,
                        slot: f.take_or("slot", 0)?,
                    },
                    dropped: f.take_or("dropped", false)?,
                };
                f.finish()?;
                inst.mbs.push(m);
            }
            other => {
                return Err(RecordError {
                    line,
                    message: format!("unknown record kind `{other}`"),
                })
            }
        }
    }
    Ok(inst)
}

pub fn read(path: &Path) -> Result<Instance, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text).map_err(|e| ConfigError::Instance {
        path: path.display().to_string(),
        line: e.line,
        message: e.message,
    })
}

pub fn write(inst: &Instance) -> String {
    let mut out = String::new();
    for t in &inst.towers {
        let p = t.position;
        let _ = writeln!(
            out,
            "tower id={} x={} y={} z={} plates={} power={} efficiency={}",
            t.id.0, p.x, p.y, p.z, t.plates, t.charge_power, t.efficiency
        );
    }
    for c in &inst.chargers {
        let p = c.position;
        let _ = writeln!(
            out,
            "charger id={} x={} y={} z={} capacity={} residual={} speed={} efficiency={} move_power={}",
            c.id.0, p.x, p.y, p.z, c.capacity, c.residual, c.speed, c.efficiency, c.move_power
        );
    }
    for m in &inst.mbs {
        let p = m.position;
        let _ = write!(
            out,
            "mbs id={} x={} y={} z={} capacity={} residual={} efficiency={} plates={} hover_power={}",
            m.id.0, p.x, p.y, p.z, m.capacity, m.residual, m.efficiency, m.plates, m.hover_power
        );
        if m.queue != QueueState::default() {
            let _ = write!(out, " backlog={} slot={}", m.queue.backlog, m.queue.slot);
        }
        if m.dropped {
            out.push_str(" dropped=true");
        }
        out.push('\n');
    }
    out
}
