//! Time-slotted simulation of the charging network.
//!
//! One unit time runs, in order: the stage-1 tower phase, the stage-2 MBS
//! phase, `slots_per_unit` transmit-power slots on every live MBS drone
//! (paying hover and transmit energy), and drop detection. Chargers jump to
//! their target after paying for the flight; no intermediate positions are
//! simulated.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::energy::{
    apply_charge, distance, tower_charge_amount, travel_energy, ChargerDrone, ChargerId, MbsDrone, MbsId, TimingConfig,
    Tower,
};
use crate::matching::{
    baseline_stage1, baseline_stage2, stage1_match, stage2_match, Baseline, Stage1Assignment, Stage2Assignment,
    Stage2Mode, Stage2Params,
};
use crate::powerctl::{DppConfig, PowerPolicy, QueueController, SlotRecord};
use crate::rng::{stream, Stream};
use crate::{Error, Result};

mod generate;
mod sweep;

pub use generate::{battery_joules, minutes_to_units, GeneratorConfig, Preset};
pub use sweep::{sweep_mbs_count, SweepRow};

/// Who picks a stage's matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    Proposed,
    Random,
    GreedyBest,
    GreedyWorst,
}

impl Strategy {
    /// The baseline behind a non-proposed strategy.
    pub fn baseline(self) -> Option<Baseline> {
        match self {
            Strategy::Proposed => None,
            Strategy::Random => Some(Baseline::Random),
            Strategy::GreedyBest => Some(Baseline::GreedyBest),
            Strategy::GreedyWorst => Some(Baseline::GreedyWorst),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub towers: Vec<Tower>,
    pub chargers: Vec<ChargerDrone>,
    pub mbs: Vec<MbsDrone>,
    pub timing: TimingConfig,
    pub dpp: DppConfig,
    pub stage2: Stage2Params,
    pub mode: Stage2Mode,
    pub stage1_strategy: Strategy,
    pub stage2_strategy: Strategy,
    pub power: PowerPolicy,
    /// Number of unit times to run.
    pub horizon: u32,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::param("horizon", 0.0, "at least one unit time"));
        }
        self.timing.validate()?;
        self.dpp.validate()?;
        if (self.dpp.slot - self.timing.dpp_slot).abs() > 1e-9 * self.timing.dpp_slot {
            return Err(Error::param("dpp.slot", self.dpp.slot, "equal to timing.dpp_slot"));
        }
        if !(self.stage2.epsilon > 0.0) {
            return Err(Error::param("stage2.epsilon", self.stage2.epsilon, "epsilon > 0"));
        }
        if !(self.stage2.charge_power_cap >= 0.0) {
            return Err(Error::param(
                "stage2.charge_power_cap",
                self.stage2.charge_power_cap,
                "a cap >= 0",
            ));
        }
        let mut seen = BTreeSet::new();
        for t in &self.towers {
            t.validate()?;
            if !seen.insert(format!("{}", t.id)) {
                return Err(Error::Config(format!("duplicate id {}", t.id)));
            }
        }
        for c in &self.chargers {
            c.validate()?;
            if !seen.insert(format!("{}", c.id)) {
                return Err(Error::Config(format!("duplicate id {}", c.id)));
            }
        }
        for m in &self.mbs {
            m.validate()?;
            if !seen.insert(format!("{}", m.id)) {
                return Err(Error::Config(format!("duplicate id {}", m.id)));
            }
        }
        Ok(())
    }
}

/// Energy terms of one charger over one unit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargerStep {
    pub id: ChargerId,
    pub capacity: f64,
    pub before: f64,
    /// Energy credited at the tower, after the capacity clamp.
    pub tower_credit: f64,
    pub transfer_sent: f64,
    pub travel_spent: f64,
    pub after: f64,
}

/// Energy terms of one MBS drone over one unit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MbsStep {
    pub id: MbsId,
    pub capacity: f64,
    pub before: f64,
    /// Energy arriving through the charging link, `Σ e·η_c·η_m`.
    pub received: f64,
    pub hover_drain: f64,
    pub tx_drain: f64,
    pub after: f64,
    pub dropped: bool,
}

/// State after one unit time. Unit 0 is the initial state with every term
/// zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub unit: u32,
    pub chargers: Vec<ChargerStep>,
    pub mbs: Vec<MbsStep>,
    pub stage1: Stage1Assignment,
    pub stage2: Stage2Assignment,
    /// MBS drones that dropped during this unit time.
    pub new_drops: Vec<MbsId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "unit", rename_all = "kebab-case")]
pub enum Coverage {
    /// First unit time at which an MBS drone dropped.
    Dropped(u32),
    /// No drop within the horizon.
    Survived(u32),
}

impl Coverage {
    /// Unit-time count; the horizon when nothing dropped.
    pub fn units(self) -> u32 {
        match self {
            Coverage::Dropped(u) | Coverage::Survived(u) => u,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueTrace {
    pub mbs: MbsId,
    pub slots: Vec<SlotRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub snapshots: Vec<Snapshot>,
    pub traces: Vec<QueueTrace>,
    pub coverage: Coverage,
}

impl SimResult {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("the initial snapshot is always present")
    }

    pub fn coverage_time(&self) -> Coverage {
        self.coverage
    }
}

/// Running state of a scenario.
#[derive(Debug, Clone)]
pub struct SimState {
    pub towers: Vec<Tower>,
    pub chargers: Vec<ChargerDrone>,
    pub mbs: Vec<MbsDrone>,
    queues: Vec<QueueController>,
    pub unit: u32,
}

impl SimState {
    pub fn new(scenario: &Scenario) -> Self {
        let mut mbs = scenario.mbs.clone();
        for m in &mut mbs {
            if m.residual <= 0.0 {
                m.residual = 0.0;
                m.dropped = true;
            }
        }
        let queues = mbs
            .iter()
            .map(|m| QueueController::new(scenario.power, m.queue, stream(scenario.seed, Stream::Arrivals, m.id.0)))
            .collect();
        SimState {
            towers: scenario.towers.clone(),
            chargers: scenario.chargers.clone(),
            mbs,
            queues,
            unit: 0,
        }
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            unit: self.unit,
            chargers: self
                .chargers
                .iter()
                .map(|c| ChargerStep {
                    id: c.id,
                    capacity: c.capacity,
                    before: c.residual,
                    tower_credit: 0.0,
                    transfer_sent: 0.0,
                    travel_spent: 0.0,
                    after: c.residual,
                })
                .collect(),
            mbs: self
                .mbs
                .iter()
                .map(|m| MbsStep {
                    id: m.id,
                    capacity: m.capacity,
                    before: m.residual,
                    received: 0.0,
                    hover_drain: 0.0,
                    tx_drain: 0.0,
                    after: m.residual,
                    dropped: m.dropped,
                })
                .collect(),
            stage1: Stage1Assignment::default(),
            stage2: Stage2Assignment::empty(Stage2Mode::default()),
            new_drops: self.mbs.iter().filter(|m| m.dropped).map(|m| m.id).collect(),
        }
    }
}

/// Advances one unit time. Slot records of live MBS drones are appended to
/// `traces`, indexed like `state.mbs`.
pub fn step_unit_time(state: &mut SimState, scenario: &Scenario, traces: &mut [Vec<SlotRecord>]) -> Snapshot {
    state.unit += 1;
    let timing = &scenario.timing;
    let mut snap = state.snapshot();
    snap.unit = state.unit;
    snap.new_drops.clear();
    snap.stage2.mode = scenario.mode;

    // (1) towers → chargers
    let stage1 = match scenario.stage1_strategy.baseline() {
        None => stage1_match(&state.towers, &state.chargers),
        Some(b) => {
            let mut rng = stream(scenario.seed, Stream::Baseline, 2 * state.unit);
            baseline_stage1(b, &state.towers, &state.chargers, &mut rng)
        }
    };
    for &(tid, cid) in &stage1.pairs {
        let t = state.towers.iter().find(|t| t.id == tid).expect("matched tower");
        let k = state
            .chargers
            .iter()
            .position(|c| c.id == cid)
            .expect("matched charger");
        let c = &mut state.chargers[k];
        let d = distance(c.position, t.position);
        let amount = tower_charge_amount(
            t.charge_power,
            t.efficiency,
            c.efficiency,
            timing.tower_phase,
            d,
            c.speed,
        )
        .expect("validated scenario");
        let after = apply_charge(c.residual, amount, c.capacity).expect("non-negative amount");
        snap.chargers[k].tower_credit = after - c.residual;
        c.residual = after;
        c.position = t.position;
    }
    snap.stage1 = stage1;

    // (2) chargers → MBS drones
    let stage2 = match scenario.stage2_strategy.baseline() {
        None => stage2_match(&state.chargers, &state.mbs, timing, scenario.mode, &scenario.stage2),
        Some(b) => {
            let mut rng = stream(scenario.seed, Stream::Baseline, 2 * state.unit + 1);
            baseline_stage2(b, &state.chargers, &state.mbs, timing, &scenario.stage2, &mut rng)
        }
    };
    for p in &stage2.pairs {
        let k = state
            .chargers
            .iter()
            .position(|c| c.id == p.charger)
            .expect("matched charger");
        let i = state.mbs.iter().position(|m| m.id == p.mbs).expect("matched mbs");
        let c = &mut state.chargers[k];
        let m = &mut state.mbs[i];
        let travel =
            travel_energy(distance(c.position, m.position), c.speed, c.move_power).expect("validated scenario");
        c.residual = (c.residual - travel - p.transfer).max(0.0);
        c.position = m.position;
        snap.chargers[k].travel_spent += travel;
        snap.chargers[k].transfer_sent += p.transfer;

        let delivered = p.transfer * c.efficiency * m.efficiency;
        snap.mbs[i].received += delivered;
        m.residual = apply_charge(m.residual, delivered, m.capacity).expect("non-negative transfer");
    }
    snap.stage2 = stage2;

    // (3) transmission and hovering
    for (i, m) in state.mbs.iter_mut().enumerate() {
        if m.dropped {
            continue;
        }
        let mut tx = 0.0;
        for _ in 0..timing.slots_per_unit {
            let rec = state.queues[i].step(&scenario.dpp);
            tx += rec.energy;
            traces[i].push(rec);
        }
        m.queue = state.queues[i].state;
        let hover = m.hover_power * timing.unit_time;
        snap.mbs[i].hover_drain = hover;
        snap.mbs[i].tx_drain = tx;
        m.residual = (m.residual - hover - tx).max(0.0);

        // (4) drops
        if m.residual <= 0.0 {
            m.residual = 0.0;
            m.dropped = true;
            snap.new_drops.push(m.id);
        }
    }

    for (k, c) in state.chargers.iter().enumerate() {
        snap.chargers[k].after = c.residual;
    }
    for (i, m) in state.mbs.iter().enumerate() {
        snap.mbs[i].after = m.residual;
        snap.mbs[i].dropped = m.dropped;
    }
    snap
}

/// Runs the scenario for its full horizon. Chargers keep cycling through the
/// towers after the last MBS drone has dropped.
pub fn run(scenario: &Scenario) -> Result<SimResult> {
    scenario.validate()?;
    let mut state = SimState::new(scenario);
    let mut traces: Vec<Vec<SlotRecord>> = state.mbs.iter().map(|_| Vec::new()).collect();
    let first = state.snapshot();
    let mut coverage = if first.new_drops.is_empty() { None } else { Some(0) };
    let mut snapshots = alloc::vec![first];
    for _ in 0..scenario.horizon {
        let snap = step_unit_time(&mut state, scenario, &mut traces);
        if coverage.is_none() && !snap.new_drops.is_empty() {
            coverage = Some(snap.unit);
        }
        snapshots.push(snap);
    }
    Ok(SimResult {
        snapshots,
        traces: state
            .mbs
            .iter()
            .zip(traces)
            .map(|(m, slots)| QueueTrace { mbs: m.id, slots })
            .collect(),
        coverage: coverage.map_or(Coverage::Survived(scenario.horizon), Coverage::Dropped),
    })
}

/// A failed per-step energy balance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditFailure {
    pub unit: u32,
    pub entity: alloc::string::String,
    pub expected: f64,
    pub actual: f64,
}

/// Checks every per-step balance of a result:
///
/// - charger: `after − before = tower_credit − transfer_sent − travel_spent`,
///   every term non-negative;
/// - MBS drone: `after = clamp(clamp(before + received, ≤ E) − hover − tx, ≥ 0)`;
/// - every residual within `[0, capacity]`.
pub fn audit(result: &SimResult, tolerance: f64) -> Vec<AuditFailure> {
    let mut out = Vec::new();
    let mut fail = |unit, entity: alloc::string::String, expected: f64, actual: f64| {
        out.push(AuditFailure {
            unit,
            entity,
            expected,
            actual,
        })
    };
    for s in &result.snapshots {
        for c in &s.chargers {
            let expected = c.before + c.tower_credit - c.transfer_sent - c.travel_spent;
            if (expected - c.after).abs() > tolerance {
                fail(s.unit, format!("{}", c.id), expected, c.after);
            }
            for term in [c.tower_credit, c.transfer_sent, c.travel_spent] {
                if term < 0.0 {
                    fail(s.unit, format!("{} term", c.id), 0.0, term);
                }
            }
            if !(0.0..=c.capacity).contains(&c.after) {
                fail(s.unit, format!("{} range", c.id), c.capacity, c.after);
            }
        }
        for m in &s.mbs {
            let credited = (m.before + m.received).min(m.capacity);
            let expected = (credited - m.hover_drain - m.tx_drain).max(0.0);
            if (expected - m.after).abs() > tolerance {
                fail(s.unit, format!("{}", m.id), expected, m.after);
            }
            if !(0.0..=m.capacity).contains(&m.after) {
                fail(s.unit, format!("{} range", m.id), m.capacity, m.after);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::energy::{Position, TowerId};
    use crate::powerctl::ArrivalModel;

    fn quiet_dpp() -> DppConfig {
        DppConfig {
            arrival: ArrivalModel::Constant { mean: 0.0 },
            ..DppConfig::default()
        }
    }

    fn mbs(id: u32, residual: f64, hover: f64) -> MbsDrone {
        MbsDrone {
            id: MbsId(id),
            position: Position::new(100.0 * f64::from(id), 0.0, 100.0),
            capacity: 100_000.0,
            residual,
            efficiency: 0.81,
            plates: 1,
            hover_power: hover,
            queue: Default::default(),
            dropped: false,
        }
    }

    fn scenario(mbs: Vec<MbsDrone>) -> Scenario {
        Scenario {
            towers: Vec::new(),
            chargers: Vec::new(),
            mbs,
            timing: TimingConfig::default(),
            dpp: quiet_dpp(),
            stage2: Stage2Params::default(),
            mode: Stage2Mode::Allocate,
            stage1_strategy: Strategy::Proposed,
            stage2_strategy: Strategy::Proposed,
            power: PowerPolicy::Dpp,
            horizon: 5,
            seed: 1,
        }
    }

    #[test]
    fn zero_horizon_rejected() {
        let mut s = scenario(Vec::new());
        s.horizon = 0;
        assert!(run(&s).is_err());
    }

    #[test]
    fn full_batteries_no_drain_survive() {
        let s = scenario(alloc::vec![mbs(0, 100_000.0, 0.0), mbs(1, 100_000.0, 0.0)]);
        let r = run(&s).unwrap();
        assert_eq!(r.coverage, Coverage::Survived(5));
        assert_eq!(r.coverage.units(), 5);
        assert_eq!(r.snapshots.len(), 6);
        assert!(audit(&r, 1e-6).is_empty());
    }

    #[test]
    fn drain_without_chargers() {
        let s = scenario(alloc::vec![mbs(0, 100_000.0, 10.0)]);
        let r = run(&s).unwrap();
        for w in r.snapshots.windows(2) {
            assert_relative_eq!(w[1].mbs[0].after, w[0].mbs[0].after - 1_200.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn empty_drone_drops_at_zero() {
        let s = scenario(alloc::vec![mbs(0, 0.0, 10.0), mbs(1, 50_000.0, 10.0)]);
        let r = run(&s).unwrap();
        assert_eq!(r.coverage, Coverage::Dropped(0));
        assert!(r.traces[0].slots.is_empty());
        assert_eq!(r.traces[1].slots.len(), 5 * 120);
    }

    #[test]
    fn half_unit_reserve_drops_in_first_unit() {
        // hover 100 W over 120 s is 12 kJ; 6 kJ on board
        let s = scenario(alloc::vec![mbs(0, 6_000.0, 100.0), mbs(1, 100_000.0, 100.0)]);
        let r = run(&s).unwrap();
        assert_eq!(r.coverage, Coverage::Dropped(1));
        assert_eq!(r.snapshots[1].new_drops, [MbsId(0)]);
        assert_eq!(r.snapshots[1].mbs[0].after, 0.0);
        // dropped drones stop transmitting
        assert_eq!(r.traces[0].slots.len(), 120);
    }

    #[test]
    fn runs_full_horizon_after_everyone_dropped() {
        let s = scenario(alloc::vec![mbs(0, 6_000.0, 100.0)]);
        let r = run(&s).unwrap();
        assert_eq!(r.snapshots.len(), s.horizon as usize + 1);
        assert_eq!(r.coverage, Coverage::Dropped(1));
        assert_eq!(r.traces[0].slots.len(), s.timing.slots_per_unit as usize);
    }

    #[test]
    fn charger_at_tower_gains_full_window() {
        let mut s = scenario(Vec::new());
        s.towers.push(Tower {
            id: TowerId(0),
            position: Position::new(0.0, 0.0, 0.0),
            plates: 1,
            charge_power: 100.0,
            efficiency: 0.81,
        });
        s.chargers.push(ChargerDrone {
            id: ChargerId(0),
            position: Position::new(0.0, 0.0, 0.0),
            capacity: 367_696.8,
            residual: 100_000.0,
            speed: 20.0,
            efficiency: 0.81,
            move_power: 204.0,
        });
        s.horizon = 1;
        let r = run(&s).unwrap();
        assert_relative_eq!(
            r.snapshots[1].chargers[0].tower_credit,
            100.0 * 0.6561 * 60.0,
            max_relative = 1e-12
        );
        assert!(audit(&r, 1e-6).is_empty());
    }
}
