//! Per-drone transmit-power control.
//!
//! Each MBS drone owns one transmission queue. Every slot it observes the
//! backlog `Q` and picks a transmit power `α` from a finite action set by
//! minimizing the drift-plus-penalty score
//!
//! ```text
//! V · E(α) − Q · b(α)
//! ```
//!
//! where `E(α) = α·τ` is the energy spent in the slot and
//! `b(α) = τ · W · log2(1 + α·g/σ²)` the number of bits served. A large `V`
//! favours saving energy, a large backlog favours draining the queue.
//! Controllers share nothing with each other or with the charging matcher.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::{Error, Result};

/// Backlog of one transmission queue, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QueueState {
    pub backlog: f64,
    /// Slots elapsed since the queue was created.
    pub slot: u64,
}

impl QueueState {
    /// Quadratic Lyapunov function `½Q²`.
    pub fn lyapunov(&self) -> f64 {
        0.5 * self.backlog * self.backlog
    }
}

/// A transmit power in watts.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PowerAction(pub f64);

impl PowerAction {
    pub fn watts(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    /// Bandwidth in Hz.
    pub bandwidth: f64,
    pub gain: f64,
    /// Noise power in watts.
    pub noise: f64,
}

impl Default for Channel {
    fn default() -> Self {
        Channel {
            bandwidth: 1_000.0,
            gain: 1e-3,
            noise: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArrivalModel {
    /// `mean` bits every slot.
    Constant { mean: f64 },
    /// Uniform on `[0, 2·mean]`, drawn from the queue's own seeded stream.
    Uniform { mean: f64 },
}

impl ArrivalModel {
    pub fn mean(&self) -> f64 {
        match *self {
            ArrivalModel::Constant { mean } | ArrivalModel::Uniform { mean } => mean,
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            ArrivalModel::Constant { mean } => mean,
            ArrivalModel::Uniform { mean } => {
                if mean > 0.0 {
                    rng.gen_range(0.0..=2.0 * mean)
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DppConfig {
    /// Weight of the energy penalty against queue drift.
    pub v: f64,
    /// Candidate powers, ascending and distinct.
    pub action_set: Vec<PowerAction>,
    /// Slot length τ in seconds.
    pub slot: f64,
    pub channel: Channel,
    pub arrival: ArrivalModel,
}

/// Backlog at which the default `V` balances the energy and drift terms at
/// full power.
pub const DEFAULT_TYPICAL_BACKLOG: f64 = 1e6;

impl Default for DppConfig {
    fn default() -> Self {
        let mut cfg = DppConfig {
            v: 0.0,
            action_set: uniform_action_set(0.0, 160.0, 17),
            slot: 1.0,
            channel: Channel::default(),
            arrival: ArrivalModel::Constant { mean: 2_000.0 },
        };
        cfg.v = cfg.calibrated_v(DEFAULT_TYPICAL_BACKLOG);
        cfg
    }
}

impl DppConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.v >= 0.0 && self.v.is_finite()) {
            return Err(Error::param("dpp.v", self.v, "a finite V >= 0"));
        }
        if self.action_set.is_empty() {
            return Err(Error::Config("dpp.action_set must not be empty".into()));
        }
        for w in self.action_set.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::param("dpp.action_set", w[1].0, "strictly ascending powers"));
            }
        }
        if !(self.action_set[0].0 >= 0.0) {
            return Err(Error::param("dpp.action_set", self.action_set[0].0, "powers >= 0"));
        }
        if !(self.slot > 0.0) {
            return Err(Error::param("dpp.slot", self.slot, "slot > 0"));
        }
        if !(self.channel.bandwidth > 0.0) {
            return Err(Error::param("dpp.bandwidth", self.channel.bandwidth, "bandwidth > 0"));
        }
        if !(self.channel.noise > 0.0) {
            return Err(Error::param("dpp.noise", self.channel.noise, "noise > 0"));
        }
        if !(self.channel.gain >= 0.0) {
            return Err(Error::param("dpp.gain", self.channel.gain, "gain >= 0"));
        }
        let mean = self.arrival.mean();
        if !(mean >= 0.0 && mean.is_finite()) {
            return Err(Error::param("dpp.arrival_mean", mean, "a finite mean >= 0"));
        }
        Ok(())
    }

    pub fn max_action(&self) -> PowerAction {
        *self.action_set.last().expect("validated non-empty")
    }

    /// `V` such that `V·E(α_max) = q_typical · b(α_max)`.
    pub fn calibrated_v(&self, q_typical: f64) -> f64 {
        let top = self.max_action().0;
        let energy = tx_energy(top, self.slot);
        if energy > 0.0 {
            q_typical * service_rate(top, &self.channel, self.slot) / energy
        } else {
            0.0
        }
    }
}

/// `n` evenly spaced powers from `lo` to `hi` inclusive.
pub fn uniform_action_set(lo: f64, hi: f64, n: usize) -> Vec<PowerAction> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![PowerAction(lo)],
        _ => (0..n)
            .map(|k| PowerAction(lo + (hi - lo) * k as f64 / (n - 1) as f64))
            .collect(),
    }
}

pub fn tx_energy(power: f64, slot: f64) -> f64 {
    power * slot
}

/// Bits served in one slot at the given power.
pub fn service_rate(power: f64, channel: &Channel, slot: f64) -> f64 {
    let snr = power * channel.gain / channel.noise;
    slot * channel.bandwidth * libm::log2(1.0 + snr)
}

pub fn dpp_objective(backlog: f64, action: PowerAction, cfg: &DppConfig) -> f64 {
    cfg.v * tx_energy(action.0, cfg.slot) - backlog * service_rate(action.0, &cfg.channel, cfg.slot)
}

/// Minimizes the drift-plus-penalty score over the action set; ties go to
/// the lower power.
pub fn dpp_decide(backlog: f64, cfg: &DppConfig) -> PowerAction {
    let mut best = cfg.action_set[0];
    let mut best_score = dpp_objective(backlog, best, cfg);
    for &a in &cfg.action_set[1..] {
        let s = dpp_objective(backlog, a, cfg);
        if s < best_score {
            best = a;
            best_score = s;
        }
    }
    best
}

/// Smallest backlog above which [`dpp_decide`] always returns the largest
/// power.
pub fn max_rate_threshold(cfg: &DppConfig) -> f64 {
    let top = cfg.max_action().0;
    let e_top = tx_energy(top, cfg.slot);
    let b_top = service_rate(top, &cfg.channel, cfg.slot);
    cfg.action_set[..cfg.action_set.len() - 1]
        .iter()
        .map(|a| {
            let db = b_top - service_rate(a.0, &cfg.channel, cfg.slot);
            if db > 0.0 {
                cfg.v * (e_top - tx_energy(a.0, cfg.slot)) / db
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// `max(Q − b, 0) + a`.
pub fn queue_step(backlog: f64, arrival: f64, departure: f64) -> f64 {
    (backlog - departure).max(0.0) + arrival
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselinePower {
    MaxPa,
    MinPa,
}

/// Max PA: the largest power. Min PA: the smallest strictly positive power
/// (falls back to the largest if every power is zero).
pub fn baseline_policy(kind: BaselinePower, cfg: &DppConfig) -> PowerAction {
    match kind {
        BaselinePower::MaxPa => cfg.max_action(),
        BaselinePower::MinPa => cfg
            .action_set
            .iter()
            .copied()
            .find(|a| a.0 > 0.0)
            .unwrap_or_else(|| cfg.max_action()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerPolicy {
    #[default]
    Dpp,
    MaxPa,
    MinPa,
}

impl PowerPolicy {
    pub fn decide(self, backlog: f64, cfg: &DppConfig) -> PowerAction {
        match self {
            PowerPolicy::Dpp => dpp_decide(backlog, cfg),
            PowerPolicy::MaxPa => baseline_policy(BaselinePower::MaxPa, cfg),
            PowerPolicy::MinPa => baseline_policy(BaselinePower::MinPa, cfg),
        }
    }
}

/// One controller slot: observed backlog, chosen power, arrivals, offered
/// service and energy spent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub slot: u64,
    pub backlog: f64,
    pub power: f64,
    pub arrival: f64,
    pub departure: f64,
    pub energy: f64,
}

/// A queue plus its arrival stream and decision policy.
#[derive(Debug, Clone)]
pub struct QueueController {
    pub state: QueueState,
    policy: PowerPolicy,
    arrivals: ChaCha8Rng,
}

impl QueueController {
    pub fn new(policy: PowerPolicy, state: QueueState, arrivals: ChaCha8Rng) -> Self {
        QueueController {
            state,
            policy,
            arrivals,
        }
    }

    pub fn step(&mut self, cfg: &DppConfig) -> SlotRecord {
        let q = self.state.backlog;
        let action = self.policy.decide(q, cfg);
        let arrival = cfg.arrival.sample(&mut self.arrivals);
        let departure = service_rate(action.0, &cfg.channel, cfg.slot);
        let rec = SlotRecord {
            slot: self.state.slot,
            backlog: q,
            power: action.0,
            arrival,
            departure,
            energy: tx_energy(action.0, cfg.slot),
        };
        self.state.backlog = queue_step(q, arrival, departure);
        self.state.slot += 1;
        rec
    }
}

/// Runs one isolated queue for `slots` slots starting from an empty backlog.
pub fn simulate_queue(policy: PowerPolicy, cfg: &DppConfig, slots: usize, seed: u64) -> Vec<SlotRecord> {
    let mut ctl = QueueController::new(
        policy,
        QueueState::default(),
        rng::stream(seed, rng::Stream::Arrivals, 0),
    );
    (0..slots).map(|_| ctl.step(cfg)).collect()
}
