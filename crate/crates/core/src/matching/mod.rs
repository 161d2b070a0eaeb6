//! Charging matchings.
//!
//! Stage 1 pairs charging towers with charging drones, maximizing the total
//! charging capacity `Σ (E − e)` of the served drones subject to the tower
//! plate counts and one tower per drone.
//!
//! Stage 2 pairs charging drones with MBS drones. Each feasible pair carries
//! a value (see [`pair_value`]); the matching respects the MBS plate counts,
//! one MBS drone per charger, the per-charger energy budget and the MBS
//! battery room. Two solver modes are provided:
//!
//! - [`Stage2Mode::Literal`] solves the convexified program as written with an
//!   LP relaxation of the matching indices followed by rounding. Its objective
//!   only decreases with the transfer energies, so every transfer comes out
//!   as zero; among those optima the matching maximizes the total pair value.
//! - [`Stage2Mode::Allocate`] computes the exact maximum-value capacitated
//!   matching with a min-cost-flow solver and then fills each pair with
//!   energy via [`allocate_transfers`].
//!
//! Brute-force oracles for both stages and the random / greedy baselines
//! live here as well.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::energy::{ChargerId, MbsId, TowerId};

mod baseline;
mod brute;
mod flow;
mod simplex;
mod stage1;
mod stage2;
mod value;

pub use baseline::{baseline_stage1, baseline_stage2, Baseline};
pub use brute::{
    stage1_brute_force, stage2_brute_force, STAGE1_MAX_CHARGERS, STAGE1_MAX_PLATES, STAGE2_MAX_CHARGERS, STAGE2_MAX_MBS,
};
pub use flow::MinCostFlow;
pub use simplex::{LinearProgram, LpError, LpSolution};
pub use stage1::{check_stage1, stage1_match};
pub use stage2::{allocate_transfers, check_stage2, stage2_match, stage2_weights};
pub use value::{hessian_eigenvalues, pair_value, symmetric_eigenvalues_2x2, HessianWitness};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Stage1Assignment {
    pub pairs: Vec<(TowerId, ChargerId)>,
    /// Total charging capacity of the matched chargers, joules.
    pub objective: f64,
}

impl Stage1Assignment {
    pub fn tower_of(&self, charger: ChargerId) -> Option<TowerId> {
        self.pairs.iter().find(|p| p.1 == charger).map(|p| p.0)
    }
}

/// Value of sending a charger to an MBS drone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairValue {
    pub charger: ChargerId,
    pub mbs: MbsId,
    pub value: f64,
    /// Charger energy left after the flight, `max(e_c − travel, 0)`.
    pub reachable_energy: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage2Mode {
    Literal,
    #[default]
    Allocate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage2Pair {
    pub mbs: MbsId,
    pub charger: ChargerId,
    /// Energy drawn from the charger for this MBS drone, joules.
    pub transfer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage2Assignment {
    pub pairs: Vec<Stage2Pair>,
    /// Sum of the zero-transfer pair values over the matched pairs.
    pub objective: f64,
    pub mode: Stage2Mode,
}

impl Stage2Assignment {
    pub fn empty(mode: Stage2Mode) -> Self {
        Stage2Assignment {
            pairs: Vec::new(),
            objective: 0.0,
            mode,
        }
    }
}

/// Knobs of the stage-2 value function and transfer rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage2Params {
    /// Floor on the MBS residual energy in the value denominator, joules.
    pub epsilon: f64,
    /// Largest power a flight battery accepts while charging, watts.
    pub charge_power_cap: f64,
}

impl Default for Stage2Params {
    fn default() -> Self {
        Stage2Params {
            epsilon: 1.0,
            charge_power_cap: 160.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Violation {
    #[error("{0} is matched more than once")]
    ChargerReused(ChargerId),
    #[error("{who} serves {count} drones but has {plates} plates")]
    PlatesExceeded {
        who: alloc::string::String,
        count: usize,
        plates: u32,
    },
    #[error("pair {mbs}-{charger} is not in the feasible set")]
    Infeasible { mbs: MbsId, charger: ChargerId },
    #[error("unknown entity {0}")]
    Unknown(alloc::string::String),
    #[error("negative transfer {transfer} on {mbs}-{charger}")]
    NegativeTransfer {
        mbs: MbsId,
        charger: ChargerId,
        transfer: f64,
    },
    #[error("{0} sends {1} J but holds {2} J")]
    ChargerBudget(ChargerId, f64, f64),
    #[error("{0} would receive {1} J but has room for {2} J")]
    MbsRoom(MbsId, f64, f64),
}
