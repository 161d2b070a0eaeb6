//! Two-stage mobile charging for UAV base-station networks.
//!
//! Charging towers recharge charging drones (stage 1), charging drones ferry
//! energy to MBS (mobile base station) drones (stage 2), and every MBS drone
//! runs its own drift-plus-penalty transmit-power controller over its
//! transmission queue. This crate holds the algorithmic part of the system:
//!
//! - [`energy`]: entities, geometry, wireless-charging and travel energy model.
//! - [`matching`]: stage-1 / stage-2 solvers, brute-force oracles, baselines.
//! - [`powerctl`]: queue dynamics, drift-plus-penalty decision, Max/min PA.
//! - [`sim`]: the time-slotted simulator and coverage-time sweeps.
//! - [`metrics`]: residual-energy profiles, queue traces, stability verdicts.
//!
//! The crate is `no_std` and only needs `alloc`. All randomness flows from
//! explicit seeds through [`rng`].

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod energy;
mod error;
pub mod matching;
pub mod metrics;
pub mod powerctl;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
