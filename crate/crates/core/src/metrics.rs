//! Reductions of simulation results: residual-energy profiles, queue traces
//! and a finite-horizon stability verdict.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::energy::MbsId;
use crate::sim::{SimResult, Snapshot};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Charger,
    Mbs,
}

/// Residual energies as percentages of capacity, ascending, with the
/// population mean and standard deviation in percentage points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualProfile {
    pub values: Vec<f64>,
    pub mean: f64,
    pub stddev: f64,
}

impl ResidualProfile {
    /// Builds a profile from `(residual, capacity)` pairs.
    pub fn from_energies(entries: impl IntoIterator<Item = (f64, f64)>) -> Option<Self> {
        let mut values: Vec<f64> = entries.into_iter().map(|(e, cap)| 100.0 * e / cap).collect();
        if values.is_empty() {
            return None;
        }
        values.sort_by(f64::total_cmp);
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Some(ResidualProfile {
            values,
            mean,
            stddev: libm::sqrt(var),
        })
    }
}

/// Residual profile of one role at the end of a snapshot.
pub fn residual_stats(snapshot: &Snapshot, role: Role) -> Result<ResidualProfile> {
    let profile = match role {
        Role::Charger => ResidualProfile::from_energies(snapshot.chargers.iter().map(|c| (c.after, c.capacity))),
        Role::Mbs => ResidualProfile::from_energies(snapshot.mbs.iter().map(|m| (m.after, m.capacity))),
    };
    profile.ok_or(Error::EmptyRole(match role {
        Role::Charger => "charger",
        Role::Mbs => "mbs",
    }))
}

/// `(slot, backlog)` series of one MBS drone's queue, in bits.
pub fn queue_trace(result: &SimResult, mbs: MbsId) -> Result<Vec<(u64, f64)>> {
    let trace = result
        .traces
        .iter()
        .find(|t| t.mbs == mbs)
        .ok_or(Error::UnknownId(mbs.0))?;
    Ok(trace.slots.iter().map(|r| (r.slot, r.backlog)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityConfig {
    /// Fraction of the trace in each compared window.
    pub window: f64,
    /// Ratio above which a trace counts as diverging.
    pub threshold: f64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            window: 0.25,
            threshold: 1.10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Stable,
    Diverging,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub verdict: Stability,
    /// Mean of the last window over the mean of the window before it.
    pub ratio: f64,
}

pub const MIN_TRACE_LEN: usize = 8;

/// Compares the mean backlog of the last window with the preceding one.
/// A zero-over-zero ratio counts as 1.
pub fn stability_verdict(trace: &[f64], cfg: &StabilityConfig) -> Result<StabilityVerdict> {
    if trace.len() < MIN_TRACE_LEN {
        return Err(Error::TraceTooShort {
            len: trace.len(),
            min: MIN_TRACE_LEN,
        });
    }
    if !(cfg.window > 0.0 && cfg.window <= 0.5) {
        return Err(Error::param("window", cfg.window, "0 < window <= 0.5"));
    }
    let w = ((trace.len() as f64 * cfg.window) as usize).max(1);
    let n = trace.len();
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let last = mean(&trace[n - w..]);
    let before = mean(&trace[n - 2 * w..n - w]);
    let ratio = if before == 0.0 {
        if last == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        last / before
    };
    let verdict = if ratio > cfg.threshold {
        Stability::Diverging
    } else {
        Stability::Stable
    };
    Ok(StabilityVerdict { verdict, ratio })
}
