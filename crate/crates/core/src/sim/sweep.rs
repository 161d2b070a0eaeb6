use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::{run, Coverage, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mbs_count: u32,
    pub coverage: Coverage,
}

/// Coverage time against the number of MBS drones. Each run keeps the first
/// `count` MBS drones of `base` and everything else unchanged, including the
/// seed, so larger rosters extend smaller ones.
pub fn sweep_mbs_count(base: &Scenario, counts: &[u32]) -> Result<Vec<SweepRow>> {
    if counts.is_empty() {
        return Err(Error::Config("no MBS counts to sweep".into()));
    }
    if counts.contains(&0) {
        return Err(Error::param("mbs_count", 0.0, "positive counts"));
    }
    if counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("MBS counts must be strictly ascending".into()));
    }
    let largest = *counts.last().expect("non-empty") as usize;
    if largest > base.mbs.len() {
        return Err(Error::Config(alloc::format!(
            "sweep needs {largest} MBS drones but the roster has {}",
            base.mbs.len()
        )));
    }
    counts
        .iter()
        .map(|&n| {
            let scenario = Scenario {
                mbs: base.mbs[..n as usize].to_vec(),
                ..base.clone()
            };
            Ok(SweepRow {
                mbs_count: n,
                coverage: run(&scenario)?.coverage,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Preset;

    #[test]
    fn rejects_bad_counts() {
        let base = Preset::CoverageSweep.scenario(1);
        assert!(sweep_mbs_count(&base, &[]).is_err());
        assert!(sweep_mbs_count(&base, &[0, 1]).is_err());
        assert!(sweep_mbs_count(&base, &[2, 2]).is_err());
        assert!(sweep_mbs_count(&base, &[3, 1]).is_err());
        assert!(sweep_mbs_count(&base, &[1, 51]).is_err());
    }

    #[test]
    fn single_count_single_row() {
        let mut base = Preset::CoverageSweep.scenario(1);
        base.horizon = 3;
        let rows = sweep_mbs_count(&base, &[1]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mbs_count, 1);
    }
}
