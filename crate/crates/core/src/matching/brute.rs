use alloc::vec;
use alloc::vec::Vec;

use crate::energy::{ChargerDrone, MbsDrone, TimingConfig, Tower};
use crate::{Error, Result};

use super::stage2::{finish, stage2_weights};
use super::{PairValue, Stage1Assignment, Stage2Assignment, Stage2Mode, Stage2Params};

pub const STAGE1_MAX_CHARGERS: usize = 8;
pub const STAGE1_MAX_PLATES: usize = 8;
pub const STAGE2_MAX_CHARGERS: usize = 5;
pub const STAGE2_MAX_MBS: usize = 4;

fn guard(what: &'static str, size: usize, limit: usize) -> Result<()> {
    if size > limit {
        return Err(Error::InstanceTooLarge { what, size, limit });
    }
    Ok(())
}

/// Exhaustive stage-1 optimum: every charger either stays idle or takes any
/// tower with a free plate.
pub fn stage1_brute_force(towers: &[Tower], chargers: &[ChargerDrone]) -> Result<Stage1Assignment> {
    guard("chargers", chargers.len(), STAGE1_MAX_CHARGERS)?;
    let plates: usize = towers.iter().map(|t| t.plates as usize).sum();
    guard("plates", plates, STAGE1_MAX_PLATES)?;

    struct Search<'a> {
        towers: &'a [Tower],
        chargers: &'a [ChargerDrone],
        free: Vec<u32>,
        current: Vec<Option<usize>>,
        best: Option<(f64, Vec<Option<usize>>)>,
    }

    fn visit(s: &mut Search<'_>, j: usize, total: f64) {
        if j == s.chargers.len() {
            if s.best.as_ref().is_none_or(|b| total > b.0) {
                s.best = Some((total, s.current.clone()));
            }
            return;
        }
        s.current[j] = None;
        visit(s, j + 1, total);
        for k in 0..s.towers.len() {
            if s.free[k] > 0 {
                s.free[k] -= 1;
                s.current[j] = Some(k);
                visit(s, j + 1, total + s.chargers[j].deficit());
                s.current[j] = None;
                s.free[k] += 1;
            }
        }
    }

    let mut s = Search {
        towers,
        chargers,
        free: towers.iter().map(|t| t.plates).collect(),
        current: vec![None; chargers.len()],
        best: None,
    };
    visit(&mut s, 0, 0.0);
    let (objective, choice) = s.best.expect("the empty assignment is always visited");
    let pairs = choice
        .iter()
        .enumerate()
        .filter_map(|(j, k)| k.map(|k| (towers[k].id, chargers[j].id)))
        .collect();
    Ok(Stage1Assignment { pairs, objective })
}

/// Exhaustive stage-2 optimum over every matching that respects the plate
/// counts and one MBS drone per charger, restricted to feasible pairs. The
/// mode's transfer rule is applied to the best matching.
pub fn stage2_brute_force(
    chargers: &[ChargerDrone],
    mbs_list: &[MbsDrone],
    timing: &TimingConfig,
    mode: Stage2Mode,
    params: &Stage2Params,
) -> Result<Stage2Assignment> {
    guard("chargers", chargers.len(), STAGE2_MAX_CHARGERS)?;
    guard("mbs drones", mbs_list.len(), STAGE2_MAX_MBS)?;

    let weights = stage2_weights(chargers, mbs_list, timing, params);
    let options: Vec<Vec<(usize, PairValue)>> = chargers
        .iter()
        .map(|c| {
            weights
                .iter()
                .filter(|w| w.charger == c.id)
                .map(|w| (mbs_list.iter().position(|m| m.id == w.mbs).expect("weighted pair"), *w))
                .collect()
        })
        .collect();

    struct Search<'a> {
        options: &'a [Vec<(usize, PairValue)>],
        free: Vec<u32>,
        current: Vec<PairValue>,
        best: (f64, Vec<PairValue>),
    }

    fn visit(s: &mut Search<'_>, j: usize, total: f64) {
        if j == s.options.len() {
            if total > s.best.0 {
                s.best = (total, s.current.clone());
            }
            return;
        }
        visit(s, j + 1, total);
        for &(i, w) in &s.options[j] {
            if s.free[i] > 0 {
                s.free[i] -= 1;
                s.current.push(w);
                visit(s, j + 1, total + w.value);
                s.current.pop();
                s.free[i] += 1;
            }
        }
    }

    let mut s = Search {
        options: &options,
        free: mbs_list.iter().map(|m| m.plates).collect(),
        current: Vec::new(),
        best: (0.0, Vec::new()),
    };
    visit(&mut s, 0, 0.0);
    let mut chosen = s.best.1;
    chosen.sort_by_key(|p| (p.mbs, p.charger));
    Ok(finish(chosen, chargers, mbs_list, timing, mode, params))
}
