use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::energy::{distance, travel_energy, ChargerDrone, ChargerId, MbsDrone, MbsId, TimingConfig};

use super::{
    pair_value, LinearProgram, MinCostFlow, PairValue, Stage2Assignment, Stage2Mode, Stage2Pair, Stage2Params,
    Violation,
};

/// Zero-transfer values of every feasible (charger, live MBS) pair, in
/// `(mbs, charger)` order. Pairs with value zero are left out: they form the
/// complement of the feasible matching set.
pub fn stage2_weights(
    chargers: &[ChargerDrone],
    mbs_list: &[MbsDrone],
    timing: &TimingConfig,
    params: &Stage2Params,
) -> Vec<PairValue> {
    let mut out = Vec::new();
    for m in mbs_list.iter().filter(|m| !m.dropped) {
        for c in chargers {
            let pv = pair_value(c, m, timing.mbs_phase, 0.0, params.epsilon)
                .expect("zero transfer is always within the charger budget");
            if pv.feasible {
                out.push(pv);
            }
        }
    }
    out
}

/// Charger ↔ MBS matching in the requested mode. Dropped MBS drones never
/// take part.
pub fn stage2_match(
    chargers: &[ChargerDrone],
    mbs_list: &[MbsDrone],
    timing: &TimingConfig,
    mode: Stage2Mode,
    params: &Stage2Params,
) -> Stage2Assignment {
    let weights = stage2_weights(chargers, mbs_list, timing, params);
    if weights.is_empty() {
        return Stage2Assignment::empty(mode);
    }
    let chosen = match mode {
        Stage2Mode::Literal => literal_program(&weights, chargers, mbs_list, timing, params),
        Stage2Mode::Allocate => max_weight_matching(&weights, chargers, mbs_list),
    };
    finish(chosen, chargers, mbs_list, timing, mode, params)
}

/// Turns a set of matched pairs into an assignment with the mode's transfers.
pub(crate) fn finish(
    chosen: Vec<PairValue>,
    chargers: &[ChargerDrone],
    mbs_list: &[MbsDrone],
    timing: &TimingConfig,
    mode: Stage2Mode,
    params: &Stage2Params,
) -> Stage2Assignment {
    let objective = chosen.iter().map(|p| p.value).sum();
    let pairs = match mode {
        Stage2Mode::Literal => chosen
            .iter()
            .map(|p| Stage2Pair {
                mbs: p.mbs,
                charger: p.charger,
                transfer: 0.0,
            })
            .collect(),
        Stage2Mode::Allocate => {
            let matched: Vec<_> = chosen.iter().map(|p| (p.mbs, p.charger)).collect();
            allocate_transfers(&matched, chargers, mbs_list, timing, params)
        }
    };
    Stage2Assignment { pairs, objective, mode }
}

fn max_weight_matching(weights: &[PairValue], chargers: &[ChargerDrone], mbs_list: &[MbsDrone]) -> Vec<PairValue> {
    // nodes: source, chargers, MBS drones, sink
    let source = 0;
    let sink = 1 + chargers.len() + mbs_list.len();
    let mut g = MinCostFlow::new(sink + 1);
    let charger_node: BTreeMap<ChargerId, usize> = chargers.iter().enumerate().map(|(k, c)| (c.id, 1 + k)).collect();
    let mbs_node: BTreeMap<MbsId, usize> = mbs_list
        .iter()
        .enumerate()
        .map(|(k, m)| (m.id, 1 + chargers.len() + k))
        .collect();
    for c in chargers {
        g.add_edge(source, charger_node[&c.id], 1, 0.0);
    }
    for m in mbs_list.iter().filter(|m| !m.dropped) {
        g.add_edge(mbs_node[&m.id], sink, m.plates, 0.0);
    }
    let scale = weights.iter().fold(0.0f64, |s, p| s.max(p.value));
    let edges: Vec<usize> = weights
        .iter()
        .map(|p| g.add_edge(charger_node[&p.charger], mbs_node[&p.mbs], 1, -p.value / scale))
        .collect();
    g.min_cost_any_flow(source, sink, 1e-12);
    weights
        .iter()
        .zip(edges)
        .filter(|(_, e)| g.flow(*e) > 0)
        .map(|(p, _)| *p)
        .collect()
}

/// LP relaxation of the convexified program in the variables `x` (matching)
/// and `e` (transfers), followed by rounding of `x`.
///
/// Objective: the total pair value `Σ v(e)`, which only falls as transfers
/// grow, with the zero-transfer matching value `Σ w·x` as the secondary
/// criterion. Both are linear, and because any `x` remains feasible with
/// `e = 0`, maximizing `Σ w·x − Σ (∂v/∂e)·e` optimizes them
/// lexicographically. At `e = 0` the remaining constraints describe a
/// bipartite b-matching polytope, whose vertices are integral.
fn literal_program(
    weights: &[PairValue],
    chargers: &[ChargerDrone],
    mbs_list: &[MbsDrone],
    timing: &TimingConfig,
    params: &Stage2Params,
) -> Vec<PairValue> {
    let p = weights.len();
    let charger = |id: ChargerId| chargers.iter().find(|c| c.id == id).expect("weighted pair");
    let mbs = |id: MbsId| mbs_list.iter().find(|m| m.id == id).expect("weighted pair");

    // variables: x_p at p, e_p at p + n
    let mut objective = Vec::with_capacity(2 * p);
    objective.extend(weights.iter().map(|w| w.value));
    for w in weights {
        let c = charger(w.charger);
        let m = mbs(w.mbs);
        let d = distance(c.position, m.position);
        let window = (timing.mbs_phase - d / c.speed).max(0.0);
        let slope = window * c.efficiency * m.efficiency * w.reachable_energy / m.residual.max(params.epsilon);
        objective.push(-slope);
    }
    let mut lp = LinearProgram::new(objective);
    for (k, w) in weights.iter().enumerate() {
        let c = charger(w.charger);
        let m = mbs(w.mbs);
        // no energy without a match: η·e ≤ room·x
        lp.add_le(
            alloc::vec![(p + k, c.efficiency * m.efficiency), (k, -m.deficit())],
            0.0,
        );
    }
    for m in mbs_list.iter().filter(|m| !m.dropped) {
        let pairs: Vec<usize> = (0..p).filter(|&k| weights[k].mbs == m.id).collect();
        if pairs.is_empty() {
            continue;
        }
        lp.add_le(
            pairs
                .iter()
                .map(|&k| (p + k, charger(weights[k].charger).efficiency * m.efficiency))
                .collect(),
            m.deficit(),
        );
        lp.add_le(pairs.iter().map(|&k| (k, 1.0)).collect(), f64::from(m.plates));
    }
    for c in chargers {
        let pairs: Vec<usize> = (0..p).filter(|&k| weights[k].charger == c.id).collect();
        if pairs.is_empty() {
            continue;
        }
        lp.add_le(pairs.iter().map(|&k| (k, 1.0)).collect(), 1.0);
        lp.add_le(pairs.iter().map(|&k| (p + k, 1.0)).collect(), c.residual);
    }

    let solution = lp.solve().expect("bounded, feasible at the origin");
    let mut chosen: Vec<(f64, PairValue)> = weights
        .iter()
        .enumerate()
        .filter(|(k, _)| solution.x[*k] > 0.5)
        .map(|(k, w)| (solution.x[k], *w))
        .collect();
    repair(&mut chosen, chargers, mbs_list);
    chosen.into_iter().map(|(_, w)| w).collect()
}

/// Drops the least valuable rounded pairs until plate and uniqueness
/// constraints hold. A no-op whenever the relaxation returned a vertex.
fn repair(chosen: &mut Vec<(f64, PairValue)>, chargers: &[ChargerDrone], mbs_list: &[MbsDrone]) {
    chosen.sort_by(|a, b| b.1.value.total_cmp(&a.1.value));
    let mut used = BTreeMap::<ChargerId, ()>::new();
    let mut load = BTreeMap::<MbsId, u32>::new();
    chosen.retain(|(_, w)| {
        let plates = mbs_list.iter().find(|m| m.id == w.mbs).map_or(0, |m| m.plates);
        let l = load.entry(w.mbs).or_default();
        if used.contains_key(&w.charger) || *l >= plates || !chargers.iter().any(|c| c.id == w.charger) {
            return false;
        }
        used.insert(w.charger, ());
        *l += 1;
        true
    });
    chosen.sort_by_key(|p| (p.1.mbs, p.1.charger));
}

/// Sets the energy each matched charger hands over.
///
/// Per MBS drone, pairs are filled in descending value order (ties by
/// charger id). Each transfer is the smallest of: the charger energy left
/// after the flight, the remaining battery room divided by the link
/// efficiency, and the charge-power cap times the time left in the phase.
pub fn allocate_transfers(
    matching: &[(MbsId, ChargerId)],
    chargers: &[ChargerDrone],
    mbs_list: &[MbsDrone],
    timing: &TimingConfig,
    params: &Stage2Params,
) -> Vec<Stage2Pair> {
    let mut by_mbs: BTreeMap<MbsId, Vec<(f64, &ChargerDrone)>> = BTreeMap::new();
    for &(mid, cid) in matching {
        let (Some(m), Some(c)) = (
            mbs_list.iter().find(|m| m.id == mid),
            chargers.iter().find(|c| c.id == cid),
        ) else {
            continue;
        };
        let w = pair_value(c, m, timing.mbs_phase, 0.0, params.epsilon).map_or(0.0, |v| v.value);
        by_mbs.entry(mid).or_default().push((w, c));
    }

    let mut out = Vec::with_capacity(matching.len());
    for (mid, mut group) in by_mbs {
        let m = mbs_list.iter().find(|m| m.id == mid).expect("grouped from list");
        group.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.id.cmp(&b.1.id)));
        let mut room = m.deficit();
        for (_, c) in group {
            let d = distance(c.position, m.position);
            let travel = travel_energy(d, c.speed, c.move_power).unwrap_or(f64::INFINITY);
            let link = c.efficiency * m.efficiency;
            let window = (timing.mbs_phase - d / c.speed).max(0.0);
            let transfer = (c.residual - travel)
                .min(room / link)
                .min(params.charge_power_cap * window)
                .max(0.0);
            room = (room - transfer * link).max(0.0);
            out.push(Stage2Pair {
                mbs: mid,
                charger: c.id,
                transfer,
            });
        }
    }
    out
}

/// Verifies plate counts, one MBS drone per charger, membership in the
/// feasible set, non-negative transfers, the charger energy budgets and the
/// MBS battery room, with a relative slack of `1e-9` on energy sums.
pub fn check_stage2(
    assignment: &Stage2Assignment,
    chargers: &[ChargerDrone],
    mbs_list: &[MbsDrone],
    timing: &TimingConfig,
    params: &Stage2Params,
) -> Result<(), Violation> {
    let mut sent: BTreeMap<ChargerId, f64> = BTreeMap::new();
    let mut received: BTreeMap<MbsId, (usize, f64)> = BTreeMap::new();
    for p in &assignment.pairs {
        let c = chargers
            .iter()
            .find(|c| c.id == p.charger)
            .ok_or_else(|| Violation::Unknown(format!("{}", p.charger)))?;
        let m = mbs_list
            .iter()
            .find(|m| m.id == p.mbs)
            .ok_or_else(|| Violation::Unknown(format!("{}", p.mbs)))?;
        let feasible = !m.dropped && pair_value(c, m, timing.mbs_phase, 0.0, params.epsilon).is_ok_and(|v| v.feasible);
        if !feasible {
            return Err(Violation::Infeasible {
                mbs: p.mbs,
                charger: p.charger,
            });
        }
        if !(p.transfer >= 0.0) {
            return Err(Violation::NegativeTransfer {
                mbs: p.mbs,
                charger: p.charger,
                transfer: p.transfer,
            });
        }
        if sent.insert(c.id, p.transfer).is_some() {
            return Err(Violation::ChargerReused(c.id));
        }
        let r = received.entry(m.id).or_default();
        r.0 += 1;
        r.1 += p.transfer * c.efficiency * m.efficiency;
    }
    for c in chargers {
        let s = sent.get(&c.id).copied().unwrap_or(0.0);
        if s > c.residual * (1.0 + 1e-9) {
            return Err(Violation::ChargerBudget(c.id, s, c.residual));
        }
    }
    for m in mbs_list {
        let (count, energy) = received.get(&m.id).copied().unwrap_or((0, 0.0));
        if count > m.plates as usize {
            return Err(Violation::PlatesExceeded {
                who: format!("{}", m.id),
                count,
                plates: m.plates,
            });
        }
        if energy > m.deficit() + 1e-9 * m.capacity {
            return Err(Violation::MbsRoom(m.id, energy, m.deficit()));
        }
    }
    Ok(())
}
