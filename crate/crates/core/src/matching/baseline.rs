use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{ChargerDrone, MbsDrone, TimingConfig, Tower};

use super::stage1::nearest_free_tower;
use super::stage2::stage2_weights;
use super::{allocate_transfers, Stage1Assignment, Stage2Assignment, Stage2Mode, Stage2Params};

/// Reference strategies the proposed matchings are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    /// A random feasible assignment.
    Random,
    /// Serves drones in ascending residual-energy order.
    GreedyBest,
    /// Serves drones in descending residual-energy order.
    GreedyWorst,
}

fn fraction(residual: f64, capacity: f64) -> f64 {
    residual / capacity
}

/// Stage-1 baseline. Every charger is eligible, full or not.
///
/// `Random` samples uniformly among all feasible assignments, partial ones
/// included. The greedy strategies fill plates in residual order (ties by
/// charger id), each charger taking the nearest tower with a free plate.
pub fn baseline_stage1(
    strategy: Baseline,
    towers: &[Tower],
    chargers: &[ChargerDrone],
    rng: &mut ChaCha8Rng,
) -> Stage1Assignment {
    let mut out = Stage1Assignment::default();
    let mut free: Vec<u32> = towers.iter().map(|t| t.plates).collect();
    match strategy {
        Baseline::Random => {
            for (j, c) in chargers.iter().enumerate() {
                let remaining = chargers.len() - j - 1;
                let total = count_assignments(remaining + 1, &free);
                let mut pick = rng.gen::<f64>() * total;
                pick -= count_assignments(remaining, &free);
                if pick < 0.0 {
                    continue;
                }
                let mut chosen = None;
                for k in 0..towers.len() {
                    if free[k] == 0 {
                        continue;
                    }
                    free[k] -= 1;
                    pick -= count_assignments(remaining, &free);
                    free[k] += 1;
                    chosen = Some(k);
                    if pick < 0.0 {
                        break;
                    }
                }
                // rounding can only leave the last open tower
                if let Some(k) = chosen {
                    free[k] -= 1;
                    out.pairs.push((towers[k].id, c.id));
                    out.objective += c.deficit();
                }
            }
        }
        Baseline::GreedyBest | Baseline::GreedyWorst => {
            let mut order: Vec<&ChargerDrone> = chargers.iter().collect();
            order.sort_by(|a, b| {
                let fa = fraction(a.residual, a.capacity);
                let fb = fraction(b.residual, b.capacity);
                let by = if strategy == Baseline::GreedyBest {
                    fa.total_cmp(&fb)
                } else {
                    fb.total_cmp(&fa)
                };
                by.then(a.id.cmp(&b.id))
            });
            for c in order {
                let Some(k) = nearest_free_tower(towers, &free, c) else {
                    break;
                };
                free[k] -= 1;
                out.pairs.push((towers[k].id, c.id));
                out.objective += c.deficit();
            }
        }
    }
    out
}

/// Number of ways to give `chargers` distinguishable chargers at most one
/// tower each, with `free[k]` plates left on tower `k`:
/// `Σ_s r!/(r−s)! · [x^s] Π_k Σ_{a ≤ free_k} x^a / a!`.
fn count_assignments(chargers: usize, free: &[u32]) -> f64 {
    let mut poly = vec![1.0];
    for &f in free {
        let mut term = vec![1.0; f as usize + 1];
        for a in 1..term.len() {
            term[a] = term[a - 1] / a as f64;
        }
        let mut next = vec![0.0; poly.len() + term.len() - 1];
        for (i, p) in poly.iter().enumerate() {
            for (a, t) in term.iter().enumerate() {
                next[i + a] += p * t;
            }
        }
        poly = next;
    }
    let mut total = 0.0;
    let mut falling = 1.0;
    for (s, p) in poly.iter().enumerate().take(chargers + 1) {
        if s > 0 {
            falling *= (chargers - s + 1) as f64;
        }
        total += falling * p;
    }
    total
}

/// Stage-2 baseline over the feasible pairs; transfers always follow
/// [`allocate_transfers`].
///
/// `Random` visits chargers in shuffled order and each picks uniformly among
/// staying idle and the feasible MBS drones with a free plate. The greedy
/// strategies visit live MBS drones in residual order (ties by id) and fill
/// each one's plates with the still-unassigned feasible chargers in id order.
pub fn baseline_stage2(
    strategy: Baseline,
    chargers: &[ChargerDrone],
    mbs_list: &[MbsDrone],
    timing: &TimingConfig,
    params: &Stage2Params,
    rng: &mut ChaCha8Rng,
) -> Stage2Assignment {
    let weights = stage2_weights(chargers, mbs_list, timing, params);
    let slot = |id| {
        mbs_list
            .iter()
            .position(|m: &MbsDrone| m.id == id)
            .expect("weighted pair")
    };
    let mut free: Vec<u32> = mbs_list.iter().map(|m| m.plates).collect();
    let mut chosen = Vec::new();
    match strategy {
        Baseline::Random => {
            let mut order: Vec<&ChargerDrone> = chargers.iter().collect();
            order.shuffle(rng);
            for c in order {
                let options: Vec<_> = weights
                    .iter()
                    .filter(|w| w.charger == c.id && free[slot(w.mbs)] > 0)
                    .collect();
                let pick = rng.gen_range(0..=options.len());
                if let Some(w) = options.get(pick) {
                    free[slot(w.mbs)] -= 1;
                    chosen.push(**w);
                }
            }
        }
        Baseline::GreedyBest | Baseline::GreedyWorst => {
            let mut order: Vec<&MbsDrone> = mbs_list.iter().filter(|m| !m.dropped).collect();
            order.sort_by(|a, b| {
                let fa = fraction(a.residual, a.capacity);
                let fb = fraction(b.residual, b.capacity);
                let by = if strategy == Baseline::GreedyBest {
                    fa.total_cmp(&fb)
                } else {
                    fb.total_cmp(&fa)
                };
                by.then(a.id.cmp(&b.id))
            });
            let mut used = vec![false; chargers.len()];
            for m in order {
                let mut room = m.plates;
                for (j, c) in chargers.iter().enumerate() {
                    if room == 0 {
                        break;
                    }
                    if used[j] {
                        continue;
                    }
                    if let Some(w) = weights.iter().find(|w| w.mbs == m.id && w.charger == c.id) {
                        used[j] = true;
                        room -= 1;
                        chosen.push(*w);
                    }
                }
            }
        }
    }
    let objective = chosen.iter().map(|w| w.value).sum();
    let matched: Vec<_> = chosen.iter().map(|w| (w.mbs, w.charger)).collect();
    Stage2Assignment {
        pairs: allocate_transfers(&matched, chargers, mbs_list, timing, params),
        objective,
        mode: Stage2Mode::Allocate,
    }
}
