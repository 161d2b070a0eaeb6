use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::energy::{distance, ChargerDrone, Tower, TowerId};

use super::{Stage1Assignment, Violation};

/// Optimal tower ↔ charger matching.
///
/// The objective weight `E − e` of a charger does not depend on the tower,
/// so the program reduces to a uniform matroid: the best assignment serves
/// the chargers with the largest deficits, as many as there are plates.
/// Ties go to the lower charger id; each chosen charger then takes the
/// nearest tower with a free plate, which maximizes the energy it actually
/// receives. Full chargers are never matched.
pub fn stage1_match(towers: &[Tower], chargers: &[ChargerDrone]) -> Stage1Assignment {
    let mut order: Vec<&ChargerDrone> = chargers.iter().filter(|c| c.deficit() > 0.0).collect();
    order.sort_by(|a, b| b.deficit().total_cmp(&a.deficit()).then(a.id.cmp(&b.id)));

    let mut free: Vec<u32> = towers.iter().map(|t| t.plates).collect();
    let mut out = Stage1Assignment::default();
    for c in order {
        let Some(k) = nearest_free_tower(towers, &free, c) else {
            break;
        };
        free[k] -= 1;
        out.pairs.push((towers[k].id, c.id));
        out.objective += c.deficit();
    }
    out
}

pub(crate) fn nearest_free_tower(towers: &[Tower], free: &[u32], charger: &ChargerDrone) -> Option<usize> {
    towers
        .iter()
        .enumerate()
        .filter(|(k, _)| free[*k] > 0)
        .min_by(|(_, a), (_, b)| {
            distance(a.position, charger.position)
                .total_cmp(&distance(b.position, charger.position))
                .then(a.id.cmp(&b.id))
        })
        .map(|(k, _)| k)
}

/// Checks the plate and uniqueness constraints, and that every id exists.
pub fn check_stage1(
    assignment: &Stage1Assignment,
    towers: &[Tower],
    chargers: &[ChargerDrone],
) -> Result<(), Violation> {
    let mut per_tower: BTreeMap<TowerId, usize> = BTreeMap::new();
    let mut seen = Vec::new();
    for &(k, j) in &assignment.pairs {
        if !towers.iter().any(|t| t.id == k) {
            return Err(Violation::Unknown(format!("{k}")));
        }
        if !chargers.iter().any(|c| c.id == j) {
            return Err(Violation::Unknown(format!("{j}")));
        }
        if seen.contains(&j) {
            return Err(Violation::ChargerReused(j));
        }
        seen.push(j);
        *per_tower.entry(k).or_default() += 1;
    }
    for t in towers {
        let count = per_tower.get(&t.id).copied().unwrap_or(0);
        if count > t.plates as usize {
            return Err(Violation::PlatesExceeded {
                who: format!("{}", t.id),
                count,
                plates: t.plates,
            });
        }
    }
    Ok(())
}
