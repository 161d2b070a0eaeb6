use crate::energy::{distance, travel_energy, ChargerDrone, MbsDrone};
use crate::{Error, Result};

use super::PairValue;

/// Value of charger `charger` serving `mbs` while handing over `transfer`
/// joules:
///
/// ```text
/// v = max(u_m − d/s, 0) · η_c · η_m · (e_max / max(e_m, ε)) · (e_c − transfer)
/// ```
///
/// with `e_max = max(e_c − travel_energy, 0)`. A charger that cannot pay for
/// the flight, or cannot arrive within the phase, has value zero.
pub fn pair_value(
    charger: &ChargerDrone,
    mbs: &MbsDrone,
    mbs_phase: f64,
    transfer: f64,
    epsilon: f64,
) -> Result<PairValue> {
    if !(transfer >= 0.0) || transfer > charger.residual {
        return Err(Error::param("transfer", transfer, "0 <= transfer <= charger residual"));
    }
    let d = distance(charger.position, mbs.position);
    let travel = travel_energy(d, charger.speed, charger.move_power)?;
    let reachable = (charger.residual - travel).max(0.0);
    let window = (mbs_phase - d / charger.speed).max(0.0);
    let need = reachable / mbs.residual.max(epsilon);
    let value = (window * charger.efficiency * mbs.efficiency * need * (charger.residual - transfer)).max(0.0);
    Ok(PairValue {
        charger: charger.id,
        mbs: mbs.id,
        value,
        reachable_energy: reachable,
        feasible: value > 0.0,
    })
}

/// Eigenvalues `(larger, smaller)` of the symmetric matrix `[[a, b], [b, d]]`.
pub fn symmetric_eigenvalues_2x2(a: f64, b: f64, d: f64) -> (f64, f64) {
    let mid = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = libm::sqrt(half * half + b * b);
    (mid + r, mid - r)
}

/// Eigenvalue pairs of the Hessians of `v·x` and of the bilinear battery-room
/// constraint `e·η_c·η_m·x`, taken in the variables `(e, x)` for a single
/// charger and a single MBS drone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianWitness {
    pub objective: (f64, f64),
    pub constraint: (f64, f64),
}

impl HessianWitness {
    /// Both pairs have one strictly positive and one strictly negative value,
    /// so neither function is convex or concave.
    pub fn is_indefinite(&self) -> bool {
        let mixed = |(hi, lo): (f64, f64)| hi > 0.0 && lo < 0.0;
        mixed(self.objective) && mixed(self.constraint)
    }
}

pub fn hessian_eigenvalues(charger_efficiency: f64, mbs_efficiency: f64) -> HessianWitness {
    // d²(v·x)/de dx = −1 after normalizing the constant factors of v.
    let objective = symmetric_eigenvalues_2x2(0.0, -1.0, 0.0);
    let coupling = charger_efficiency * mbs_efficiency;
    let constraint = symmetric_eigenvalues_2x2(0.0, coupling, 0.0);
    HessianWitness { objective, constraint }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::energy::{ChargerId, MbsId, Position};

    pub(crate) fn charger(residual: f64, at: Position) -> ChargerDrone {
        ChargerDrone {
            id: ChargerId(0),
            position: at,
            capacity: 367_700.0,
            residual,
            speed: 20.0,
            efficiency: 0.81,
            move_power: 204.0,
        }
    }

    pub(crate) fn mbs(residual: f64, at: Position) -> MbsDrone {
        MbsDrone {
            id: MbsId(0),
            position: at,
            capacity: 367_700.0,
            residual,
            efficiency: 0.81,
            plates: 1,
            hover_power: 0.0,
            queue: Default::default(),
            dropped: false,
        }
    }

    #[test]
    fn worked_value() {
        let c = charger(50_000.0, Position::new(0.0, 0.0, 100.0));
        let m = mbs(10_000.0, Position::new(100.0, 0.0, 100.0));
        let v = pair_value(&c, &m, 60.0, 0.0, 1.0).unwrap();
        // 55 s · 0.6561 · (48_980 / 10_000) · 50_000
        let expected = 55.0 * 0.6561 * 4.898 * 50_000.0;
        assert_relative_eq!(v.value, expected, max_relative = 1e-12);
        assert_relative_eq!(v.value, 8.8372e6, max_relative = 1e-4);
        assert_relative_eq!(v.reachable_energy, 48_980.0);
        assert!(v.feasible);
    }

    #[test]
    fn full_transfer_has_no_value() {
        let c = charger(50_000.0, Position::new(0.0, 0.0, 100.0));
        let m = mbs(10_000.0, Position::new(100.0, 0.0, 100.0));
        let v = pair_value(&c, &m, 60.0, 50_000.0, 1.0).unwrap();
        assert_eq!(v.value, 0.0);
        assert!(!v.feasible);
    }

    #[test]
    fn unaffordable_flight_has_no_value() {
        let c = charger(1_000.0, Position::new(0.0, 0.0, 100.0));
        let m = mbs(10_000.0, Position::new(100.0, 0.0, 100.0));
        let v = pair_value(&c, &m, 60.0, 0.0, 1.0).unwrap();
        assert_eq!(v.reachable_energy, 0.0);
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn out_of_range_has_no_value() {
        let c = charger(300_000.0, Position::new(0.0, 0.0, 100.0));
        let m = mbs(10_000.0, Position::new(1_300.0, 0.0, 100.0));
        assert_eq!(pair_value(&c, &m, 60.0, 0.0, 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn transfer_bounds_checked() {
        let c = charger(50_000.0, Position::new(0.0, 0.0, 100.0));
        let m = mbs(10_000.0, Position::new(100.0, 0.0, 100.0));
        assert!(pair_value(&c, &m, 60.0, 50_001.0, 1.0).is_err());
        assert!(pair_value(&c, &m, 60.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn epsilon_clamps_empty_mbs() {
        let c = charger(50_000.0, Position::new(0.0, 0.0, 100.0));
        let m = mbs(0.0, Position::new(0.0, 0.0, 100.0));
        let v = pair_value(&c, &m, 60.0, 0.0, 1.0).unwrap();
        assert!(v.value.is_finite());
        assert_relative_eq!(v.value, 60.0 * 0.6561 * 50_000.0 * 50_000.0);
    }

    #[test]
    fn hessian_witness_values() {
        let w = hessian_eigenvalues(0.81, 0.81);
        assert_eq!(w.objective, (1.0, -1.0));
        assert!((w.constraint.0 - 0.6561).abs() < 1e-12);
        assert!((w.constraint.1 + 0.6561).abs() < 1e-12);
        assert!(w.is_indefinite());
        assert_eq!(hessian_eigenvalues(1.0, 1.0).constraint, (1.0, -1.0));
    }

    #[test]
    fn eigen_2x2_matches_trace_and_determinant() {
        let (hi, lo) = symmetric_eigenvalues_2x2(2.0, 1.0, 3.0);
        assert_relative_eq!(hi + lo, 5.0, max_relative = 1e-12);
        assert_relative_eq!(hi * lo, 5.0, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn value_monotone(ec in 5_000.0..360_000.0f64, em in 0.0..360_000.0f64,
                          d1 in 0.0..1_500.0f64, d2 in 0.0..1_500.0f64,
                          t1 in 0.0..1.0f64, t2 in 0.0..1.0f64, extra in 0.0..5_000.0f64) {
            let m = mbs(em, Position::new(0.0, 0.0, 100.0));
            let at = |d: f64| Position::new(d, 0.0, 100.0);
            let (near, far) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            let (lo_t, hi_t) = if t1 <= t2 { (t1 * ec, t2 * ec) } else { (t2 * ec, t1 * ec) };

            let v = |c: &ChargerDrone, t: f64| pair_value(c, &m, 60.0, t, 1.0).unwrap().value;
            let c_near = charger(ec, at(near));
            let c_far = charger(ec, at(far));
            prop_assert!(v(&c_near, lo_t) >= v(&c_near, hi_t));
            prop_assert!(v(&c_near, 0.0) >= v(&c_far, 0.0));
            let richer = charger(ec + extra, at(near));
            prop_assert!(v(&richer, 0.0) >= v(&c_near, 0.0));
            prop_assert!(v(&c_near, lo_t) >= 0.0);
        }

        #[test]
        fn witness_always_indefinite(a in 0.01..=1.0f64, b in 0.01..=1.0f64) {
            let w = hessian_eigenvalues(a, b);
            prop_assert!(w.is_indefinite());
            prop_assert!((w.constraint.0 - a * b).abs() < 1e-12);
            prop_assert!((w.constraint.1 + a * b).abs() < 1e-12);
        }
    }
}
