//! Fast solvers against exhaustive search on small seeded instances.

use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use uavcharge_core::energy::{ChargerDrone, ChargerId, MbsDrone, MbsId, Position, TimingConfig, Tower, TowerId};
use uavcharge_core::matching::{
    check_stage1, check_stage2, hessian_eigenvalues, stage1_brute_force, stage1_match, stage2_brute_force,
    stage2_match, Stage1Assignment, Stage2Assignment, Stage2Mode, Stage2Params, STAGE1_MAX_CHARGERS, STAGE1_MAX_PLATES,
    STAGE2_MAX_CHARGERS, STAGE2_MAX_MBS,
};
use uavcharge_core::rng::{stream, Stream};

use crate::config::ConfigError;

pub type Stage1Solver = fn(&[Tower], &[ChargerDrone]) -> Stage1Assignment;
pub type Stage2Solver = fn(&[ChargerDrone], &[MbsDrone], &TimingConfig, Stage2Mode, &Stage2Params) -> Stage2Assignment;

/// Solvers under test.
#[derive(Clone, Copy)]
pub struct Solvers {
    pub stage1: Stage1Solver,
    pub stage2: Stage2Solver,
}

impl Default for Solvers {
    fn default() -> Self {
        Solvers {
            stage1: stage1_match,
            stage2: stage2_match,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBounds {
    pub instances: u64,
    pub seed: u64,
    pub max_towers: u32,
    pub max_plates: u32,
    pub max_chargers: u32,
    pub max_mbs: u32,
    pub max_mbs_plates: u32,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds {
            instances: 200,
            seed: 0,
            max_towers: 2,
            max_plates: 3,
            max_chargers: 5,
            max_mbs: 4,
            max_mbs_plates: 2,
        }
    }
}

impl OracleBounds {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let too_large = |what: &'static str, size: u32, limit: usize| {
            Err(ConfigError::Invalid(uavcharge_core::Error::InstanceTooLarge {
                what,
                size: size as usize,
                limit,
            }))
        };
        if self.max_chargers as usize > STAGE1_MAX_CHARGERS.min(STAGE2_MAX_CHARGERS) {
            return too_large(
                "chargers",
                self.max_chargers,
                STAGE1_MAX_CHARGERS.min(STAGE2_MAX_CHARGERS),
            );
        }
        if (self.max_towers * self.max_plates) as usize > STAGE1_MAX_PLATES {
            return too_large("tower plates", self.max_towers * self.max_plates, STAGE1_MAX_PLATES);
        }
        if self.max_mbs as usize > STAGE2_MAX_MBS {
            return too_large("MBS drones", self.max_mbs, STAGE2_MAX_MBS);
        }
        if self.instances == 0 || self.max_towers == 0 || self.max_plates == 0 || self.max_mbs_plates == 0 {
            return Err(ConfigError::Inconsistent(
                "oracle bounds need at least one instance, tower, plate and MBS plate".into(),
            ));
        }
        Ok(())
    }
}

const CAPACITY: f64 = 367_696.8;

fn residual(rng: &mut ChaCha8Rng) -> f64 {
    // coarse levels so that ties and full batteries occur
    match rng.gen_range(0..10) {
        0 => CAPACITY,
        1 => 0.0,
        2..=4 => CAPACITY * f64::from(rng.gen_range(1..10)) / 10.0,
        _ => rng.gen_range(0.0..CAPACITY),
    }
}

fn charger(rng: &mut ChaCha8Rng, id: u32, scale: f64) -> ChargerDrone {
    ChargerDrone {
        id: ChargerId(id),
        position: Position::new(
            rng.gen_range(0.0..1299.0) * scale,
            rng.gen_range(0.0..750.0) * scale,
            100.0,
        ),
        capacity: CAPACITY,
        residual: residual(rng),
        speed: 20.0,
        efficiency: rng.gen_range(0.5..=1.0),
        move_power: 204.0,
    }
}

pub fn stage1_instance(b: &OracleBounds, k: u64) -> (Vec<Tower>, Vec<ChargerDrone>) {
    let mut rng = stream(b.seed.wrapping_add(k), Stream::Instance, 1);
    let towers = (0..rng.gen_range(1..=b.max_towers))
        .map(|t| Tower {
            id: TowerId(t),
            position: Position::new(rng.gen_range(0.0..1299.0), rng.gen_range(0.0..750.0), 0.0),
            plates: rng.gen_range(1..=b.max_plates),
            charge_power: 100.0,
            efficiency: 0.81,
        })
        .collect();
    let chargers = (0..rng.gen_range(0..=b.max_chargers))
        .map(|j| charger(&mut rng, j, 1.0))
        .collect();
    (towers, chargers)
}

pub fn stage2_instance(b: &OracleBounds, k: u64) -> (Vec<ChargerDrone>, Vec<MbsDrone>) {
    let mut rng = stream(b.seed.wrapping_add(k), Stream::Instance, 2);
    // a reduced map keeps most pairs within reach
    let chargers = (0..rng.gen_range(0..=b.max_chargers))
        .map(|j| charger(&mut rng, j, 0.6))
        .collect();
    let mbs = (0..rng.gen_range(0..=b.max_mbs))
        .map(|i| {
            let position = Position::new(rng.gen_range(0.0..1299.0) * 0.6, rng.gen_range(0.0..750.0) * 0.6, 100.0);
            let residual = residual(&mut rng);
            MbsDrone {
                id: MbsId(i),
                position,
                capacity: CAPACITY,
                residual,
                efficiency: rng.gen_range(0.5..=1.0),
                plates: rng.gen_range(1..=b.max_mbs_plates),
                hover_power: 204.0,
                queue: Default::default(),
                dropped: residual == 0.0 && rng.gen_bool(0.5),
            }
        })
        .collect();
    (chargers, mbs)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub label: &'static str,
    pub matched: u64,
    pub total: u64,
    /// First few failing instances with a reason.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub checks: Vec<CheckResult>,
    pub eigen_objective: (f64, f64),
    pub eigen_constraint: (f64, f64),
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.matched == c.total)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(out, "{}: {}/{} match", c.label, c.matched, c.total);
            for f in &c.failures {
                let _ = writeln!(out, "  {f}");
            }
        }
        let (o1, o2) = self.eigen_objective;
        let (c1, c2) = self.eigen_constraint;
        let _ = writeln!(
            out,
            "hessian eigenvalues at eta_c=0.81, eta_m=0.81: objective {o1:+.4}/{o2:+.4}, constraint ±{:.4} ({c1:+.4}/{c2:+.4})",
            c1.abs().max(c2.abs())
        );
        out
    }
}

const SHOWN_FAILURES: usize = 5;

fn tally(label: &'static str, total: u64, mut check: impl FnMut(u64) -> Result<(), String>) -> CheckResult {
    let mut matched = 0;
    let mut failures = Vec::new();
    for k in 0..total {
        match check(k) {
            Ok(()) => matched += 1,
            Err(why) if failures.len() < SHOWN_FAILURES => failures.push(format!("instance {k}: {why}")),
            Err(_) => {}
        }
    }
    CheckResult {
        label,
        matched,
        total,
        failures,
    }
}

pub fn run_oracle(bounds: &OracleBounds, solvers: &Solvers) -> Result<OracleReport, ConfigError> {
    bounds.validate()?;
    let timing = TimingConfig::default();
    let params = Stage2Params::default();
    let mut checks = vec![tally("stage 1", bounds.instances, |k| {
        let (towers, chargers) = stage1_instance(bounds, k);
        let fast = (solvers.stage1)(&towers, &chargers);
        check_stage1(&fast, &towers, &chargers).map_err(|v| v.to_string())?;
        let slow = stage1_brute_force(&towers, &chargers).map_err(|e| e.to_string())?;
        if close(fast.objective, slow.objective) {
            Ok(())
        } else {
            Err(format!("objective {} vs exhaustive {}", fast.objective, slow.objective))
        }
    })];
    for (label, mode) in [
        ("stage 2 (literal)", Stage2Mode::Literal),
        ("stage 2 (allocate)", Stage2Mode::Allocate),
    ] {
        checks.push(tally(label, bounds.instances, |k| {
            let (chargers, mbs) = stage2_instance(bounds, k);
            let fast = (solvers.stage2)(&chargers, &mbs, &timing, mode, &params);
            check_stage2(&fast, &chargers, &mbs, &timing, &params).map_err(|v| v.to_string())?;
            let slow = stage2_brute_force(&chargers, &mbs, &timing, mode, &params).map_err(|e| e.to_string())?;
            if close(fast.objective, slow.objective) {
                Ok(())
            } else {
                Err(format!("objective {} vs exhaustive {}", fast.objective, slow.objective))
            }
        }));
    }
    let h = hessian_eigenvalues(0.81, 0.81);
    Ok(OracleReport {
        checks,
        eigen_objective: h.objective,
        eigen_constraint: h.constraint,
    })
}
