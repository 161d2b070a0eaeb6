//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavcharge::artifact::Format;
use uavcharge::cli::{OutputArgs, ScenarioArgs};
use uavcharge::commands;
use uavcharge::config::{build, ScenarioFile};
use uavcharge::oracle::{run_oracle, OracleBounds, Solvers};
use uavcharge_core::matching::{hessian_eigenvalues, Stage2Mode};
use uavcharge_core::metrics::{residual_stats, stability_verdict, Role, Stability, StabilityConfig};
use uavcharge_core::powerctl::{
    dpp_decide, max_rate_threshold, simulate_queue, uniform_action_set, ArrivalModel, Channel, DppConfig, PowerAction,
    PowerPolicy,
};
use uavcharge_core::sim::{audit, run, sweep_mbs_count, Preset, Strategy};

const ORACLE_INSTANCES: u64 = 200;
const C1_LIMIT: Duration = Duration::from_secs(5);
const C2_LIMIT: Duration = Duration::from_secs(30);
const EIGEN_TOL: f64 = 1e-12;
const EIGEN_PAIRS: usize = 20;
const DOMINANCE_RUNS: u64 = 20;
const DOMINANCE_MIN_WINS: usize = 19;
const C4_LIMIT: Duration = Duration::from_secs(60);
const C5_LIMIT: Duration = Duration::from_secs(120);
const FULL_PCT_TOL: f64 = 1e-9;
const STARVED_FRACTION: f64 = 0.5;
const SWEEP_SEED: u64 = 7;
const SWEEP_MAX: u32 = 50;
const PLATEAU_SPREAD: u32 = 1;
const C7_LIMIT: Duration = Duration::from_secs(300);
const QUEUE_SLOTS: usize = 4000;
const QUEUE_SEED: u64 = 1;
const DIVERGING_RATIO: f64 = 1.10;
const PLATEAU_BAND: f64 = 0.10;
const C8_LIMIT: Duration = Duration::from_secs(60);
const DPP_CONFIGS: u64 = 100;
const AUDIT_TOL: f64 = 1e-6;
const C10_LIMIT: Duration = Duration::from_secs(10);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(limit: Duration, start: Instant) -> (bool, String) {
    let took = start.elapsed();
    (
        took < limit,
        format!("{:.2}s of {}s", took.as_secs_f64(), limit.as_secs()),
    )
}

fn oracle_stage1() -> Outcome {
    let start = Instant::now();
    let report = run_oracle(
        &OracleBounds {
            instances: ORACLE_INSTANCES,
            ..OracleBounds::default()
        },
        &Solvers::default(),
    )
    .expect("default bounds are valid");
    let c = &report.checks[0];
    let (fast, time) = within(C1_LIMIT, start);
    outcome(
        fast && c.matched == ORACLE_INSTANCES,
        format!("{}/{} match, {time}", c.matched, c.total),
    )
}

fn oracle_stage2() -> Outcome {
    let start = Instant::now();
    let bounds = OracleBounds {
        instances: ORACLE_INSTANCES,
        ..OracleBounds::default()
    };
    let report = run_oracle(&bounds, &Solvers::default()).expect("default bounds are valid");
    let (fast, time) = within(C2_LIMIT, start);
    let lines: Vec<String> = report.checks[1..]
        .iter()
        .map(|c| format!("{} {}/{}", c.label, c.matched, c.total))
        .collect();
    let all = report.checks[1..].iter().all(|c| c.matched == ORACLE_INSTANCES);
    outcome(fast && all, format!("{}, {time}", lines.join(", ")))
}

fn hessian_witness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for k in 0..=EIGEN_PAIRS {
        let (ec, em) = if k == 0 {
            (0.81, 0.81)
        } else {
            (rng.gen_range(0.01..=1.0), rng.gen_range(0.01..=1.0))
        };
        let h = hessian_eigenvalues(ec, em);
        let p = ec * em;
        for (got, want) in [
            (h.objective.0, 1.0),
            (h.objective.1, -1.0),
            (h.constraint.0, p),
            (h.constraint.1, -p),
        ] {
            worst = worst.max((got - want).abs());
        }
    }
    let at = hessian_eigenvalues(0.81, 0.81).constraint;
    let reference = (at.0 - 0.6561).abs().max((at.1 + 0.6561).abs());
    outcome(
        worst <= EIGEN_TOL && reference <= EIGEN_TOL,
        format!(
            "max error {worst:.1e}, constraint at 0.81 = ({:+.4}, {:+.4})",
            at.0, at.1
        ),
    )
}

fn final_profile(preset: Preset, seed: u64, stage1: Strategy, stage2: Strategy, role: Role) -> (f64, f64) {
    let mut s = preset.scenario(seed);
    s.stage1_strategy = stage1;
    s.stage2_strategy = stage2;
    let r = run(&s).expect("preset runs");
    let p = residual_stats(r.last(), role).expect("role present");
    (p.mean, p.stddev)
}

fn fairness_dominance() -> Outcome {
    let start = Instant::now();
    let mut wins = 0;
    let (mut gap_mean, mut gap_sd) = (0.0, 0.0);
    for seed in 0..DOMINANCE_RUNS {
        let p = final_profile(
            Preset::Stage1Fairness,
            seed,
            Strategy::Proposed,
            Strategy::Proposed,
            Role::Charger,
        );
        let r = final_profile(
            Preset::Stage1Fairness,
            seed,
            Strategy::Random,
            Strategy::Proposed,
            Role::Charger,
        );
        wins += usize::from(p.0 > r.0 && p.1 < r.1);
        gap_mean += (p.0 - r.0) / DOMINANCE_RUNS as f64;
        gap_sd += (r.1 - p.1) / DOMINANCE_RUNS as f64;
    }
    let (fast, time) = within(C4_LIMIT, start);
    outcome(
        fast && wins >= DOMINANCE_MIN_WINS,
        format!("{wins}/{DOMINANCE_RUNS} runs, mean +{gap_mean:.2} pts, stddev -{gap_sd:.2} pts, {time}"),
    )
}

fn stage2_dominance() -> Outcome {
    let start = Instant::now();
    let mut wins = 0;
    let mut means = [0.0; 3];
    for seed in 0..DOMINANCE_RUNS {
        let m: Vec<f64> = [Strategy::Proposed, Strategy::GreedyBest, Strategy::GreedyWorst]
            .into_iter()
            .map(|st| final_profile(Preset::Stage2, seed, Strategy::Proposed, st, Role::Mbs).0)
            .collect();
        wins += usize::from(m[0] > m[1] && m[0] > m[2]);
        for k in 0..3 {
            means[k] += m[k] / DOMINANCE_RUNS as f64;
        }
    }
    let (fast, time) = within(C5_LIMIT, start);
    outcome(
        fast && wins >= DOMINANCE_MIN_WINS,
        format!(
            "{wins}/{DOMINANCE_RUNS} runs, mean MBS residual {:.2}% vs {:.2}% / {:.2}%, {time}",
            means[0], means[1], means[2]
        ),
    )
}

fn greedy_worst_starvation() -> Outcome {
    let mut s = Preset::Stage1Fairness.scenario(0);
    s.stage1_strategy = Strategy::GreedyWorst;
    let r = run(&s).expect("preset runs");
    let credit = |id| -> f64 {
        r.snapshots
            .iter()
            .flat_map(|snap| snap.chargers.iter().filter(move |c| c.id == id))
            .map(|c| c.tower_credit)
            .sum()
    };
    let served: Vec<f64> = s.chargers.iter().map(|c| credit(c.id)).collect();
    let top = served
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("chargers present");
    let last = &r.last().chargers[top];
    let top_pct = 100.0 * last.after / last.capacity;
    let starved = served.iter().filter(|&&c| c == 0.0).count();
    let fraction = starved as f64 / served.len() as f64;
    outcome(
        (top_pct - 100.0).abs() <= FULL_PCT_TOL && fraction >= STARVED_FRACTION,
        format!(
            "most-served charger at {top_pct:.4}%, {starved}/{} chargers never charged",
            served.len()
        ),
    )
}

fn coverage_monotone() -> Outcome {
    let start = Instant::now();
    let base = Preset::CoverageSweep.scenario(SWEEP_SEED);
    let chargers = base.chargers.len() as u32;
    let counts: Vec<u32> = (1..=SWEEP_MAX).collect();
    let rows = sweep_mbs_count(&base, &counts).expect("sweep runs");
    let cov: Vec<u32> = rows.iter().map(|r| r.coverage.units()).collect();
    let non_increasing = cov.windows(2).all(|w| w[1] <= w[0]);
    let strict_early = cov[..chargers as usize].windows(2).any(|w| w[1] < w[0]);
    let tail = &cov[chargers as usize..];
    let spread = tail.iter().max().unwrap() - tail.iter().min().unwrap();
    let (fast, time) = within(C7_LIMIT, start);
    outcome(
        fast && non_increasing && strict_early && spread <= PLATEAU_SPREAD,
        format!(
            "coverage {:?}, trailing spread {spread} over |M| > {chargers}, {time}",
            cov
        ),
    )
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn queue_triptych() -> Outcome {
    let start = Instant::now();
    let cfg = DppConfig::default();
    let a = cfg.arrival.mean();
    let b = |p: f64| cfg.slot * cfg.channel.bandwidth * (1.0 + p * cfg.channel.gain / cfg.channel.noise).log2();
    let lo = cfg.action_set[0].0;
    let hi = cfg.max_action().0;
    let bracket = b(lo) < a && a < b(hi);
    let st = StabilityConfig {
        window: 0.25,
        threshold: DIVERGING_RATIO,
    };
    let trace = |p| -> Vec<f64> {
        simulate_queue(p, &cfg, QUEUE_SLOTS, QUEUE_SEED)
            .iter()
            .map(|r| r.backlog)
            .collect()
    };
    let (min_t, max_t, dpp_t) = (
        trace(PowerPolicy::MinPa),
        trace(PowerPolicy::MaxPa),
        trace(PowerPolicy::Dpp),
    );
    let vmin = stability_verdict(&min_t, &st).unwrap();
    let vmax = stability_verdict(&max_t, &st).unwrap();
    let vdpp = stability_verdict(&dpp_t, &st).unwrap();
    let q = QUEUE_SLOTS / 4;
    let third = mean(&dpp_t[2 * q..3 * q]);
    let fourth = mean(&dpp_t[3 * q..]);
    let plateau = (fourth / third - 1.0).abs() <= PLATEAU_BAND;
    // transient: the opening stretch sits far below the plateau, and the
    // second half never climbs past it by more than the band
    let opening = mean(&dpp_t[..QUEUE_SLOTS / 20]);
    let transient = opening < 0.5 * fourth;
    let bounded = dpp_t[QUEUE_SLOTS / 2..].iter().fold(0.0f64, |m, &x| m.max(x)) <= (1.0 + PLATEAU_BAND) * fourth;
    let max_mean = mean(&max_t);
    let (fast, time) = within(C8_LIMIT, start);
    let pass = bracket
        && vmin.verdict == Stability::Diverging
        && vmin.ratio > DIVERGING_RATIO
        && vmax.verdict == Stability::Stable
        && max_mean < a
        && vdpp.verdict == Stability::Stable
        && plateau
        && transient
        && bounded
        && fast;
    outcome(
        pass,
        format!(
            "min-PA ratio {:.3}; Max-PA mean {max_mean:.1} < a = {a}; DPP ratio {:.4}, plateau {fourth:.0} bits after opening mean {opening:.0}; {time}",
            vmin.ratio, vdpp.ratio
        ),
    )
}

/// Drift-plus-penalty objective, written out independently of the library.
fn dpp_cost(q: f64, p: f64, cfg: &DppConfig) -> f64 {
    let rate = cfg.slot * cfg.channel.bandwidth * (1.0 + p * cfg.channel.gain / cfg.channel.noise).log2();
    cfg.v * p * cfg.slot - q * rate
}

fn dpp_limits() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut bad = Vec::new();
    for k in 0..DPP_CONFIGS {
        let lo = if rng.gen_bool(0.5) {
            0.0
        } else {
            rng.gen_range(0.1..20.0)
        };
        let hi = lo + rng.gen_range(1.0..400.0);
        let levels = rng.gen_range(2..=40);
        let mut cfg = DppConfig {
            v: 0.0,
            action_set: uniform_action_set(lo, hi, levels),
            slot: rng.gen_range(0.01..2.0),
            channel: Channel {
                bandwidth: rng.gen_range(100.0..1e6),
                gain: rng.gen_range(1e-6..1e-1),
                noise: rng.gen_range(1e-4..1.0),
            },
            arrival: ArrivalModel::Constant { mean: 1000.0 },
        };
        cfg.v = 10f64.powf(rng.gen_range(-3.0..9.0));
        let min = cfg.action_set[0];
        let max = cfg.max_action();
        if dpp_decide(0.0, &cfg) != min {
            bad.push(format!("config {k}: Q=0 did not pick {} W", min.0));
        }
        let threshold = max_rate_threshold(&cfg);
        for q in [2.0 * threshold + 1.0, 10.0 * threshold + 1.0] {
            let chosen = dpp_decide(q, &cfg);
            let brute = cfg
                .action_set
                .iter()
                .copied()
                .min_by(|a, b| dpp_cost(q, a.0, &cfg).total_cmp(&dpp_cost(q, b.0, &cfg)))
                .unwrap_or(PowerAction(f64::NAN));
            if chosen != max || brute != max {
                bad.push(format!("config {k}: Q={q:.3e} picked {} W", chosen.0));
            }
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{DPP_CONFIGS}/{DPP_CONFIGS} configs")
        } else {
            bad.join("; ")
        },
    )
}

fn conservation_audit() -> Outcome {
    let start = Instant::now();
    let loaded = build(&ScenarioFile::default(), None).expect("defaults are valid");
    let s = &loaded.scenario;
    let shape = (
        s.mbs.len(),
        s.chargers.len(),
        s.towers.len(),
        s.towers[0].plates,
        s.horizon,
    );
    let r = run(s).expect("default scenario runs");
    let failures = audit(&r, AUDIT_TOL);
    let (fast, time) = within(C10_LIMIT, start);
    outcome(
        failures.is_empty() && fast && shape == (25, 50, 1, 4, 30),
        format!(
            "{} audit failures over {} unit times, {time}",
            failures.len(),
            r.last().unit
        ),
    )
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(Result::unwrap)
        .filter(|e| e.file_type().unwrap().is_file())
        .map(|e| {
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cases: Vec<(&str, ScenarioArgs, Format)> = vec![
        ("default", ScenarioArgs::default(), Format::Csv),
        (
            "stage2 random",
            ScenarioArgs {
                preset: Some(Preset::Stage2),
                seed: Some(5),
                baseline: Some(Strategy::Random),
                horizon: Some(8),
                ..ScenarioArgs::default()
            },
            Format::Json,
        ),
        (
            "literal",
            ScenarioArgs {
                seed: Some(9),
                mode: Some(Stage2Mode::Literal),
                horizon: Some(6),
                ..ScenarioArgs::default()
            },
            Format::Csv,
        ),
    ];
    let mut checked = 0;
    let mut bad = Vec::new();
    for (k, (label, args, format)) in cases.iter().enumerate() {
        let mut dirs = Vec::new();
        for rep in 0..2 {
            let dir = tmp.path().join(format!("{k}-{rep}"));
            let output = OutputArgs {
                out: Some(dir.clone()),
                format: *format,
            };
            commands::simulate(args, &output, &mut std::io::sink()).expect("simulate runs");
            commands::power_control(
                args,
                &OutputArgs {
                    out: Some(dir.join("pc")),
                    ..output
                },
                &mut std::io::sink(),
            )
            .expect("power-control runs");
            dirs.push(dir);
        }
        for sub in ["", "pc"] {
            let a = read_dir_bytes(&dirs[0].join(sub));
            let b = read_dir_bytes(&dirs[1].join(sub));
            checked += a.iter().filter(|f| !f.1.is_empty()).count();
            if a != b {
                bad.push(label.to_string());
            }
        }
    }
    outcome(
        bad.is_empty() && checked > 0,
        if bad.is_empty() {
            format!("{checked} artifact files identical across repeated runs")
        } else {
            format!("differences in {}", bad.join(", "))
        },
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("oracle equivalence, stage 1", oracle_stage1),
        ("oracle equivalence, stage 2", oracle_stage2),
        ("non-convexity witness", hessian_witness),
        ("fairness dominance over random", fairness_dominance),
        ("stage-2 dominance over greedy", stage2_dominance),
        ("greedy-worst starvation", greedy_worst_starvation),
        ("coverage-time monotonicity", coverage_monotone),
        ("queue stability triptych", queue_triptych),
        ("DPP limit behaviors", dpp_limits),
        ("conservation audit", conservation_audit),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "criterion {:>2} {:<32} {}  {}",
            k + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
