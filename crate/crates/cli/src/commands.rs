use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use uavcharge_core::matching::{baseline_stage1, baseline_stage2, stage1_match, stage2_match, stage2_weights};
use uavcharge_core::metrics::{stability_verdict, StabilityConfig};
use uavcharge_core::powerctl::simulate_queue;
use uavcharge_core::rng::{stream, Stream};
use uavcharge_core::sim::{run, sweep_mbs_count, Coverage, Scenario};

use crate::artifact::{self, Artifact, Format, Header, Table};
use crate::cli::{Command, OutputArgs, ScenarioArgs};
use crate::config::{self, ConfigError, Loaded, ScenarioFile};
use crate::oracle::{run_oracle, OracleBounds, Solvers};

/// Exit status when oracle-check finds a disagreement.
pub const EXIT_MISMATCH: i32 = 3;
/// Exit status for configuration and input errors.
pub const EXIT_CONFIG: i32 = 2;

/// Maps an error to an exit status.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.chain().any(|e| e.is::<ConfigError>()) {
        EXIT_CONFIG
    } else {
        1
    }
}

/// Loads the scenario file (if any) and applies command-line overrides.
pub fn load(args: &ScenarioArgs, instance: Option<&Path>) -> anyhow::Result<Loaded> {
    let (mut file, base) = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.clone(),
                source,
            })?;
            (
                config::parse_scenario(&text, &path.display().to_string())?,
                path.parent().map(Path::to_path_buf),
            )
        }
        None => (ScenarioFile::default(), None),
    };
    if args.preset.is_some() {
        file.preset = args.preset;
    }
    if args.seed.is_some() {
        file.seed = args.seed;
    }
    if args.horizon.is_some() {
        file.horizon_units = args.horizon;
        file.horizon_minutes = None;
    }
    if args.mode.is_some() {
        file.matching.mode = args.mode;
    }
    if let Some(strategy) = args.baseline {
        file.matching.stage1 = Some(strategy);
        file.matching.stage2 = Some(strategy);
    }
    if args.power.is_some() {
        file.control.policy = args.power;
    }
    if let Some(p) = instance {
        let cwd = std::env::current_dir().context("cannot resolve the working directory")?;
        file.instance = Some(cwd.join(p));
        file.tower.clear();
        file.charger.clear();
        file.mbs.clear();
    }
    Ok(config::build(&file, base.as_deref())?)
}

fn emit(out: &mut dyn Write, output: &OutputArgs, files: Vec<Artifact>) -> anyhow::Result<()> {
    match &output.out {
        Some(dir) => {
            artifact::write_all(dir, &files).with_context(|| format!("cannot write artifacts to {}", dir.display()))?;
            for f in &files {
                writeln!(out, "wrote {}", dir.join(&f.name).display())?;
            }
        }
        None => {
            for f in &files {
                out.write_all(f.body.as_bytes())?;
            }
        }
    }
    Ok(())
}

fn out_dir(output: &OutputArgs) -> PathBuf {
    output.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}

pub fn simulate(args: &ScenarioArgs, output: &OutputArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let loaded = load(args, None)?;
    let s = &loaded.scenario;
    let result = run(s)?;
    let header = Header::for_scenario(s)?;
    let f = output.format;
    let mut files = vec![
        artifact::snapshots(f, &header, &result),
        artifact::residuals(f, &header, &result),
        artifact::queues(f, &header, &result),
        artifact::coverage(f, &header, s, &result),
    ];
    let manifest = artifact::manifest("manifest.json", "simulate", f, &header, &loaded.provenance, s, &files)?;
    files.insert(0, manifest);
    writeln!(out, "{}", artifact::summary_line(s, &result))?;
    let dir = out_dir(output);
    emit(
        out,
        &OutputArgs {
            out: Some(dir),
            format: f,
        },
        files,
    )?;
    Ok(0)
}

pub fn match_stage1(
    args: &ScenarioArgs,
    output: &OutputArgs,
    instance: Option<&Path>,
    out: &mut dyn Write,
) -> anyhow::Result<i32> {
    let loaded = load(args, instance)?;
    let s = &loaded.scenario;
    let assignment = match s.stage1_strategy.baseline() {
        None => stage1_match(&s.towers, &s.chargers),
        Some(b) => baseline_stage1(b, &s.towers, &s.chargers, &mut stream(s.seed, Stream::Baseline, 0)),
    };
    let header = Header::for_scenario(s)?;
    let body = match output.format {
        Format::Csv => artifact::render_csv(
            &header,
            &Table {
                columns: vec!["tower_id", "charger_id", "residual_j", "deficit_j"],
                rows: assignment
                    .pairs
                    .iter()
                    .map(|(t, c)| {
                        let d = s.chargers.iter().find(|x| x.id == *c).expect("matched chargers exist");
                        vec![
                            t.to_string(),
                            c.to_string(),
                            d.residual.to_string(),
                            d.deficit().to_string(),
                        ]
                    })
                    .collect(),
            },
        ),
        Format::Json => artifact::render_json(&header, &assignment),
    };
    let name = format!("stage1.{}", output.format.extension());
    emit(out, output, vec![Artifact { name, body }])?;
    if output.out.is_some() {
        writeln!(
            out,
            "{} pairs, objective {} J",
            assignment.pairs.len(),
            assignment.objective
        )?;
    }
    Ok(0)
}

pub fn match_stage2(
    args: &ScenarioArgs,
    output: &OutputArgs,
    instance: Option<&Path>,
    out: &mut dyn Write,
) -> anyhow::Result<i32> {
    let loaded = load(args, instance)?;
    let s = &loaded.scenario;
    let assignment = match s.stage2_strategy.baseline() {
        None => stage2_match(&s.chargers, &s.mbs, &s.timing, s.mode, &s.stage2),
        Some(b) => baseline_stage2(
            b,
            &s.chargers,
            &s.mbs,
            &s.timing,
            &s.stage2,
            &mut stream(s.seed, Stream::Baseline, 1),
        ),
    };
    let weights = stage2_weights(&s.chargers, &s.mbs, &s.timing, &s.stage2);
    let header = Header::for_scenario(s)?;
    let body = match output.format {
        Format::Csv => artifact::render_csv(
            &header,
            &Table {
                columns: vec!["mbs_id", "charger_id", "weight", "transfer_j"],
                rows: assignment
                    .pairs
                    .iter()
                    .map(|p| {
                        let w = weights
                            .iter()
                            .find(|v| v.mbs == p.mbs && v.charger == p.charger)
                            .map_or(0.0, |v| v.value);
                        vec![
                            p.mbs.to_string(),
                            p.charger.to_string(),
                            w.to_string(),
                            p.transfer.to_string(),
                        ]
                    })
                    .collect(),
            },
        ),
        Format::Json => artifact::render_json(&header, &assignment),
    };
    let name = format!("stage2.{}", output.format.extension());
    emit(out, output, vec![Artifact { name, body }])?;
    if output.out.is_some() {
        writeln!(
            out,
            "{} pairs, objective {}",
            assignment.pairs.len(),
            assignment.objective
        )?;
    }
    Ok(0)
}

pub fn power_control(args: &ScenarioArgs, output: &OutputArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let loaded = load(args, None)?;
    let s = &loaded.scenario;
    let slots = s.horizon as usize * s.timing.slots_per_unit as usize;
    let trace = simulate_queue(s.power, &s.dpp, slots, s.seed);
    let header = Header::for_scenario(s)?;
    let body = match output.format {
        Format::Csv => artifact::render_csv(
            &header,
            &Table {
                columns: vec![
                    "slot",
                    "backlog_bits",
                    "power_w",
                    "arrival_bits",
                    "departure_bits",
                    "energy_j",
                ],
                rows: trace
                    .iter()
                    .map(|r| {
                        vec![
                            r.slot.to_string(),
                            r.backlog.to_string(),
                            r.power.to_string(),
                            r.arrival.to_string(),
                            r.departure.to_string(),
                            r.energy.to_string(),
                        ]
                    })
                    .collect(),
            },
        ),
        Format::Json => artifact::render_json(&header, &trace),
    };
    let backlog: Vec<f64> = trace.iter().map(|r| r.backlog).collect();
    let n = trace.len().max(1) as f64;
    let mean_q = backlog.iter().sum::<f64>() / n;
    let mean_p = trace.iter().map(|r| r.power).sum::<f64>() / n;
    let verdict = stability_verdict(&backlog, &StabilityConfig::default())?;
    let name = format!("power.{}", output.format.extension());
    emit(out, output, vec![Artifact { name, body }])?;
    let target: &mut dyn Write = if output.out.is_some() {
        out
    } else {
        &mut std::io::stderr()
    };
    writeln!(
        target,
        "{:?}: {slots} slots, mean backlog {mean_q:.1} bits, mean power {mean_p:.2} W, {:?} (ratio {:.4})",
        s.power, verdict.verdict, verdict.ratio
    )?;
    Ok(0)
}

pub fn sweep(args: &ScenarioArgs, output: &OutputArgs, counts: &[u32], out: &mut dyn Write) -> anyhow::Result<i32> {
    let loaded = load(args, None)?;
    let s = &loaded.scenario;
    let counts: Vec<u32> = if counts.is_empty() {
        (1..=s.mbs.len() as u32).collect()
    } else {
        counts.to_vec()
    };
    let rows = sweep_mbs_count(s, &counts).map_err(ConfigError::from)?;
    let header = Header::for_scenario(s)?;
    let f = output.format;
    let minutes = |c: Coverage| f64::from(c.units()) * s.timing.unit_time / 60.0;
    let body = match f {
        Format::Csv => artifact::render_csv(
            &header,
            &Table {
                columns: vec!["mbs_count", "coverage_kind", "coverage_unit_times", "coverage_minutes"],
                rows: rows
                    .iter()
                    .map(|r| {
                        let kind = match r.coverage {
                            Coverage::Dropped(_) => "dropped",
                            Coverage::Survived(_) => "survived",
                        };
                        vec![
                            r.mbs_count.to_string(),
                            kind.to_string(),
                            r.coverage.units().to_string(),
                            minutes(r.coverage).to_string(),
                        ]
                    })
                    .collect(),
            },
        ),
        Format::Json => artifact::render_json(&header, &rows),
    };
    let mut files = vec![Artifact {
        name: format!("sweep.{}", f.extension()),
        body,
    }];
    let mut manifests = Vec::new();
    for &n in &counts {
        let sub = Scenario {
            mbs: s.mbs[..n as usize].to_vec(),
            ..s.clone()
        };
        let h = Header::for_scenario(&sub)?;
        manifests.push(artifact::manifest(
            &format!("manifest_mbs_{n}.json"),
            "sweep",
            f,
            &h,
            &loaded.provenance,
            &sub,
            &files,
        )?);
    }
    let top = artifact::manifest("manifest.json", "sweep", f, &header, &loaded.provenance, s, &files)?;
    files.insert(0, top);
    files.extend(manifests);
    for r in &rows {
        writeln!(out, "{:>3} MBS: {} unit times", r.mbs_count, r.coverage.units())?;
    }
    emit(
        out,
        &OutputArgs {
            out: Some(out_dir(output)),
            format: f,
        },
        files,
    )?;
    Ok(0)
}

pub fn oracle_check(bounds: &OracleBounds, solvers: &Solvers, out: &mut dyn Write) -> anyhow::Result<i32> {
    let report = run_oracle(bounds, solvers)?;
    out.write_all(report.render().as_bytes())?;
    Ok(if report.passed() { 0 } else { EXIT_MISMATCH })
}

/// Runs one command, writing human-readable output to `out`.
pub fn execute(command: &Command, out: &mut dyn Write) -> anyhow::Result<i32> {
    match command {
        Command::Simulate { scenario, output } => simulate(scenario, output, out),
        Command::MatchStage1 {
            scenario,
            output,
            instance,
        } => match_stage1(scenario, output, instance.as_deref(), out),
        Command::MatchStage2 {
            scenario,
            output,
            instance,
        } => match_stage2(scenario, output, instance.as_deref(), out),
        Command::PowerControl { scenario, output } => power_control(scenario, output, out),
        Command::Sweep {
            scenario,
            output,
            counts,
        } => sweep(scenario, output, counts, out),
        &Command::OracleCheck {
            instances,
            seed,
            max_towers,
            max_plates,
            max_chargers,
            max_mbs,
            max_mbs_plates,
        } => oracle_check(
            &OracleBounds {
                instances,
                seed,
                max_towers,
                max_plates,
                max_chargers,
                max_mbs,
                max_mbs_plates,
            },
            &Solvers::default(),
            out,
        ),
    }
}
