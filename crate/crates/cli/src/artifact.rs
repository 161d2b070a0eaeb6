//! Output artifacts. Each file starts with a header naming the schema
//! version, the seed and the SHA-256 of the effective scenario, so two files
//! with the same hash come from the same inputs.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use uavcharge_core::metrics::{residual_stats, stability_verdict, Role, StabilityConfig};
use uavcharge_core::sim::{Coverage, Scenario, SimResult};

use crate::config::{emit_scenario, ConfigError};

pub const SCHEMA_VERSION: &str = "uavcharge/1";

/// Columns of the snapshot CSV, in order.
pub const SNAPSHOT_COLUMNS: [&str; 14] = [
    "unit_time",
    "entity_id",
    "role",
    "residual_j",
    "residual_pct",
    "capacity_j",
    "before_j",
    "tower_credit_j",
    "transfer_sent_j",
    "travel_j",
    "received_j",
    "hover_j",
    "tx_j",
    "partner",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Header {
    pub schema: &'static str,
    pub seed: u64,
    pub config_sha256: String,
}

impl Header {
    pub fn for_scenario(s: &Scenario) -> Result<Self, ConfigError> {
        Ok(Header {
            schema: SCHEMA_VERSION,
            seed: s.seed,
            config_sha256: sha256_hex(emit_scenario(s)?.as_bytes()),
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One file to be written: name relative to the output directory, contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub body: String,
}

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub fn render_csv(header: &Header, table: &Table) -> String {
    let mut out = format!(
        "# schema={} seed={} config_sha256={}\n{}\n",
        header.schema,
        header.seed,
        header.config_sha256,
        table.columns.join(",")
    );
    for row in &table.rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    #[serde(flatten)]
    header: &'a Header,
    data: &'a T,
}

pub fn render_json<T: Serialize>(header: &Header, data: &T) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope { header, data }).expect("artifact data serializes");
    s.push('\n');
    s
}

fn render<T: Serialize>(format: Format, header: &Header, table: impl FnOnce() -> Table, data: &T) -> String {
    match format {
        Format::Csv => render_csv(header, &table()),
        Format::Json => render_json(header, data),
    }
}

/// Writes every artifact or none. Files go to temporaries in `dir` first and
/// are renamed into place once all writes succeeded.
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
    let result = (|| {
        for a in artifacts {
            let tmp = dir.join(format!(".{}.tmp{}", a.name, std::process::id()));
            staged.push((tmp.clone(), dir.join(&a.name)));
            fs::write(&tmp, &a.body)?;
        }
        for (tmp, dest) in &staged {
            fs::rename(tmp, dest)?;
        }
        Ok(())
    })();
    if result.is_err() {
        for (tmp, _) in &staged {
            let _ = fs::remove_file(tmp);
        }
    }
    result
}

fn partner_of_charger(result: &SimResult, unit: usize, id: uavcharge_core::energy::ChargerId) -> String {
    let snap = &result.snapshots[unit];
    let mut parts = Vec::new();
    if let Some(t) = snap.stage1.tower_of(id) {
        parts.push(t.to_string());
    }
    parts.extend(
        snap.stage2
            .pairs
            .iter()
            .filter(|p| p.charger == id)
            .map(|p| p.mbs.to_string()),
    );
    parts.join(";")
}

pub fn snapshots(format: Format, header: &Header, result: &SimResult) -> Artifact {
    let table = || {
        let mut rows = Vec::new();
        for (k, snap) in result.snapshots.iter().enumerate() {
            for c in &snap.chargers {
                rows.push(vec![
                    snap.unit.to_string(),
                    c.id.to_string(),
                    "charger".into(),
                    c.after.to_string(),
                    (100.0 * c.after / c.capacity).to_string(),
                    c.capacity.to_string(),
                    c.before.to_string(),
                    c.tower_credit.to_string(),
                    c.transfer_sent.to_string(),
                    c.travel_spent.to_string(),
                    "0".into(),
                    "0".into(),
                    "0".into(),
                    partner_of_charger(result, k, c.id),
                ]);
            }
            for m in &snap.mbs {
                let partners: Vec<String> = snap
                    .stage2
                    .pairs
                    .iter()
                    .filter(|p| p.mbs == m.id)
                    .map(|p| p.charger.to_string())
                    .collect();
                rows.push(vec![
                    snap.unit.to_string(),
                    m.id.to_string(),
                    "mbs".into(),
                    m.after.to_string(),
                    (100.0 * m.after / m.capacity).to_string(),
                    m.capacity.to_string(),
                    m.before.to_string(),
                    "0".into(),
                    "0".into(),
                    "0".into(),
                    m.received.to_string(),
                    m.hover_drain.to_string(),
                    m.tx_drain.to_string(),
                    partners.join(";"),
                ]);
            }
        }
        Table {
            columns: SNAPSHOT_COLUMNS.to_vec(),
            rows,
        }
    };
    Artifact {
        name: format!("snapshots.{}", format.extension()),
        body: render(format, header, table, &result.snapshots),
    }
}

#[derive(Serialize)]
struct ProfileRecord {
    role: Role,
    values_pct: Vec<f64>,
    mean_pct: f64,
    stddev_pct: f64,
}

/// Final residual profiles, one per non-empty role.
pub fn residuals(format: Format, header: &Header, result: &SimResult) -> Artifact {
    let profiles: Vec<ProfileRecord> = [Role::Charger, Role::Mbs]
        .into_iter()
        .filter_map(|role| {
            residual_stats(result.last(), role).ok().map(|p| ProfileRecord {
                role,
                values_pct: p.values,
                mean_pct: p.mean,
                stddev_pct: p.stddev,
            })
        })
        .collect();
    let table = || Table {
        columns: vec!["role", "rank", "residual_pct", "mean_pct", "stddev_pct"],
        rows: profiles
            .iter()
            .flat_map(|p| {
                let role = match p.role {
                    Role::Charger => "charger",
                    Role::Mbs => "mbs",
                };
                p.values_pct.iter().enumerate().map(move |(k, v)| {
                    vec![
                        role.to_string(),
                        k.to_string(),
                        v.to_string(),
                        p.mean_pct.to_string(),
                        p.stddev_pct.to_string(),
                    ]
                })
            })
            .collect(),
    };
    Artifact {
        name: format!("residuals.{}", format.extension()),
        body: render(format, header, table, &profiles),
    }
}

pub fn queues(format: Format, header: &Header, result: &SimResult) -> Artifact {
    let table = || Table {
        columns: vec![
            "mbs_id",
            "slot",
            "backlog_bits",
            "power_w",
            "arrival_bits",
            "departure_bits",
            "energy_j",
        ],
        rows: result
            .traces
            .iter()
            .flat_map(|t| {
                t.slots.iter().map(move |r| {
                    vec![
                        t.mbs.to_string(),
                        r.slot.to_string(),
                        r.backlog.to_string(),
                        r.power.to_string(),
                        r.arrival.to_string(),
                        r.departure.to_string(),
                        r.energy.to_string(),
                    ]
                })
            })
            .collect(),
    };
    Artifact {
        name: format!("queues.{}", format.extension()),
        body: render(format, header, table, &result.traces),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageSummary {
    pub coverage: Coverage,
    pub coverage_minutes: f64,
    pub horizon_units: u32,
    pub units_run: u32,
    pub dropped_mbs: usize,
    pub diverging_queues: usize,
}

pub fn coverage_summary(scenario: &Scenario, result: &SimResult) -> CoverageSummary {
    let cfg = StabilityConfig::default();
    let diverging_queues = result
        .traces
        .iter()
        .filter_map(|t| {
            let backlog: Vec<f64> = t.slots.iter().map(|r| r.backlog).collect();
            stability_verdict(&backlog, &cfg).ok()
        })
        .filter(|v| v.verdict == uavcharge_core::metrics::Stability::Diverging)
        .count();
    CoverageSummary {
        coverage: result.coverage,
        coverage_minutes: f64::from(result.coverage.units()) * scenario.timing.unit_time / 60.0,
        horizon_units: scenario.horizon,
        units_run: result.last().unit,
        dropped_mbs: result.last().mbs.iter().filter(|m| m.dropped).count(),
        diverging_queues,
    }
}

pub fn coverage(format: Format, header: &Header, scenario: &Scenario, result: &SimResult) -> Artifact {
    let summary = coverage_summary(scenario, result);
    let table = || {
        let kind = match summary.coverage {
            Coverage::Dropped(_) => "dropped",
            Coverage::Survived(_) => "survived",
        };
        let mut rows = Vec::new();
        for (k, v) in [
            ("coverage_kind", kind.to_string()),
            ("coverage_unit_times", summary.coverage.units().to_string()),
            ("coverage_minutes", summary.coverage_minutes.to_string()),
            ("horizon_unit_times", summary.horizon_units.to_string()),
            ("unit_times_run", summary.units_run.to_string()),
            ("dropped_mbs", summary.dropped_mbs.to_string()),
            ("diverging_queues", summary.diverging_queues.to_string()),
        ] {
            rows.push(vec![k.to_string(), v]);
        }
        Table {
            columns: vec!["metric", "value"],
            rows,
        }
    };
    Artifact {
        name: format!("coverage.{}", format.extension()),
        body: render(format, header, table, &summary),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    #[serde(flatten)]
    header: &'a Header,
    command: &'a str,
    format: &'static str,
    provenance: &'a [String],
    files: Vec<FileEntry>,
    config: &'a str,
}

/// JSON manifest listing the other artifacts with their digests and the
/// effective scenario.
pub fn manifest(
    name: &str,
    command: &str,
    format: Format,
    header: &Header,
    provenance: &[String],
    scenario: &Scenario,
    files: &[Artifact],
) -> Result<Artifact, ConfigError> {
    let config = emit_scenario(scenario)?;
    let m = Manifest {
        header,
        command,
        format: format.extension(),
        provenance,
        files: files
            .iter()
            .map(|a| FileEntry {
                name: a.name.clone(),
                sha256: sha256_hex(a.body.as_bytes()),
            })
            .collect(),
        config: &config,
    };
    let mut body = serde_json::to_string_pretty(&m).expect("manifest serializes");
    body.push('\n');
    Ok(Artifact {
        name: name.to_string(),
        body,
    })
}

/// Plain-text run summary for the terminal.
pub fn summary_line(scenario: &Scenario, result: &SimResult) -> String {
    let s = coverage_summary(scenario, result);
    let mut out = String::new();
    let _ = write!(
        out,
        "{} unit times, coverage {} ({} min), {} MBS dropped",
        s.units_run,
        match s.coverage {
            Coverage::Dropped(u) => format!("first drop at unit {u}"),
            Coverage::Survived(u) => format!("no drop in {u} units"),
        },
        s.coverage_minutes,
        s.dropped_mbs
    );
    for role in [Role::Charger, Role::Mbs] {
        if let Ok(p) = residual_stats(result.last(), role) {
            let _ = write!(out, "; {role:?} residual mean {:.2}% sd {:.2}%", p.mean, p.stddev);
        }
    }
    out
}
