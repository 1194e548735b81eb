//! Run directories and result files.
//!
//! A run directory holds `config.json` (the effective configuration),
//! `results.csv`, `summary.json`, one `rounds/<job>.jsonl` per replica and,
//! when the model path ran, `transcript.jsonl`. Directories are named by
//! run id and never reused.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use platoon_cache_core::config::SimConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::runner::JobOutcome;

pub const CSV_HEADER: &str = "policy,platoon_cache_units,avg_vfc_vehicles,achr_pct,actd_s,actd_ms,seed,rounds";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub policy: &'static str,
    pub platoon_cache_units: usize,
    pub avg_vfc_vehicles: f64,
    pub achr_pct: f64,
    pub actd_s: f64,
    pub actd_ms: f64,
    pub seed: u64,
    pub rounds: usize,
}

impl ResultRow {
    pub fn from_outcome(o: &JobOutcome) -> Self {
        let m = &o.result.metrics;
        Self {
            policy: o.result.policy.name(),
            platoon_cache_units: o.result.platoon_cache_units,
            avg_vfc_vehicles: m.mean_vfc_size,
            achr_pct: m.achr_pct,
            actd_s: m.actd_s,
            actd_ms: m.actd_s * 1000.0,
            seed: o.result.seed,
            rounds: o.result.rounds.len(),
        }
    }
}

pub fn results_csv(outcomes: &[JobOutcome]) -> io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for o in outcomes {
        w.serialize(ResultRow::from_outcome(o)).map_err(io::Error::other)?;
    }
    let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
    if outcomes.is_empty() {
        return Ok(format!("{CSV_HEADER}\n"));
    }
    String::from_utf8(bytes).map_err(io::Error::other)
}

/// `<UTC timestamp>-<8 hex digits of the config digest>`.
pub fn run_id(config: &SimConfig, now: SystemTime) -> String {
    let stamp: String = humantime::format_rfc3339_seconds(now)
        .to_string()
        .chars()
        .filter(|c| !matches!(c, '-' | ':'))
        .collect();
    let snapshot = serde_json::to_vec(config).unwrap_or_default();
    let digest = Sha256::digest(&snapshot);
    format!("{stamp}-{:02x}{:02x}{:02x}{:02x}", digest[0], digest[1], digest[2], digest[3])
}

/// Creates a fresh directory under `out`, suffixing the id if taken.
pub fn create_run_dir(out: &Path, id: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(out)?;
    for n in 0u32.. {
        let name = if n == 0 { id.to_owned() } else { format!("{id}-{n}") };
        let dir = out.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e),
        }
    }
    unreachable!("run id suffixes exhausted")
}

fn create_new(path: &Path) -> io::Result<fs::File> {
    fs::OpenOptions::new().write(true).create_new(true).open(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunPaths {
    pub dir: PathBuf,
    pub config: PathBuf,
    pub results: PathBuf,
    pub summary: PathBuf,
    pub rounds: Vec<PathBuf>,
}

#[derive(Serialize)]
struct SummaryEntry<'a> {
    job: String,
    policy: &'static str,
    seed: u64,
    platoon_cache_units: usize,
    k_max: usize,
    arrival_scale: f64,
    achr_pct: f64,
    actd_s: f64,
    avg_vfc_vehicles: f64,
    wall_clock_ms: f64,
    fallback_rounds: Vec<u32>,
    rounds_file: &'a str,
}

/// Writes every result file into `dir`, refusing to replace any.
pub fn write_run(dir: &Path, config: &SimConfig, outcomes: &[JobOutcome]) -> io::Result<RunPaths> {
    let config_path = dir.join("config.json");
    serde_json::to_writer_pretty(create_new(&config_path)?, config)?;

    let results = dir.join("results.csv");
    create_new(&results)?.write_all(results_csv(outcomes)?.as_bytes())?;

    let rounds_dir = dir.join("rounds");
    fs::create_dir_all(&rounds_dir)?;
    let mut rounds = Vec::new();
    let mut summary = Vec::new();
    let names: Vec<String> = outcomes.iter().map(|o| format!("rounds/{}.jsonl", o.job.label())).collect();
    for (o, name) in outcomes.iter().zip(&names) {
        let path = dir.join(name);
        let mut f = io::BufWriter::new(create_new(&path)?);
        for r in &o.result.rounds {
            serde_json::to_writer(&mut f, r)?;
            f.write_all(b"\n")?;
        }
        f.flush()?;
        rounds.push(path);
        let m = &o.result.metrics;
        summary.push(SummaryEntry {
            job: o.job.label(),
            policy: o.result.policy.name(),
            seed: o.result.seed,
            platoon_cache_units: o.result.platoon_cache_units,
            k_max: o.config.k_max,
            arrival_scale: o.config.arrival_scale,
            achr_pct: m.achr_pct,
            actd_s: m.actd_s,
            avg_vfc_vehicles: m.mean_vfc_size,
            wall_clock_ms: o.wall_clock.as_secs_f64() * 1000.0,
            fallback_rounds: o.result.rounds.iter().filter(|r| r.provider_error.is_some()).map(|r| r.round).collect(),
            rounds_file: name,
        });
    }
    let summary_path = dir.join("summary.json");
    serde_json::to_writer_pretty(create_new(&summary_path)?, &summary)?;
    Ok(RunPaths { dir: dir.to_owned(), config: config_path, results, summary: summary_path, rounds })
}
