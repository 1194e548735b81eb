//! File formats, model providers, parallel sweeps and the command-line
//! front end for the platoon caching simulator.

pub mod config_file;
pub mod dataset;
pub mod output;
pub mod provider;
pub mod runner;
pub mod synth;
pub mod transcript;

pub use platoon_cache_core as core;

use std::path::Path;
use std::sync::Arc;
use std::time::SystemTime;

use anyhow::Context;
use platoon_cache_core::config::{PolicyKind, SimConfig};

/// Everything one `simulate` invocation produced.
pub struct SimulationRun {
    pub paths: output::RunPaths,
    pub transcript: Option<std::path::PathBuf>,
    pub outcomes: Vec<runner::JobOutcome>,
}

/// Loads the dataset, runs every job and writes a new run directory
/// under `out`. The model path logs to `transcript.jsonl` in that
/// directory.
pub fn simulate(config: &SimConfig, out: &Path) -> anyhow::Result<SimulationRun> {
    config.validate()?;
    let dataset = dataset::load_dataset(config)?;
    let dir = output::create_run_dir(out, &output::run_id(config, SystemTime::now()))
        .with_context(|| format!("creating run directory under {}", out.display()))?;
    let log = if config.policies.contains(&PolicyKind::Llm) {
        Some(Arc::new(transcript::TranscriptLog::open(&dir.join("transcript.jsonl"))?))
    } else {
        None
    };
    let transcript = log.as_ref().map(|l| l.path().to_owned());
    let factory = provider::StandardFactory::new(config, log).context("loading recorded responses")?;
    let jobs = runner::plan_jobs(config);
    let outcomes = runner::run_jobs(config, &dataset, &jobs, &factory)?;
    let paths = output::write_run(&dir, config, &outcomes)?;
    Ok(SimulationRun { paths, transcript, outcomes })
}
