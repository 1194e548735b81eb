//! Expanding a config into independent replicas and running them in
//! parallel. Replicas share nothing mutable except the append-only
//! transcript.

use std::time::{Duration, Instant};

use platoon_cache_core::catalog::Dataset;
use platoon_cache_core::config::{PolicyKind, SimConfig};
use platoon_cache_core::experiment::{
    configure_point, run_experiment, sweep_points, ExperimentError, ExperimentResult, Ranker, SweepPoint, World,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::provider::ProviderFactory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Job {
    pub point: SweepPoint,
    pub seed: u64,
    pub policy: PolicyKind,
}

impl Job {
    /// File-name friendly tag, e.g. `llm-cache200-seed1`.
    pub fn label(&self) -> String {
        let point = match self.point {
            SweepPoint::Base => "base".to_owned(),
            SweepPoint::CacheUnits(u) => format!("cache{u}"),
            SweepPoint::VfcTarget(v) => format!("vfc{v}"),
        };
        format!("{}-{point}-seed{}", self.policy.name(), self.seed)
    }
}

#[derive(Debug, Clone)]
pub struct JobOutcome {
    pub job: Job,
    pub config: SimConfig,
    pub result: ExperimentResult,
    pub wall_clock: Duration,
}

/// Sweep points, then seeds, then policies in config order.
pub fn plan_jobs(config: &SimConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    for point in sweep_points(config) {
        for &seed in &config.seeds {
            for &policy in &config.policies {
                jobs.push(Job { point, seed, policy });
            }
        }
    }
    jobs
}

pub fn run_job(
    config: &SimConfig,
    dataset: &Dataset,
    job: Job,
    factory: &dyn ProviderFactory,
) -> Result<JobOutcome, ExperimentError> {
    let config = configure_point(config, job.point)?;
    let world = World::prepare(&config, dataset, job.seed)?;
    let start = Instant::now();
    let result = match job.policy {
        PolicyKind::Llm => {
            let mut provider = factory.make(&config, job.seed);
            run_experiment(&world, &mut Ranker::Model(&mut *provider))?
        }
        PolicyKind::Popularity => run_experiment(&world, &mut Ranker::Popularity)?,
        PolicyKind::Random => run_experiment(&world, &mut Ranker::Random)?,
        PolicyKind::Clairvoyant => run_experiment(&world, &mut Ranker::Clairvoyant)?,
    };
    Ok(JobOutcome { job, config, result, wall_clock: start.elapsed() })
}

/// Runs every job on the rayon pool; output order follows `jobs`.
pub fn run_jobs(
    config: &SimConfig,
    dataset: &Dataset,
    jobs: &[Job],
    factory: &dyn ProviderFactory,
) -> Result<Vec<JobOutcome>, ExperimentError> {
    jobs.par_iter().map(|&job| run_job(config, dataset, job, factory)).collect()
}
