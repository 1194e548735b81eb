//! Round loop, per-round records and the two headline metrics.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::catalog::{
    assign_users, split_ratings, AssignError, ContentId, Dataset, DatasetError, RatingLog, UserId, VehicleAssignment,
};
use crate::config::{ConfigError, PolicyKind, SimConfig};
use crate::decision::{
    capacity_slots, map_list_to_decision, validate, CachingDecision, DecisionError, RankedList, Tier, ViolationReport,
};
use crate::delay::{round_delay, DelayError, DelayTables};
use crate::policy::{
    build_prompt, clairvoyant_place, PromptBundle, collect_info, popularity_rank, random_rank, rank_with_provider, ProviderRequest,
    RankProvider, SolverError,
};
use crate::scenario::{
    advance_vfc, build_initial_state, calibrate_arrival_scale, sample_requests, PlatoonState, ScenarioError, VfcState,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Assign(#[from] AssignError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Decision(#[from] DecisionError),
    #[error(transparent)]
    Delay(#[from] DelayError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("round {round}: {report}")]
    Invalid { round: u32, report: ViolationReport },
    #[error("no rounds to aggregate")]
    NoRounds,
}

/// Per-seed inputs shared by every policy.
#[derive(Debug, Clone)]
pub struct World {
    pub config: SimConfig,
    pub dataset: Dataset,
    pub train: RatingLog,
    pub test: RatingLog,
    pub test_by_user: BTreeMap<UserId, Vec<ContentId>>,
    pub assignment: VehicleAssignment,
    pub popularity: RankedList,
    pub seed: u64,
}

impl World {
    /// Truncates `dataset` to the configured size, splits ratings and
    /// places users on vehicles.
    pub fn prepare(config: &SimConfig, dataset: &Dataset, seed: u64) -> Result<Self, ExperimentError> {
        config.validate()?;
        let dataset = dataset.truncate(config.n_users, config.n_contents)?;
        let (train, test) = split_ratings(&dataset.ratings, config.test_fraction, seed);
        let assignment = assign_users(&dataset.users, config.n_platoon)?;
        let popularity = popularity_rank(&train, &dataset.catalog);
        Ok(Self {
            config: config.clone(),
            test_by_user: test.contents_by_user(),
            dataset,
            train,
            test,
            assignment,
            popularity,
            seed,
        })
    }
}

/// What drives the placement each round.
pub enum Ranker<'a> {
    Model(&'a mut dyn RankProvider),
    Popularity,
    Random,
    Clairvoyant,
}

impl Ranker<'_> {
    pub fn kind(&self) -> PolicyKind {
        match self {
            Self::Model(_) => PolicyKind::Llm,
            Self::Popularity => PolicyKind::Popularity,
            Self::Random => PolicyKind::Random,
            Self::Clairvoyant => PolicyKind::Clairvoyant,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestRecord {
    pub vehicle: usize,
    pub content: ContentId,
    pub users: Vec<UserId>,
    pub tier: Tier,
    pub delay_s: f64,
    pub hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    pub vfc_size: usize,
    pub vfc_capacities: Vec<u32>,
    pub decision_digest: String,
    pub platoon: Vec<Vec<ContentId>>,
    pub vfc: Vec<Vec<ContentId>>,
    pub requests: Vec<RequestRecord>,
    pub hits: usize,
    pub misses: usize,
    /// `None` when nobody requested anything this round.
    pub hit_ratio: Option<f64>,
    /// Excluded from ACHR, counted as zero delay in ACTD.
    pub zero_requests: bool,
    pub objective_s: f64,
    pub prompt_digest: Option<String>,
    /// Set when the model path failed and the popularity list was used.
    pub provider_error: Option<String>,
    /// Slots filled from the fallback ranking.
    pub padded: usize,
}

pub fn run_round(
    world: &World,
    platoon: &PlatoonState,
    vfc: &VfcState,
    ranker: &mut Ranker<'_>,
) -> Result<RoundRecord, ExperimentError> {
    let config = &world.config;
    let round = vfc.round;
    let catalog = &world.dataset.catalog;
    let requests = sample_requests(&world.test_by_user, &world.assignment, round, world.seed);
    let layout = capacity_slots(platoon, vfc, catalog.size_bytes());
    let tables = DelayTables::build(config, &config.channel_model(world.seed), platoon, vfc)?;

    let mut prompt_digest = None;
    let mut provider_error = None;
    let (decision, padded) = match ranker {
        Ranker::Model(provider) => {
            let info = collect_info(
                round,
                platoon,
                vfc,
                catalog,
                &world.dataset.users,
                &world.train,
                &world.assignment,
                config.prompt_top_t,
            );
            let prompt = build_prompt(&info);
            prompt_digest = Some(prompt.digest());
            let request = ProviderRequest { round, prompt: &prompt, info: &info };
            let list = match rank_with_provider(&mut **provider, &request) {
                Ok(list) => list,
                Err(e) => {
                    provider_error = Some(e.to_string());
                    world.popularity.clone()
                }
            };
            let mapped = map_list_to_decision(&list, &layout, catalog, &world.popularity)?;
            (mapped.decision, mapped.padded)
        }
        Ranker::Popularity => {
            let mapped = map_list_to_decision(&world.popularity, &layout, catalog, &world.popularity)?;
            (mapped.decision, mapped.padded)
        }
        Ranker::Random => {
            let list = random_rank(catalog, world.seed, round);
            let mapped = map_list_to_decision(&list, &layout, catalog, &world.popularity)?;
            (mapped.decision, mapped.padded)
        }
        Ranker::Clairvoyant => (clairvoyant_place(&requests, &layout, &tables, catalog)?, 0),
    };
    validate(&decision, &layout, catalog).map_err(|report| ExperimentError::Invalid { round, report })?;

    let delay = round_delay(&requests, &decision, &tables)?;
    let tiers = decision.tier_of();
    let records: Vec<RequestRecord> = requests
        .iter()
        .zip(&delay.per_request)
        .map(|((&(vehicle, content), users), (_, delay_s))| {
            let tier = tiers[&content];
            RequestRecord {
                vehicle,
                content,
                users: users.clone(),
                tier,
                delay_s: *delay_s,
                hit: matches!(tier, Tier::Platoon(_)),
            }
        })
        .collect();
    let hits = records.iter().filter(|r| r.hit).count();
    let misses = records.len() - hits;
    let CachingDecision { platoon: p, vfc: v, .. } = &decision;
    Ok(RoundRecord {
        round,
        vfc_size: vfc.len(),
        vfc_capacities: vfc.capacities().collect(),
        decision_digest: decision.digest(),
        platoon: p.clone(),
        vfc: v.clone(),
        requests: records,
        hits,
        misses,
        hit_ratio: (hits + misses > 0).then(|| hits as f64 / (hits + misses) as f64),
        zero_requests: hits + misses == 0,
        objective_s: delay.objective,
        prompt_digest,
        provider_error,
        padded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Mean over rounds with at least one request of the per-round hit
    /// ratio, in percent; 0 when no round had requests.
    pub achr_pct: f64,
    /// Mean per-round objective in seconds, over all rounds.
    pub actd_s: f64,
    pub mean_vfc_size: f64,
}

pub fn compute_metrics(records: &[RoundRecord]) -> Result<Metrics, ExperimentError> {
    if records.is_empty() {
        return Err(ExperimentError::NoRounds);
    }
    let ratios: Vec<f64> = records.iter().filter_map(|r| r.hit_ratio).collect();
    let achr_pct = if ratios.is_empty() {
        0.0
    } else {
        100.0 * ratios.iter().sum::<f64>() / ratios.len() as f64
    };
    let n = records.len() as f64;
    Ok(Metrics {
        achr_pct,
        actd_s: records.iter().map(|r| r.objective_s).sum::<f64>() / n,
        mean_vfc_size: records.iter().map(|r| r.vfc_size as f64).sum::<f64>() / n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub policy: PolicyKind,
    pub seed: u64,
    pub platoon_cache_units: usize,
    pub metrics: Metrics,
    pub rounds: Vec<RoundRecord>,
}

/// Runs every configured round for one policy. VFC membership evolves
/// between rounds; the platoon is fixed.
pub fn run_experiment(world: &World, ranker: &mut Ranker<'_>) -> Result<ExperimentResult, ExperimentError> {
    let config = &world.config;
    let (platoon, mut vfc) = build_initial_state(config, world.seed)?;
    let dynamics = config.vfc_dynamics();
    let mut rounds = Vec::with_capacity(config.rounds as usize);
    for r in 1..=config.rounds {
        if r > 1 {
            vfc = advance_vfc(&vfc, &dynamics, world.seed);
        }
        rounds.push(run_round(world, &platoon, &vfc, ranker)?);
    }
    Ok(ExperimentResult {
        policy: ranker.kind(),
        seed: world.seed,
        platoon_cache_units: config.n_platoon * config.platoon_slots(),
        metrics: compute_metrics(&rounds)?,
        rounds,
    })
}

/// The prompt the model path would see in `round`, without calling any
/// provider.
pub fn prompt_at_round(world: &World, round: u32) -> Result<PromptBundle, ExperimentError> {
    let config = &world.config;
    let (platoon, mut vfc) = build_initial_state(config, world.seed)?;
    let dynamics = config.vfc_dynamics();
    while vfc.round < round {
        vfc = advance_vfc(&vfc, &dynamics, world.seed);
    }
    let info = collect_info(
        vfc.round,
        &platoon,
        &vfc,
        &world.dataset.catalog,
        &world.dataset.users,
        &world.train,
        &world.assignment,
        config.prompt_top_t,
    );
    Ok(build_prompt(&info))
}

/// One setting of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SweepPoint {
    Base,
    CacheUnits(u32),
    VfcTarget(f64),
}

/// Cache-size points then VFC points, each varying one axis from the base
/// configuration; just the base when neither sweep is set.
pub fn sweep_points(config: &SimConfig) -> Vec<SweepPoint> {
    let mut points: Vec<SweepPoint> = config.sweep_cache_units.iter().map(|&u| SweepPoint::CacheUnits(u)).collect();
    points.extend(config.sweep_vfc.iter().map(|&v| SweepPoint::VfcTarget(v)));
    if points.is_empty() {
        points.push(SweepPoint::Base);
    }
    points
}

/// The configuration for one sweep point. A VFC target raises the VFC
/// bound to `vfc_sweep_k_max` and calibrates the arrival scale so the
/// long-run mean VFC size hits the target.
pub fn configure_point(base: &SimConfig, point: SweepPoint) -> Result<SimConfig, ExperimentError> {
    Ok(match point {
        SweepPoint::Base => base.clone(),
        SweepPoint::CacheUnits(units) => base.with_total_platoon_units(units),
        SweepPoint::VfcTarget(target) => {
            let mut c = base.clone();
            c.k_max = base.vfc_sweep_k_max;
            c.arrival_scale = calibrate_arrival_scale(&c.vfc_dynamics(), target)?;
            c
        }
    })
}
