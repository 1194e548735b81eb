mod common;

use std::collections::BTreeSet;

use common::{small_config, small_dataset};
use platoon_cache_core::config::SimConfig;
use platoon_cache_core::decision::Tier;
use platoon_cache_core::experiment::{compute_metrics, run_experiment, run_round, Ranker, World};
use platoon_cache_core::policy::{build_prompt, collect_info, MockProvider};
use platoon_cache_core::scenario::{advance_vfc, build_initial_state, sample_requests};

fn world(config: &SimConfig, seed: u64) -> World {
    World::prepare(config, &small_dataset(16, 60, 14), seed).unwrap()
}

#[test]
fn prompt_history_never_contains_test_ratings() {
    let config = small_config(16, 60);
    for seed in 1..=5 {
        let w = world(&config, seed);
        let test: BTreeSet<_> = w.test.entries.iter().map(|r| (r.user, r.content)).collect();
        let (platoon, mut vfc) = build_initial_state(&config, seed).unwrap();
        for round in 1..=config.rounds {
            if round > 1 {
                vfc = advance_vfc(&vfc, &config.vfc_dynamics(), seed);
            }
            let info = collect_info(
                round,
                &platoon,
                &vfc,
                &w.dataset.catalog,
                &w.dataset.users,
                &w.train,
                &w.assignment,
                config.prompt_top_t,
            );
            assert!(info.history.iter().all(|(u, f, _)| !test.contains(&(*u, *f))));
            let requests = sample_requests(&w.test_by_user, &w.assignment, round, seed);
            let prompt = build_prompt(&info);
            for (&(_, f), users) in requests.iter() {
                for u in users {
                    assert!(!info.history.iter().any(|(hu, hf, _)| hu == u && *hf == f));
                    let needle = format!("[{u}, {f}, ");
                    assert!(!prompt.info_text.contains(&needle), "{needle} leaked");
                }
            }
        }
    }
}

#[test]
fn prompt_reports_live_capacities() {
    let config = small_config(16, 60);
    let w = world(&config, 3);
    let (platoon, vfc) = build_initial_state(&config, 3).unwrap();
    let info = collect_info(1, &platoon, &vfc, &w.dataset.catalog, &w.dataset.users, &w.train, &w.assignment, 10);
    let p = build_prompt(&info);
    let caps: Vec<u32> = vfc.capacities().collect();
    assert!(p.info_text.starts_with(&format!("Cache capacities: Platoon (1200), VFC ({caps:?})")));
    assert!(p.task_text.contains("A list of movie IDs"));
    assert!(p.task_text.contains("The leader vehicle serves users with IDs 1 to 4."));
    assert!(p.task_text.contains("Vehicle 4 serves users with IDs 13 to 16."));
    assert!(p.task_text.contains("Strict priority: Platoon > VFC"));
    let slots: usize = 12 + caps.iter().map(|c| (c / 100) as usize).sum::<usize>();
    assert!(p.task_text.contains(&format!("at most {slots} movie IDs")));
    assert!(p.assembled.starts_with("### Role\n"));
    assert_eq!(p.digest().len(), 64);
}

#[test]
fn mock_runs_are_reproducible() {
    let config = small_config(16, 60);
    let w = world(&config, 11);
    let run = || {
        let mut mock = MockProvider { seed: 11 };
        run_experiment(&w, &mut Ranker::Model(&mut mock)).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    assert_eq!(a.rounds.len(), 4);
    assert!(a.rounds.iter().all(|r| r.provider_error.is_none() && r.prompt_digest.is_some()));
}

#[test]
fn objective_matches_hand_computed_link_budget() {
    let config = small_config(16, 60);
    let w = world(&config, 5);
    let (platoon, vfc) = build_initial_state(&config, 5).unwrap();
    let record = run_round(&w, &platoon, &vfc, &mut Ranker::Popularity).unwrap();

    let watt = |dbm: f64| 10f64.powf((dbm - 30.0) / 10.0);
    let rate = |bw: f64, p_dbm: f64, d: f64| bw * (1.0 + watt(p_dbm) * 1e-5 * d.powf(-3.0) / watt(-114.0)).log2();
    let v2v = |d: f64| rate(1.0e6, 23.0, d);
    let hop = |i: usize, j: usize| 800.0 / v2v(20.0 * (i as f64 - j as f64).abs());
    let to_leader = |i: usize| if i == 0 { 0.0 } else { hop(i, 0) };
    let mut total = 0.0;
    for r in &record.requests {
        let t = match r.tier {
            Tier::Platoon(j) if j == r.vehicle => 0.0,
            Tier::Platoon(j) => hop(r.vehicle, j),
            Tier::Vfc(k) => 800.0 / v2v(vfc.vehicles[k].distance_m) + to_leader(r.vehicle),
            Tier::Cloud => 800.0 / 8.0e5 + 800.0 / rate(540.0e3, 30.0, 100.0) + to_leader(r.vehicle),
        };
        assert!((t - r.delay_s).abs() <= 1e-12 * t.max(1e-9));
        total += t;
    }
    let expected = total / 4.0;
    assert!((record.objective_s - expected).abs() <= 1e-12 * expected);
    assert_eq!(record.hits + record.misses, record.requests.len());
}

#[test]
fn hits_are_platoon_placements_only() {
    let config = small_config(16, 60);
    let w = world(&config, 2);
    let (platoon, vfc) = build_initial_state(&config, 2).unwrap();
    let r = run_round(&w, &platoon, &vfc, &mut Ranker::Clairvoyant).unwrap();
    for q in &r.requests {
        assert_eq!(q.hit, matches!(q.tier, Tier::Platoon(_)));
        if q.tier == Tier::Platoon(q.vehicle) {
            assert_eq!(q.delay_s, 0.0);
        }
    }
}

#[test]
fn platoon_smaller_than_one_content_misses_everything() {
    let mut config = small_config(16, 60);
    config.m_p_bytes = 99;
    let w = world(&config, 4);
    for ranker in [Ranker::Popularity, Ranker::Clairvoyant] {
        let mut ranker = ranker;
        let result = run_experiment(&w, &mut ranker).unwrap();
        for r in &result.rounds {
            assert_eq!(r.hits, 0);
            assert!(r.requests.iter().all(|q| !matches!(q.tier, Tier::Platoon(_))));
        }
        assert_eq!(result.metrics.achr_pct, 0.0);
    }
}

#[test]
fn single_round_achr_is_that_rounds_ratio() {
    let mut config = small_config(16, 60);
    config.rounds = 1;
    let w = world(&config, 8);
    let result = run_experiment(&w, &mut Ranker::Popularity).unwrap();
    let r = &result.rounds[0];
    assert_eq!(result.metrics.achr_pct, 100.0 * r.hits as f64 / (r.hits + r.misses) as f64);
    assert_eq!(compute_metrics(&result.rounds).unwrap(), result.metrics);
}

#[test]
fn clairvoyant_dominates_every_round() {
    for seed in 1..=10 {
        let mut config = small_config(16, 60);
        config.rounds = 6;
        let w = world(&config, seed);
        let best = run_experiment(&w, &mut Ranker::Clairvoyant).unwrap();
        let mut mock = MockProvider { seed };
        for mut ranker in [Ranker::Popularity, Ranker::Random, Ranker::Model(&mut mock)] {
            let other = run_experiment(&w, &mut ranker).unwrap();
            for (b, o) in best.rounds.iter().zip(&other.rounds) {
                assert!(b.objective_s <= o.objective_s, "seed {seed} round {}", b.round);
            }
        }
    }
}
