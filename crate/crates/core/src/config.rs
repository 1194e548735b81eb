//! Flat experiment configuration. Defaults reproduce the reference system
//! parameters (1 MHz / 540 kHz bandwidths, 23 / 30 dBm, -114 dBm noise,
//! 0.8 Mbit/s backhaul, ten 1000-byte platoon caches, 100-byte contents).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelModel, Fading};
use crate::scenario::VfcDynamics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Llm,
    Popularity,
    Random,
    Clairvoyant,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Llm => "llm",
            Self::Popularity => "popularity",
            Self::Random => "random",
            Self::Clairvoyant => "clairvoyant",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "llm" => Self::Llm,
            "popularity" => Self::Popularity,
            "random" => Self::Random,
            "clairvoyant" => Self::Clairvoyant,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Mock,
    Recorded,
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FadingMode {
    Deterministic,
    Rayleigh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    // dataset
    pub users_path: String,
    pub movies_path: String,
    pub ratings_path: String,
    pub n_users: usize,
    pub n_contents: usize,
    pub s_bytes: u32,
    pub test_fraction: f64,

    // platoon
    pub n_platoon: usize,
    pub spacing_m: f64,
    pub v_p_kmh: f64,
    pub m_p_bytes: u32,

    // vehicular fog cache
    pub k_max: usize,
    pub m_min_bytes: u32,
    pub m_max_bytes: u32,
    pub vfc_min_distance_m: f64,
    pub comm_radius_m: f64,
    pub lambda_v: f64,
    pub mu_v: f64,
    pub departure_norm: f64,
    pub arrival_scale: f64,
    pub vfc_sweep_k_max: usize,

    // channel
    pub b_v2v_hz: f64,
    pub b_v2i_hz: f64,
    pub p_v_dbm: f64,
    pub p_r_dbm: f64,
    pub noise_dbm: f64,
    pub g0: f64,
    pub eta: f64,
    pub fading_mode: FadingMode,
    pub rsu_distance_m: f64,
    pub r_rc_bps: f64,

    // experiment
    pub rounds: u32,
    pub seeds: Vec<u64>,
    pub policies: Vec<PolicyKind>,
    pub sweep_cache_units: Vec<u32>,
    pub sweep_vfc: Vec<f64>,
    pub prompt_top_t: usize,

    // provider
    pub provider: ProviderKind,
    pub endpoint: Option<String>,
    pub model: String,
    pub temperature: f64,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub api_key_env: String,
    pub record_path: Option<String>,

    // carried for provenance only; no code path reads them
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            users_path: "users.dat".into(),
            movies_path: "movies.dat".into(),
            ratings_path: "ratings.dat".into(),
            n_users: 30,
            n_contents: 2000,
            s_bytes: 100,
            test_fraction: 0.2,
            n_platoon: 10,
            spacing_m: 20.0,
            v_p_kmh: 55.0,
            m_p_bytes: 1000,
            k_max: 10,
            m_min_bytes: 600,
            m_max_bytes: 1500,
            vfc_min_distance_m: 200.0,
            comm_radius_m: 400.0,
            lambda_v: 9.0,
            mu_v: 8.0,
            departure_norm: 1.0,
            arrival_scale: 1.0,
            vfc_sweep_k_max: 40,
            b_v2v_hz: 1.0e6,
            b_v2i_hz: 540.0e3,
            p_v_dbm: 23.0,
            p_r_dbm: 30.0,
            noise_dbm: -114.0,
            g0: 1.0e-5,
            eta: 3.0,
            fading_mode: FadingMode::Deterministic,
            rsu_distance_m: 100.0,
            r_rc_bps: 800_000.0,
            rounds: 12,
            seeds: vec![1],
            policies: vec![
                PolicyKind::Llm,
                PolicyKind::Popularity,
                PolicyKind::Random,
                PolicyKind::Clairvoyant,
            ],
            sweep_cache_units: Vec::new(),
            sweep_vfc: Vec::new(),
            prompt_top_t: 200,
            provider: ProviderKind::Mock,
            endpoint: None,
            model: "mock".into(),
            temperature: 0.0,
            timeout_ms: 30_000,
            max_retries: 2,
            api_key_env: "OPENAI_API_KEY".into(),
            record_path: None,
            alpha: 0.75,
            beta: 0.25,
            gamma: 0.002,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid value for {key}: {reason}")]
    Invalid { key: &'static str, reason: &'static str },
}

fn check(ok: bool, key: &'static str, reason: &'static str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Invalid { key, reason })
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        check(self.n_users >= 1, "n_users", "must be >= 1")?;
        check(self.n_contents >= 1, "n_contents", "must be >= 1")?;
        check(self.s_bytes > 0, "s_bytes", "must be > 0")?;
        check(self.test_fraction > 0.0 && self.test_fraction < 1.0, "test_fraction", "must lie in (0, 1)")?;
        check(self.n_platoon >= 1, "n_platoon", "must be >= 1")?;
        check(self.n_platoon <= self.n_users, "n_platoon", "must not exceed n_users")?;
        check(finite_pos(self.spacing_m), "spacing_m", "must be > 0")?;
        check(self.k_max >= 1, "k_max", "must be >= 1")?;
        check(self.m_min_bytes <= self.m_max_bytes, "m_min_bytes", "must not exceed m_max_bytes")?;
        check(
            self.vfc_min_distance_m >= 0.0 && self.vfc_min_distance_m.is_finite(),
            "vfc_min_distance_m",
            "must be >= 0",
        )?;
        check(
            self.comm_radius_m.is_finite() && self.comm_radius_m > self.vfc_min_distance_m,
            "comm_radius_m",
            "must exceed vfc_min_distance_m",
        )?;
        check(self.lambda_v >= 0.0 && self.lambda_v.is_finite(), "lambda_v", "must be >= 0")?;
        check(self.mu_v >= 0.0 && self.mu_v.is_finite(), "mu_v", "must be >= 0")?;
        check(self.departure_norm >= 0.0, "departure_norm", "must be >= 0")?;
        check(self.arrival_scale >= 0.0, "arrival_scale", "must be >= 0")?;
        check(self.vfc_sweep_k_max >= 1, "vfc_sweep_k_max", "must be >= 1")?;
        check(finite_pos(self.b_v2v_hz), "b_v2v_hz", "must be > 0")?;
        check(finite_pos(self.b_v2i_hz), "b_v2i_hz", "must be > 0")?;
        check(self.p_v_dbm.is_finite(), "p_v_dbm", "must be finite")?;
        check(self.p_r_dbm.is_finite(), "p_r_dbm", "must be finite")?;
        check(self.noise_dbm.is_finite(), "noise_dbm", "must be finite")?;
        check(finite_pos(self.g0), "g0", "must be > 0")?;
        check(self.eta >= 2.0 && self.eta.is_finite(), "eta", "must be >= 2")?;
        check(finite_pos(self.rsu_distance_m), "rsu_distance_m", "must be > 0")?;
        check(finite_pos(self.r_rc_bps), "r_rc_bps", "must be > 0")?;
        check(self.rounds >= 1, "rounds", "must be >= 1")?;
        check(!self.seeds.is_empty(), "seeds", "must list at least one seed")?;
        check(!self.policies.is_empty(), "policies", "must list at least one policy")?;
        check(self.sweep_cache_units.iter().all(|&u| u > 0), "sweep_cache_units", "values must be > 0")?;
        check(self.sweep_vfc.iter().all(|&v| v >= 1.0 && v.is_finite()), "sweep_vfc", "values must be >= 1")?;
        check(
            self.sweep_vfc.iter().all(|&v| v <= self.vfc_sweep_k_max as f64),
            "sweep_vfc",
            "values must not exceed vfc_sweep_k_max",
        )?;
        check(self.temperature >= 0.0, "temperature", "must be >= 0")?;
        check(self.timeout_ms > 0, "timeout_ms", "must be > 0")?;
        match self.provider {
            ProviderKind::Http => check(self.endpoint.is_some(), "endpoint", "required for the http provider")?,
            ProviderKind::Recorded => check(self.record_path.is_some(), "record_path", "required for the recorded provider")?,
            ProviderKind::Mock => {}
        }
        Ok(())
    }

    pub fn channel_model(&self, seed: u64) -> ChannelModel {
        ChannelModel {
            g0: self.g0,
            eta: self.eta,
            fading: match self.fading_mode {
                FadingMode::Deterministic => Fading::Deterministic,
                FadingMode::Rayleigh => Fading::Rayleigh { seed },
            },
        }
    }

    pub fn vfc_dynamics(&self) -> VfcDynamics {
        VfcDynamics {
            lambda_v: self.lambda_v,
            mu_v: self.mu_v,
            k_max: self.k_max,
            departure_norm: self.departure_norm,
            arrival_scale: self.arrival_scale,
            m_min_bytes: self.m_min_bytes,
            m_max_bytes: self.m_max_bytes,
            min_distance_m: self.vfc_min_distance_m,
            comm_radius_m: self.comm_radius_m,
        }
    }

    /// Item slots per platoon vehicle.
    pub fn platoon_slots(&self) -> usize {
        (self.m_p_bytes / self.s_bytes) as usize
    }

    /// Sets the per-vehicle platoon capacity from a total cache size in
    /// content units, flooring the per-vehicle share.
    pub fn with_total_platoon_units(&self, units: u32) -> Self {
        let mut c = self.clone();
        c.m_p_bytes = (units / self.n_platoon as u32) * self.s_bytes;
        c
    }
}
