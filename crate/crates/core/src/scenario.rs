//! Scenario files: JSON with log-scale radio fields, converted once at load.
//!
//! ```json
//! {
//!   "clusters": 4,
//!   "arena": { "x_max": 1000, "y_max": 1000, "h_min": 50, "h_max": 300, ... },
//!   "channel": { "carrier_frequency_hz": 2e9, "mu_los_db": 3, "mu_nlos_db": 23, ... },
//!   "radio": { "bandwidth_hz": 1e6, "p_max_dbm": 20 },
//!   "users": [ { "x": 10.5, "y": 200.0 }, { "x": 40, "y": 3, "snr_target_db": 5 } ]
//! }
//! ```
//!
//! Every section except `users` and `clusters` may be omitted and falls back
//! to its defaults. Unknown fields are rejected.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{db_to_linear, dbm_to_watts, ChannelParams, SPEED_OF_LIGHT};
use crate::clustering::{GaConfig, Point2};
use crate::qoe::MosProfile;
use crate::rl::QLearnConfig;
use crate::world::{Arena, GridPos, MobilityConfig, RadioConfig, UserState, World, WorldError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario parse error at `{path}` (line {line}, column {column}): {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    World(#[from] WorldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSpec {
    pub carrier_frequency_hz: f64,
    pub path_loss_exponent: f64,
    pub b1: f64,
    pub b2: f64,
    pub zeta_deg: f64,
    pub mu_los_db: f64,
    pub mu_nlos_db: f64,
    pub noise_psd_dbm_hz: f64,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        let p = ChannelParams::default();
        Self {
            carrier_frequency_hz: p.carrier_frequency,
            path_loss_exponent: p.path_loss_exponent,
            b1: p.b1,
            b2: p.b2,
            zeta_deg: p.zeta_deg,
            mu_los_db: 3.0,
            mu_nlos_db: 23.0,
            noise_psd_dbm_hz: -170.0,
        }
    }
}

impl ChannelSpec {
    pub fn to_params(&self) -> ChannelParams {
        ChannelParams {
            carrier_frequency: self.carrier_frequency_hz,
            light_speed: SPEED_OF_LIGHT,
            path_loss_exponent: self.path_loss_exponent,
            b1: self.b1,
            b2: self.b2,
            zeta_deg: self.zeta_deg,
            mu_los: db_to_linear(self.mu_los_db),
            mu_nlos: db_to_linear(self.mu_nlos_db),
            noise_psd: dbm_to_watts(self.noise_psd_dbm_hz),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioSpec {
    /// Bandwidth per UAV.
    pub bandwidth_hz: f64,
    /// Maximum transmit power per UAV.
    pub p_max_dbm: f64,
}

impl Default for RadioSpec {
    fn default() -> Self {
        Self {
            bandwidth_hz: 1.0e6,
            p_max_dbm: 20.0,
        }
    }
}

impl RadioSpec {
    pub fn to_config(&self) -> RadioConfig {
        RadioConfig {
            bandwidth: self.bandwidth_hz,
            p_max: dbm_to_watts(self.p_max_dbm),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSpec {
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_target_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<MosProfile>,
}

fn default_snr_target_db() -> f64 {
    0.0
}

fn default_exhaustive_cap() -> usize {
    crate::baselines::DEFAULT_EXHAUSTIVE_CAP
}

/// On-disk scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Number of UAVs, one per cluster.
    pub clusters: usize,
    #[serde(default)]
    pub arena: Arena,
    #[serde(default)]
    pub channel: ChannelSpec,
    #[serde(default)]
    pub radio: RadioSpec,
    #[serde(default)]
    pub mobility: MobilityConfig,
    #[serde(default)]
    pub clustering: GaConfig,
    #[serde(default)]
    pub qlearning: QLearnConfig,
    /// Profile for users without their own.
    #[serde(default)]
    pub profile: MosProfile,
    #[serde(default = "default_snr_target_db")]
    pub snr_target_db: f64,
    #[serde(default = "default_exhaustive_cap")]
    pub exhaustive_cap: usize,
    pub users: Vec<UserSpec>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            ScenarioError::Parse {
                path,
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.clusters == 0 {
            return Err(ScenarioError::Invalid("clusters must be at least 1".into()));
        }
        if self.users.len() < self.clusters {
            return Err(ScenarioError::Invalid(format!(
                "{} users cannot fill {} clusters",
                self.users.len(),
                self.clusters
            )));
        }
        self.arena.validate()?;
        self.channel
            .to_params()
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        self.clustering
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        self.qlearning
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        if self.mobility.c_max < 0.0 || !self.mobility.c_max.is_finite() {
            return Err(ScenarioError::Invalid("mobility.c_max must be >= 0".into()));
        }
        for (i, u) in self.users.iter().enumerate() {
            if !self.arena.contains_point(Point2::new(u.x, u.y)) {
                return Err(ScenarioError::Invalid(format!("user {i} at ({}, {}) is outside the arena", u.x, u.y)));
            }
        }
        Ok(())
    }

    pub fn user_positions(&self) -> Vec<Point2> {
        self.users.iter().map(|u| Point2::new(u.x, u.y)).collect()
    }

    /// Users with linear SNR targets, all provisionally in cluster 0.
    pub fn user_states(&self) -> Vec<UserState> {
        self.users
            .iter()
            .enumerate()
            .map(|(id, u)| UserState {
                id,
                position: Point2::new(u.x, u.y),
                snr_target: db_to_linear(u.snr_target_db.unwrap_or(self.snr_target_db)),
                profile: u.profile.unwrap_or(self.profile),
                cluster: 0,
            })
            .collect()
    }

    /// World with the given cluster assignment and UAVs above the centroids
    /// at the lowest altitude level.
    pub fn world(&self, assignments: &[usize], centroids: &[Point2]) -> Result<World, ScenarioError> {
        let mut users = self.user_states();
        for (u, &c) in users.iter_mut().zip(assignments) {
            u.cluster = c;
        }
        let uavs: Vec<GridPos> = centroids
            .iter()
            .map(|c| self.arena.snap(c.x, c.y, self.arena.h_min))
            .collect();
        Ok(World::new(
            self.arena,
            self.channel.to_params(),
            self.radio.to_config(),
            users,
            uavs,
        )?)
    }
}

/// `users` uniform over the arena floor, with default settings throughout.
pub fn generate_scenario(users: usize, uavs: usize, arena: Arena, seed: u64) -> Result<Scenario, ScenarioError> {
    if users == 0 || uavs == 0 {
        return Err(ScenarioError::Invalid("user and UAV counts must be at least 1".into()));
    }
    arena.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users = (0..users)
        .map(|_| UserSpec {
            x: rng.gen_range(0.0..=arena.x_max),
            y: rng.gen_range(0.0..=arena.y_max),
            snr_target_db: None,
            profile: None,
        })
        .collect();
    let scenario = Scenario {
        clusters: uavs,
        arena,
        channel: ChannelSpec::default(),
        radio: RadioSpec::default(),
        mobility: MobilityConfig { rng_seed: seed, ..MobilityConfig::default() },
        clustering: GaConfig { rng_seed: seed, ..GaConfig::default() },
        qlearning: QLearnConfig { rng_seed: seed, ..QLearnConfig::default() },
        profile: MosProfile::default(),
        snr_target_db: default_snr_target_db(),
        exhaustive_cap: default_exhaustive_cap(),
        users,
    };
    scenario.validate()?;
    Ok(scenario)
}
