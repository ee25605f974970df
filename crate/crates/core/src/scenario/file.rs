//! Flat key-value (TOML) config file.
//!
//! ```toml
//! M = 8
//! N = 25
//! L = 26                   # optional, default N+1
//! sigma_s_sq_dbm = -70.0
//! sigma_sq_dbm = -80.0
//! beta_max_db = 19.0
//! d_bs_ris = 20.0
//! pl_exponent_ris_bs = 2.5 # optional
//! pl_ref_db = -30.0        # optional
//! pl_exponent_user_ris = 2.5
//! pl_exponent_user_bs = 3.5
//! seed = 0
//! despread_mode = "ideal"  # ideal | full
//! scheme = "dft-mfris"
//! surface_noise = "shared" # shared | per-antenna
//! fair_comparison = true
//!
//! [[users]]
//! side = "reflect"
//! power_dbm = 20.0
//! d_ris = 5.0
//! d_bs = 20.0
//! ```
//!
//! `M`, `N`, the two noise powers, `beta_max_db`, `d_bs_ris` and `users` are
//! mandatory; everything else falls back to the reference scenario.

use serde::{Deserialize, Serialize};

use super::{
    db_to_linear, dbm_to_watts, linear_to_db, validate, watts_to_dbm, DespreadMode, Scheme,
    Side, SurfaceNoise, SystemConfig, UserSpec,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(rename = "M")]
    pub antennas: usize,
    #[serde(rename = "N")]
    pub elements: usize,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub pilot_len: Option<usize>,
    pub sigma_s_sq_dbm: f64,
    pub sigma_sq_dbm: f64,
    pub beta_max_db: f64,
    pub d_bs_ris: f64,
    #[serde(default = "defaults::exp_ris_bs")]
    pub pl_exponent_ris_bs: f64,
    #[serde(default = "defaults::pl_ref_db")]
    pub pl_ref_db: f64,
    #[serde(default = "defaults::exp_user_ris")]
    pub pl_exponent_user_ris: f64,
    #[serde(default = "defaults::exp_user_bs")]
    pub pl_exponent_user_bs: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub despread_mode: DespreadMode,
    #[serde(default = "defaults::scheme")]
    pub scheme: String,
    #[serde(default)]
    pub surface_noise: SurfaceNoise,
    #[serde(default = "defaults::fair")]
    pub fair_comparison: bool,
    pub users: Vec<UserEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserEntry {
    pub side: Side,
    pub power_dbm: f64,
    pub d_ris: f64,
    pub d_bs: f64,
}

mod defaults {
    pub fn exp_ris_bs() -> f64 {
        2.5
    }
    pub fn pl_ref_db() -> f64 {
        -30.0
    }
    pub fn exp_user_ris() -> f64 {
        2.5
    }
    pub fn exp_user_bs() -> f64 {
        3.5
    }
    pub fn scheme() -> String {
        "dft-mfris".into()
    }
    pub fn fair() -> bool {
        true
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigFile(e.message().to_string()))
    }

    /// Converts to linear units and validates.
    pub fn into_config(self) -> Result<SystemConfig> {
        let users = self
            .users
            .iter()
            .map(|u| UserSpec::new(u.side, dbm_to_watts(u.power_dbm), u.d_ris, u.d_bs))
            .collect::<Vec<_>>();
        let cfg = SystemConfig {
            antennas: self.antennas,
            elements: self.elements,
            pilot_len: self
                .pilot_len
                .unwrap_or_else(|| (self.elements + 1).max(users.len())),
            users,
            surface_noise_power: dbm_to_watts(self.sigma_s_sq_dbm),
            receiver_noise_power: dbm_to_watts(self.sigma_sq_dbm),
            beta_max: db_to_linear(self.beta_max_db),
            d_bs_ris: self.d_bs_ris,
            pl_exponent_ris_bs: self.pl_exponent_ris_bs,
            pl_ref: db_to_linear(self.pl_ref_db),
            pl_exponent_user_ris: self.pl_exponent_user_ris,
            pl_exponent_user_bs: self.pl_exponent_user_bs,
            seed: self.seed,
            despread_mode: self.despread_mode,
            scheme: self.scheme.parse::<Scheme>()?,
            surface_noise: self.surface_noise,
            fair_comparison: self.fair_comparison,
        };
        validate(cfg)
    }

    /// Fully resolved file for a config (every key written).
    pub fn from_config(cfg: &SystemConfig) -> Self {
        Self {
            antennas: cfg.antennas,
            elements: cfg.elements,
            pilot_len: Some(cfg.pilot_len),
            sigma_s_sq_dbm: watts_to_dbm(cfg.surface_noise_power),
            sigma_sq_dbm: watts_to_dbm(cfg.receiver_noise_power),
            beta_max_db: linear_to_db(cfg.beta_max),
            d_bs_ris: cfg.d_bs_ris,
            pl_exponent_ris_bs: cfg.pl_exponent_ris_bs,
            pl_ref_db: linear_to_db(cfg.pl_ref),
            pl_exponent_user_ris: cfg.pl_exponent_user_ris,
            pl_exponent_user_bs: cfg.pl_exponent_user_bs,
            seed: cfg.seed,
            despread_mode: cfg.despread_mode,
            scheme: cfg.scheme.tag().to_string(),
            surface_noise: cfg.surface_noise,
            fair_comparison: cfg.fair_comparison,
            users: cfg
                .users
                .iter()
                .map(|u| UserEntry {
                    side: u.side,
                    power_dbm: watts_to_dbm(u.power),
                    d_ris: u.distance_to_ris,
                    d_bs: u.distance_to_bs,
                })
                .collect(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config file serializes")
    }
}

impl SystemConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        ConfigFile::parse(text)?.into_config()
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        ConfigFile::from_config(self).to_toml()
    }
}
