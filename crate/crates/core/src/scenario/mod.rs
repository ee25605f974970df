//! Scenario configuration, unit conversion and validation.
//!
//! Everything inside the crate works in linear units (watts, linear gains).
//! dBm / dB only appear in the config file and on the command line.

mod file;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

pub use file::ConfigFile;

/// Which half-space of the surface a user sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Reflect,
    Refract,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Reflect, Side::Refract];

    pub fn other(self) -> Side {
        match self {
            Side::Reflect => Side::Refract,
            Side::Refract => Side::Reflect,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Reflect => 0,
            Side::Refract => 1,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Reflect => "reflect",
            Side::Refract => "refract",
        })
    }
}

/// How the per-user pilot contribution is isolated at the BS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DespreadMode {
    /// Cross-user terms are dropped; each user's despread block is synthesized directly.
    #[default]
    Ideal,
    /// All users transmit together and the block is despread with the conjugate pilot.
    Full,
}

impl FromStr for DespreadMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(DespreadMode::Ideal),
            "full" => Ok(DespreadMode::Full),
            _ => Err(Error::ConfigFile(format!("unknown despread mode `{s}`"))),
        }
    }
}

/// Whether surface thermal noise is one physical draw seen by every antenna,
/// or an independent draw per antenna (the per-antenna analysis model).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceNoise {
    #[default]
    Shared,
    PerAntenna,
}

/// Surface scheme under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Scheme {
    /// MF-RIS with DFT training beams and optimized amplification.
    #[default]
    DftMfris,
    /// MF-RIS with one element switched on per slot.
    OnOffMfris,
    /// Passive simultaneous transmitting/reflecting surface, equal energy split.
    Star,
    /// Reflect-only amplifying surface.
    Active,
    /// Reflect-only unit-modulus surface.
    Passive,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::DftMfris,
        Scheme::OnOffMfris,
        Scheme::Star,
        Scheme::Active,
        Scheme::Passive,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Scheme::DftMfris => "dft-mfris",
            Scheme::OnOffMfris => "onoff-mfris",
            Scheme::Star => "star",
            Scheme::Active => "active",
            Scheme::Passive => "passive",
        }
    }

    /// Surfaces that can only serve the reflect half-space.
    pub fn reflect_only(self) -> bool {
        matches!(self, Scheme::Active | Scheme::Passive)
    }

    /// Surfaces that inject thermal noise (i.e. have active amplifiers).
    pub fn amplifies(self) -> bool {
        matches!(self, Scheme::DftMfris | Scheme::OnOffMfris | Scheme::Active)
    }

    /// Parse a comma-separated list of tags.
    pub fn parse_list(s: &str) -> Result<Vec<Scheme>> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.tag() == s)
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

/// One single-antenna user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserSpec {
    pub side: Side,
    /// Transmit power in watts.
    pub power: f64,
    /// Meters.
    pub distance_to_ris: f64,
    /// Meters.
    pub distance_to_bs: f64,
}

impl UserSpec {
    pub fn new(side: Side, power: f64, distance_to_ris: f64, distance_to_bs: f64) -> Self {
        Self {
            side,
            power,
            distance_to_ris,
            distance_to_bs,
        }
    }
}

/// All scalars of one scenario, in linear units.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// BS antenna count M.
    pub antennas: usize,
    /// Surface element count N.
    pub elements: usize,
    pub users: Vec<UserSpec>,
    /// Pilot length L.
    pub pilot_len: usize,
    /// Surface thermal noise power σ_s² (W).
    pub surface_noise_power: f64,
    /// Receiver noise power σ² (W).
    pub receiver_noise_power: f64,
    /// Maximum amplification factor β_max (linear).
    pub beta_max: f64,
    /// BS–surface distance d (m).
    pub d_bs_ris: f64,
    pub pl_exponent_ris_bs: f64,
    /// Reference path loss at 1 m (linear).
    pub pl_ref: f64,
    pub pl_exponent_user_ris: f64,
    pub pl_exponent_user_bs: f64,
    pub seed: u64,
    pub despread_mode: DespreadMode,
    pub scheme: Scheme,
    pub surface_noise: SurfaceNoise,
    /// Relocate every user to the reflect side for reflect-only baselines.
    pub fair_comparison: bool,
}

impl Default for SystemConfig {
    /// The reference scenario: N = 25, M = 8, one user per side at 20 dBm,
    /// β_max = 19 dB, σ_s² = −70 dBm, σ² = −80 dBm, d = 20 m.
    fn default() -> Self {
        let p = dbm_to_watts(20.0);
        Self {
            antennas: 8,
            elements: 25,
            users: vec![
                UserSpec::new(Side::Reflect, p, 5.0, 20.0),
                UserSpec::new(Side::Refract, p, 5.0, 20.0),
            ],
            pilot_len: 26,
            surface_noise_power: dbm_to_watts(-70.0),
            receiver_noise_power: dbm_to_watts(-80.0),
            beta_max: db_to_linear(19.0),
            d_bs_ris: 20.0,
            pl_exponent_ris_bs: 2.5,
            pl_ref: 1e-3,
            pl_exponent_user_ris: 2.5,
            pl_exponent_user_bs: 3.5,
            seed: 0,
            despread_mode: DespreadMode::Ideal,
            scheme: Scheme::DftMfris,
            surface_noise: SurfaceNoise::Shared,
            fair_comparison: true,
        }
    }
}

impl SystemConfig {
    /// User count K.
    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    /// Linear RIS–BS path-loss gain α.
    pub fn alpha(&self) -> f64 {
        path_loss_unchecked(self.d_bs_ris, self.pl_exponent_ris_bs, self.pl_ref)
    }

    /// β_max·α, the bound on a_R² + a_T².
    pub fn amplitude_budget(&self) -> f64 {
        self.beta_max * self.alpha()
    }

    pub fn users_on(&self, side: Side) -> impl Iterator<Item = (usize, &UserSpec)> {
        self.users
            .iter()
            .enumerate()
            .filter(move |(_, u)| u.side == side)
    }

    pub fn count_on(&self, side: Side) -> usize {
        self.users_on(side).count()
    }

    /// Sets every user's transmit power.
    pub fn with_equal_power(mut self, watts: f64) -> Self {
        for u in &mut self.users {
            u.power = watts;
        }
        self
    }

    /// Sets L to its smallest admissible value max(N+1, K).
    pub fn with_minimal_pilots(mut self) -> Self {
        self.pilot_len = (self.elements + 1).max(self.users.len());
        self
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Large-scale gain `reference · distance^(−exponent)`.
pub fn path_loss(distance: f64, exponent: f64, reference: f64) -> Result<f64> {
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(Error::InvalidConfig(vec![Violation::new(
            "distance",
            format!("distance > 0 (got {distance})"),
        )]));
    }
    Ok(path_loss_unchecked(distance, exponent, reference))
}

fn path_loss_unchecked(distance: f64, exponent: f64, reference: f64) -> f64 {
    reference * distance.powf(-exponent)
}

/// Checks every invariant and reports all violations at once.
pub fn validate(config: SystemConfig) -> Result<SystemConfig> {
    let mut v = Vec::new();
    let n = config.elements;
    let k = config.users.len();
    let l = config.pilot_len;

    if config.antennas < 1 {
        v.push(Violation::new("antennas", "M ≥ 1"));
    }
    if n < 1 {
        v.push(Violation::new("elements", "N ≥ 1"));
    }
    if k < 1 {
        v.push(Violation::new("users", "K ≥ 1"));
    }
    if l < n + 1 {
        v.push(Violation::new("pilot_len", "L ≥ N+1"));
    }
    if l < k {
        v.push(Violation::new("pilot_len", "L ≥ K"));
    }
    if !(config.beta_max >= 1.0) || !config.beta_max.is_finite() {
        v.push(Violation::new("beta_max", "beta_max ≥ 1"));
    }
    for (field, x) in [
        ("surface_noise_power", config.surface_noise_power),
        ("receiver_noise_power", config.receiver_noise_power),
    ] {
        if !(x >= 0.0) || !x.is_finite() {
            v.push(Violation::new(field, format!("{field} ≥ 0")));
        }
    }
    if !(config.pl_ref > 0.0) || !config.pl_ref.is_finite() {
        v.push(Violation::new("pl_ref", "pl_ref > 0"));
    }
    if !(config.d_bs_ris > 0.0) || !config.d_bs_ris.is_finite() {
        v.push(Violation::new("d_bs_ris", "d_bs_ris > 0"));
    }
    for (field, x) in [
        ("pl_exponent_ris_bs", config.pl_exponent_ris_bs),
        ("pl_exponent_user_ris", config.pl_exponent_user_ris),
        ("pl_exponent_user_bs", config.pl_exponent_user_bs),
    ] {
        if !x.is_finite() || x < 0.0 {
            v.push(Violation::new(field, format!("{field} ≥ 0")));
        }
    }
    for u in &config.users {
        if !(u.power > 0.0) || !u.power.is_finite() {
            v.push(Violation::new("users.power", "power > 0"));
        }
        if !(u.distance_to_ris > 0.0) || !(u.distance_to_bs > 0.0) {
            v.push(Violation::new("users.distance", "distances > 0"));
        }
    }

    if v.is_empty() {
        Ok(config)
    } else {
        Err(Error::InvalidConfig(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dbm_anchors() {
        assert_eq!(dbm_to_watts(30.0), 1.0);
        assert_relative_eq!(dbm_to_watts(20.0), 0.1, max_relative = 1e-15);
        assert_relative_eq!(dbm_to_watts(-70.0), 1e-10, max_relative = 1e-14);
    }

    #[test]
    fn path_loss_values() {
        assert_eq!(path_loss(1.0, 2.5, 1e-3).unwrap(), 1e-3);
        // 1e-3 * 20^-2.5, evaluated independently
        assert_relative_eq!(
            path_loss(20.0, 2.5, 1e-3).unwrap(),
            5.590169943749475e-7,
            max_relative = 1e-14
        );
        assert_eq!(path_loss(20.0, 0.0, 1e-3).unwrap(), 1e-3);
        assert!(path_loss(0.0, 2.5, 1e-3).is_err());
        assert!(path_loss(-3.0, 2.5, 1e-3).is_err());
    }

    #[test]
    fn default_is_valid() {
        let c = validate(SystemConfig::default()).unwrap();
        assert_eq!((c.antennas, c.elements, c.user_count(), c.pilot_len), (8, 25, 2, 26));
        assert_relative_eq!(c.beta_max, 79.43282347242814, max_relative = 1e-14);
    }

    #[test]
    fn short_pilot_rejected() {
        let c = SystemConfig {
            pilot_len: 25,
            ..SystemConfig::default()
        };
        let Err(Error::InvalidConfig(v)) = validate(c) else {
            panic!("expected violation")
        };
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].to_string(), "L ≥ N+1 violated");
    }

    #[test]
    fn low_beta_rejected() {
        let c = SystemConfig {
            beta_max: 0.5,
            ..SystemConfig::default()
        };
        let Err(Error::InvalidConfig(v)) = validate(c) else {
            panic!("expected violation")
        };
        assert_eq!(v[0].to_string(), "beta_max ≥ 1 violated");
    }

    #[test]
    fn reports_every_violation() {
        let mut c = SystemConfig {
            pilot_len: 1,
            beta_max: 0.1,
            pl_ref: 0.0,
            ..SystemConfig::default()
        };
        c.users[0].power = 0.0;
        let Err(Error::InvalidConfig(v)) = validate(c) else {
            panic!()
        };
        let fields: Vec<_> = v.iter().map(|x| x.field).collect();
        assert!(fields.contains(&"pilot_len"));
        assert!(fields.contains(&"beta_max"));
        assert!(fields.contains(&"pl_ref"));
        assert!(fields.contains(&"users.power"));
    }

    #[test]
    fn scheme_tags_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.tag().parse::<Scheme>().unwrap(), s);
        }
        assert!("mfris".parse::<Scheme>().is_err());
        assert_eq!(
            Scheme::parse_list("star,passive").unwrap(),
            vec![Scheme::Star, Scheme::Passive]
        );
    }
}
