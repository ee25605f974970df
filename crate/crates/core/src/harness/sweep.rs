use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::trial::{evaluate, TrialPlan};
use crate::analysis::ErrorValue;
use crate::error::{Error, Result};
use crate::scenario::{dbm_to_watts, Scheme, Side, SystemConfig, UserSpec};
use crate::training::UpdateRule;

/// Radius of the user cluster around its centre, in meters.
pub const CLUSTER_RADIUS: f64 = 5.0;
/// Distance from the BS to the cluster centre, in meters.
pub const CLUSTER_CENTER: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SweepVar {
    /// Total transmit power P_W in dBm, split equally over users.
    Power,
    /// BS–surface distance in meters.
    Distance,
    /// Number of users K.
    Users,
}

impl SweepVar {
    pub fn tag(self) -> &'static str {
        match self {
            SweepVar::Power => "power",
            SweepVar::Distance => "distance",
            SweepVar::Users => "users",
        }
    }

    /// Values used by the reference experiments.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepVar::Power => vec![10.0, 15.0, 20.0, 25.0, 30.0],
            SweepVar::Distance => vec![10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0],
            SweepVar::Users => (2..=8).map(f64::from).collect(),
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SweepVar {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(SweepVar::Power),
            "distance" => Ok(SweepVar::Distance),
            "users" => Ok(SweepVar::Users),
            _ => Err(Error::ConfigFile(format!("unknown sweep variable `{s}`"))),
        }
    }
}

/// Parses `a:b:step` (inclusive) or a comma-separated list.
pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::ConfigFile(format!("bad value list `{s}`"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, step] = parts.as_slice() else {
            return Err(bad());
        };
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if !(step > 0.0) || b < a {
            return Err(bad());
        }
        let count = ((b - a) / step + 1e-9).floor() as usize;
        Ok((0..=count).map(|i| a + step * i as f64).collect())
    } else {
        s.split(',').map(num).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub var: SweepVar,
    pub values: Vec<f64>,
    pub trials: usize,
    pub schemes: Vec<Scheme>,
    pub base: SystemConfig,
    pub update: UpdateRule,
}

impl SweepSpec {
    pub fn new(var: SweepVar, base: SystemConfig) -> Self {
        Self {
            var,
            values: var.default_values(),
            trials: 10_000,
            schemes: Scheme::ALL.to_vec(),
            base,
            update: UpdateRule::Oracle,
        }
    }

    fn check(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::ConfigFile("sweep needs at least one value".into()));
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::ConfigFile("sweep values must be strictly increasing".into()));
        }
        if self.trials == 0 {
            return Err(Error::ConfigFile("trials ≥ 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::ConfigFile("no schemes selected".into()));
        }
        if self.var == SweepVar::Users && self.values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
            return Err(Error::ConfigFile("user counts must be positive integers".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub var: SweepVar,
    pub value: f64,
    pub scheme: Scheme,
    pub trials: usize,
    pub seed: u64,
    pub a_r: f64,
    pub a_t: f64,
    pub eps_empirical: f64,
    pub eps_theory: ErrorValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Base config the sweep started from.
    pub base: SystemConfig,
}

impl SweepResult {
    /// Rows for one scheme in sweep order.
    pub fn series(&self, scheme: Scheme) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.scheme == scheme).collect()
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for one sweep point; shared by all schemes at that point.
pub fn point_seed(base: u64, var: SweepVar, value: f64) -> u64 {
    splitmix64(base ^ splitmix64(var as u64 + 1) ^ splitmix64(value.to_bits()))
}

/// Distances `(d_ris, d_bs)` of a user dropped uniformly in the cluster disc.
/// The BS sits at the origin and the surface at `(0, d_bs_ris)`.
pub fn place_user<R: Rng + ?Sized>(rng: &mut R, d_bs_ris: f64) -> (f64, f64) {
    let r = CLUSTER_RADIUS * rng.gen::<f64>().sqrt();
    let t = rng.gen_range(0.0..TAU);
    let (x, y) = (r * t.cos(), CLUSTER_CENTER + r * t.sin());
    let d_bs = x.hypot(y);
    let d_ris = x.hypot(y - d_bs_ris).max(1.0);
    (d_ris, d_bs)
}

/// Config at one sweep point.
pub fn point_config(base: &SystemConfig, var: SweepVar, value: f64) -> Result<SystemConfig> {
    let mut cfg = base.clone();
    match var {
        SweepVar::Power => {
            let per_user = dbm_to_watts(value) / cfg.users.len().max(1) as f64;
            cfg = cfg.with_equal_power(per_user);
        }
        SweepVar::Distance => cfg.d_bs_ris = value,
        SweepVar::Users => {
            let k = value as usize;
            let power = cfg.users.first().map_or(0.1, |u| u.power);
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(base.seed ^ 0x5EED));
            cfg.users.truncate(k);
            for i in cfg.users.len()..k {
                // first existing user keeps its side; later ones alternate
                let side = if i % 2 == 0 { Side::Reflect } else { Side::Refract };
                let (d_ris, d_bs) = place_user(&mut rng, cfg.d_bs_ris);
                cfg.users.push(UserSpec::new(side, power, d_ris, d_bs));
            }
            cfg.pilot_len = cfg.pilot_len.max(k);
        }
    }
    Ok(cfg)
}

/// Runs every (value, scheme) point. Rows come out sorted by value, then by scheme order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.check()?;
    let mut schemes = spec.schemes.clone();
    schemes.sort();
    schemes.dedup();
    let mut rows = Vec::with_capacity(spec.values.len() * schemes.len());
    for &value in &spec.values {
        let cfg = point_config(&spec.base, spec.var, value)?;
        let seed = point_seed(spec.base.seed, spec.var, value);
        for &scheme in &schemes {
            let plan = TrialPlan::new(&cfg, scheme, spec.update)?;
            let report = evaluate(&plan, spec.trials, seed)?;
            let (a_r, a_t) = plan.reported_amplification();
            log::info!(
                "{}={value} {scheme}: empirical {:e}, theory {}",
                spec.var,
                report.eps_empirical,
                report.eps_theory
            );
            rows.push(SweepRow {
                var: spec.var,
                value,
                scheme,
                trials: spec.trials,
                seed,
                a_r,
                a_t,
                eps_empirical: report.eps_empirical,
                eps_theory: report.eps_theory,
            });
        }
    }
    Ok(SweepResult {
        rows,
        base: spec.base.clone(),
    })
}
