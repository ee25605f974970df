//! Closed-form error expressions, the CRLB and empirical error metrics.

use std::fmt;

use nalgebra::DVector;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::estimation::EstimateSet;
use crate::scenario::{Scheme, Side, SystemConfig};
use crate::CMatrix;

/// A non-negative error value that may be explicitly unbounded (an unserved side).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorValue {
    Finite(f64),
    Infinite,
}

impl ErrorValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            ErrorValue::Finite(x) => Some(x),
            ErrorValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == ErrorValue::Infinite
    }
}

impl fmt::Display for ErrorValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorValue::Finite(x) => write!(f, "{x}"),
            ErrorValue::Infinite => f.write_str("inf"),
        }
    }
}

/// Closed-form per-user errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserEpsilon {
    pub side: Side,
    /// `ε_{d,k}`, the per-antenna direct-channel error.
    pub direct: f64,
    /// `ε_{f,k}`, the user–surface channel error; infinite when the user's side is off.
    pub cascaded: ErrorValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonBreakdown {
    pub users: Vec<UserEpsilon>,
    pub direct: f64,
    /// Sum over users with a finite cascaded error.
    pub cascaded: f64,
    pub total: f64,
}

fn breakdown(a_r: f64, a_t: f64, config: &SystemConfig, strict: bool) -> Result<EpsilonBreakdown> {
    let n = config.elements as f64;
    let m = config.antennas as f64;
    let l = config.pilot_len as f64;
    let ss = config.surface_noise_power;
    let s2 = config.receiver_noise_power;
    let amp = [a_r, a_t];
    let radiated = n * (a_r * a_r + a_t * a_t) * ss + s2;

    let mut users = Vec::with_capacity(config.users.len());
    let (mut direct, mut cascaded) = (0.0, 0.0);
    for u in &config.users {
        let a_i = amp[u.side.index()];
        let a_j = amp[u.side.other().index()];
        let d = radiated / (u.power * l);
        let f = if a_i > 0.0 {
            let ratio = (a_j * a_j) / (a_i * a_i);
            let v = n * (n * (ratio + 1.0) * ss + s2 / (a_i * a_i)) / (u.power * l * m);
            cascaded += v;
            ErrorValue::Finite(v)
        } else if strict {
            return Err(Error::Degenerate(u.side));
        } else {
            ErrorValue::Infinite
        };
        direct += d;
        users.push(UserEpsilon {
            side: u.side,
            direct: d,
            cascaded: f,
        });
    }
    Ok(EpsilonBreakdown {
        users,
        direct,
        cascaded,
        total: direct + cascaded,
    })
}

/// `ε(a_R, a_T) = Σ_i Σ_{k∈𝒦_i} [ε_{d,k} + ε_{f,k}]` with
///
/// * `ε_{d,k} = (N(a_R²+a_T²)σ_s² + σ²) / (P_k L)`
/// * `ε_{f,k} = N(N(a_j²/a_i² + 1)σ_s² + σ²/a_i²) / (P_k L M)`
///
/// Fails with [`Error::Degenerate`] if some user's side has zero amplification.
pub fn theoretical_epsilon(a_r: f64, a_t: f64, config: &SystemConfig) -> Result<EpsilonBreakdown> {
    breakdown(a_r, a_t, config, true)
}

/// Like [`theoretical_epsilon`] but users on a silent side get an infinite
/// cascaded error and are left out of the cascaded sum.
pub fn served_epsilon(a_r: f64, a_t: f64, config: &SystemConfig) -> EpsilonBreakdown {
    breakdown(a_r, a_t, config, false).expect("non-strict breakdown never fails")
}

/// Error when only side `side` can be driven.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegenerateEpsilon {
    pub side: Side,
    /// `a_i* = sqrt(β_max·α)`.
    pub amplitude: f64,
    pub direct: f64,
    pub cascaded: ErrorValue,
}

/// `ε_d = (N|𝒦_i|(a_i*)²σ_s² + Kσ²) / (P_i L)` with `a_i* = sqrt(β_max·α)`, `P_i = Σ_{k∈𝒦_i} P_k`.
pub fn degenerate_epsilon(side: Side, config: &SystemConfig) -> DegenerateEpsilon {
    let n = config.elements as f64;
    let k = config.users.len() as f64;
    let k_i = config.count_on(side) as f64;
    let p_i: f64 = config.users_on(side).map(|(_, u)| u.power).sum();
    let budget = config.amplitude_budget();
    let direct = (n * k_i * budget * config.surface_noise_power + k * config.receiver_noise_power)
        / (p_i * config.pilot_len as f64);
    DegenerateEpsilon {
        side,
        amplitude: budget.sqrt(),
        direct,
        cascaded: ErrorValue::Infinite,
    }
}

/// Diagonal of the inverse Fisher information `(P·Θᴴ C_z⁻¹ Θ)⁻¹`.
pub fn crlb(theta: &CMatrix, cz: &CMatrix, power: f64) -> Result<DVector<f64>> {
    if cz.nrows() != theta.nrows() || !cz.is_square() {
        return Err(Error::Dimension(format!(
            "Θ is {}×{}, C_z is {}×{}",
            theta.nrows(),
            theta.ncols(),
            cz.nrows(),
            cz.ncols()
        )));
    }
    let cz_inv_theta = cz
        .clone()
        .lu()
        .solve(theta)
        .ok_or_else(|| Error::Singular("noise covariance".into()))?;
    let fisher = (theta.adjoint() * cz_inv_theta).scale(power);
    let inv = fisher
        .try_inverse()
        .ok_or_else(|| Error::Singular("Fisher information".into()))?;
    let diag = inv.diagonal().map(|x| x.re);
    if diag.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Singular("Fisher information".into()));
    }
    Ok(diag)
}

/// `Σ_k [ (1/M)Σ_m [C_{h,m,k}]₁₁ + (1/M²)Σ_m (tr C_{h,m,k} − [C_{h,m,k}]₁₁) ]`.
///
/// `per_user[k][m]` is `C_{h,m,k}`. Equals [`theoretical_epsilon`] under DFT beams.
pub fn covariance_epsilon(per_user: &[Vec<CMatrix>]) -> f64 {
    weighted_trace(per_user, true)
}

/// The trace expression with the direct term summed over antennas:
/// `Σ_k [ Σ_m [C]₁₁ + (1/M²)Σ_m (tr C − [C]₁₁) ]`.
pub fn trace_form_epsilon(per_user: &[Vec<CMatrix>]) -> f64 {
    weighted_trace(per_user, false)
}

fn weighted_trace(per_user: &[Vec<CMatrix>], average_direct: bool) -> f64 {
    per_user
        .iter()
        .filter(|covs| !covs.is_empty())
        .map(|covs| {
            let m = covs.len() as f64;
            let c11: f64 = covs.iter().map(|c| c[(0, 0)].re).sum();
            let rest: f64 = covs.iter().map(|c| c.trace().re - c[(0, 0)].re).sum();
            let d = if average_direct { c11 / m } else { c11 };
            d + rest / (m * m)
        })
        .sum()
}

/// Squared errors of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialErrors {
    /// `‖h_k − ĥ_k‖²` over all M antennas.
    pub direct: Vec<f64>,
    /// `‖f_k − f̂_k‖²`, `None` for users whose cascaded channel is not estimated.
    pub cascaded: Vec<Option<f64>>,
}

impl TrialErrors {
    pub fn total(&self) -> f64 {
        self.direct.iter().sum::<f64>() + self.cascaded.iter().flatten().sum::<f64>()
    }
}

pub fn trial_errors(truth: &ChannelSet, est: &EstimateSet) -> Result<TrialErrors> {
    if truth.users() != est.users() {
        return Err(Error::Dimension(format!(
            "{} true users, {} estimated",
            truth.users(),
            est.users()
        )));
    }
    let direct = truth
        .direct
        .iter()
        .zip(&est.direct)
        .map(|(h, e)| (h - e).norm_squared())
        .collect();
    let cascaded = truth
        .user_ris
        .iter()
        .zip(&est.cascaded)
        .map(|(f, e)| e.as_ref().map(|e| (f - e).norm_squared()))
        .collect();
    Ok(TrialErrors { direct, cascaded })
}

/// Deterministic pairwise summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Monte Carlo sum MSE with its per-user breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMse {
    pub total: f64,
    /// Standard error of `total`.
    pub std_error: f64,
    pub direct: Vec<f64>,
    pub cascaded: Vec<Option<f64>>,
    pub trials: usize,
}

impl EmpiricalMse {
    pub fn direct_sum(&self) -> f64 {
        self.direct.iter().sum()
    }

    pub fn cascaded_sum(&self) -> f64 {
        self.cascaded.iter().flatten().sum()
    }
}

pub fn empirical_sum_mse(trials: &[TrialErrors]) -> Result<EmpiricalMse> {
    let first = trials.first().ok_or(Error::EmptyResult)?;
    let k = first.direct.len();
    if trials.iter().any(|t| t.direct.len() != k || t.cascaded.len() != k) {
        return Err(Error::Dimension("trials disagree on user count".into()));
    }
    let n = trials.len() as f64;
    let mean = |xs: Vec<f64>| pairwise_sum(&xs) / n;

    let totals: Vec<f64> = trials.iter().map(TrialErrors::total).collect();
    let total = pairwise_sum(&totals) / n;
    let var = if trials.len() > 1 {
        let dev: Vec<f64> = totals.iter().map(|x| (x - total).powi(2)).collect();
        pairwise_sum(&dev) / (n - 1.0)
    } else {
        0.0
    };
    let direct = (0..k)
        .map(|u| mean(trials.iter().map(|t| t.direct[u]).collect()))
        .collect();
    let cascaded = (0..k)
        .map(|u| {
            let xs: Option<Vec<f64>> = trials.iter().map(|t| t.cascaded[u]).collect();
            xs.map(mean)
        })
        .collect();
    Ok(EmpiricalMse {
        total,
        std_error: (var / n).sqrt(),
        direct,
        cascaded,
        trials: trials.len(),
    })
}

/// Per-user comparison of measured and predicted errors.
#[derive(Debug, Clone, PartialEq)]
pub struct UserReport {
    pub side: Side,
    pub eps_d_empirical: f64,
    pub eps_f_empirical: Option<f64>,
    pub eps_d_theory: f64,
    pub eps_f_theory: ErrorValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub scheme: Scheme,
    pub trials: usize,
    pub eps_empirical: f64,
    pub std_error: f64,
    pub eps_theory: ErrorValue,
    pub users: Vec<UserReport>,
    /// CRLB diagonal for the reference antenna, per user (empty if not computed).
    pub crlb_diag: Vec<Vec<f64>>,
    /// Empirical over predicted direct-channel error (the norm metric counts all M antennas).
    pub direct_ratio: f64,
    /// Empirical over predicted cascaded error.
    pub cascaded_ratio: f64,
    /// Single-side prediction, when every user sits on one side.
    pub degenerate: Option<DegenerateEpsilon>,
}

impl ErrorReport {
    pub fn new(scheme: Scheme, empirical: &EmpiricalMse, theory: &EpsilonBreakdown) -> Self {
        let users = theory
            .users
            .iter()
            .enumerate()
            .map(|(k, t)| UserReport {
                side: t.side,
                eps_d_empirical: empirical.direct[k],
                eps_f_empirical: empirical.cascaded[k],
                eps_d_theory: t.direct,
                eps_f_theory: t.cascaded,
            })
            .collect();
        let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { f64::NAN };
        let eps_theory = if theory.total.is_finite() {
            ErrorValue::Finite(theory.total)
        } else {
            ErrorValue::Infinite
        };
        Self {
            scheme,
            trials: empirical.trials,
            eps_empirical: empirical.total,
            std_error: empirical.std_error,
            eps_theory,
            users,
            crlb_diag: Vec::new(),
            direct_ratio: ratio(empirical.direct_sum(), theory.direct),
            cascaded_ratio: ratio(empirical.cascaded_sum(), theory.cascaded),
            degenerate: None,
        }
    }

    /// `eps_empirical / eps_theory`, if the theory value is finite and positive.
    pub fn relative_gap(&self) -> Option<f64> {
        let t = self.eps_theory.finite()?;
        (t > 0.0).then(|| (self.eps_empirical - t).abs() / t)
    }
}
