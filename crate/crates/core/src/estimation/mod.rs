//! Received-pilot synthesis and LS channel estimation.

mod ls;
mod synth;
#[cfg(test)]
mod tests;

pub use ls::{
    ls_estimate, noise_covariance, observation_matrix, psi_gram, regularize_covariance,
    simplified_ls_estimate, LsEstimator, SINGULARITY_THRESHOLD,
};
pub use synth::{despread, response_matrix, synthesize_rx, ObservationBlock};

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::scenario::{Side, SystemConfig};
use crate::training::BeamSchedule;
use crate::{CMatrix, CVector, C64};

/// LS output for one (antenna, user) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaEstimate {
    pub direct: C64,
    /// `None` when the user's side is silent and only the direct channel is observable.
    pub cascaded: Option<CVector>,
}

impl AntennaEstimate {
    /// Splits an LS vector `[ĥ, f̂ᵀ]ᵀ`.
    pub fn from_stacked(v: &CVector) -> Self {
        Self {
            direct: v[0],
            cascaded: (v.len() > 1).then(|| v.rows(1, v.len() - 1).into_owned()),
        }
    }
}

/// Per-user estimates for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSet {
    /// `ĥ_k ∈ C^M`.
    pub direct: Vec<CVector>,
    /// `f̂_{m,k}` after phase alignment, indexed `[k][m]`.
    pub cascaded_per_antenna: Vec<Vec<CVector>>,
    /// `f̂_k`, the antenna average.
    pub cascaded: Vec<Option<CVector>>,
    /// `C_{h,m,k}` per user. The reference-antenna estimator gives every antenna
    /// the same covariance, so one matrix per user is stored.
    pub covariance: Vec<CMatrix>,
}

impl EstimateSet {
    pub fn users(&self) -> usize {
        self.direct.len()
    }

    /// `C_{h,m,k}` for all M antennas, indexed `[k][m]`.
    pub fn antenna_covariances(&self) -> Vec<Vec<CMatrix>> {
        let m = self.direct.first().map_or(0, |d| d.len());
        self.covariance.iter().map(|c| vec![c.clone(); m]).collect()
    }
}

/// Stacks direct estimates across antennas and averages cascaded ones:
/// `f̂_k = (1/M) Σ_m r_m·f̂_{m,k}` where `r_m` undoes antenna m's known LoS phase.
///
/// `per_user[k][m]` is antenna m's estimate for user k.
pub fn combine_estimates(per_user: &[Vec<AntennaEstimate>], rotations: &[C64]) -> Result<EstimateSet> {
    let mut direct = Vec::with_capacity(per_user.len());
    let mut cascaded_per_antenna = Vec::with_capacity(per_user.len());
    let mut cascaded = Vec::with_capacity(per_user.len());
    for (k, ests) in per_user.iter().enumerate() {
        if ests.is_empty() || ests.len() != rotations.len() {
            return Err(Error::Dimension(format!(
                "user {k}: {} antenna estimates, {} rotations",
                ests.len(),
                rotations.len()
            )));
        }
        direct.push(CVector::from_iterator(ests.len(), ests.iter().map(|e| e.direct)));
        let aligned: Option<Vec<CVector>> = ests
            .iter()
            .zip(rotations)
            .map(|(e, r)| e.cascaded.as_ref().map(|f| f * *r))
            .collect();
        match aligned {
            Some(v) => {
                let mut sum = CVector::zeros(v[0].len());
                for f in &v {
                    sum += f;
                }
                cascaded.push(Some(sum.unscale(v.len() as f64)));
                cascaded_per_antenna.push(v);
            }
            None => {
                cascaded.push(None);
                cascaded_per_antenna.push(Vec::new());
            }
        }
    }
    Ok(EstimateSet {
        direct,
        cascaded_per_antenna,
        cascaded,
        covariance: Vec::new(),
    })
}

/// Estimators for one schedule, built against the reference antenna.
///
/// Under the rank-1 LoS link `φ_iᴴ(l)G_m = e^{−jθ_m}·φ_iᴴ(l)G_1`, so `Θ_{1,i}`
/// serves every antenna: antenna m's LS output estimates `[h_{m,k}, e^{−jθ_m} f_kᵀ]ᵀ`
/// and `C_{z,m} = C_{z,1}`.
#[derive(Debug, Clone)]
pub struct EstimatorBank {
    /// Full `[h, f]` estimator per side, `None` if that side never radiates.
    pub stacked: [Option<LsEstimator>; 2],
    /// Direct-only estimator for users on a silent side.
    pub direct_only: Option<LsEstimator>,
    pub theta: [Option<CMatrix>; 2],
    pub noise_covariance: CMatrix,
}

impl EstimatorBank {
    pub fn new(schedule: &BeamSchedule, g1: &CVector, config: &SystemConfig) -> Result<Self> {
        let cz = regularize_covariance(&noise_covariance(schedule, g1, config));
        let mut stacked = [None, None];
        let mut theta = [None, None];
        let mut need_direct = false;
        for side in Side::BOTH {
            if config.count_on(side) == 0 {
                continue;
            }
            if schedule.is_silent(side) {
                need_direct = true;
                continue;
            }
            let t = observation_matrix(schedule, side, g1);
            stacked[side.index()] = Some(LsEstimator::new(&t, &cz)?);
            theta[side.index()] = Some(t);
        }
        let direct_only = if need_direct {
            let ones = CMatrix::from_element(schedule.slots(), 1, C64::new(1.0, 0.0));
            Some(LsEstimator::new(&ones, &cz)?)
        } else {
            None
        };
        Ok(Self {
            stacked,
            direct_only,
            theta,
            noise_covariance: cz,
        })
    }

    pub fn for_side(&self, side: Side) -> &LsEstimator {
        self.stacked[side.index()]
            .as_ref()
            .or(self.direct_only.as_ref())
            .expect("estimator exists for every populated side")
    }
}

/// LS-estimates every user at every antenna, then combines across antennas.
pub fn estimate_block(
    block: &ObservationBlock,
    channels: &ChannelSet,
    bank: &EstimatorBank,
    config: &SystemConfig,
) -> Result<EstimateSet> {
    let k_count = config.users.len();
    if block.despread.len() != k_count {
        return Err(Error::Dimension(format!(
            "block has {} users, config {k_count}",
            block.despread.len()
        )));
    }
    let rotations: Vec<C64> = (0..channels.ris_bs.antennas())
        .map(|m| channels.ris_bs.rotation(m))
        .collect();
    let mut per_user = Vec::with_capacity(k_count);
    let mut covariance = Vec::with_capacity(k_count);
    for (k, u) in config.users.iter().enumerate() {
        let est = bank.for_side(u.side);
        let ests: Vec<AntennaEstimate> = block.despread[k]
            .iter()
            .map(|y| AntennaEstimate::from_stacked(&est.estimate(y, u.power)))
            .collect();
        covariance.push(est.covariance(u.power));
        per_user.push(ests);
    }
    let mut set = combine_estimates(&per_user, &rotations)?;
    set.covariance = covariance;
    Ok(set)
}
