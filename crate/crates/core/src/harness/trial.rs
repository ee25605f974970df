use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{
    covariance_epsilon, crlb, degenerate_epsilon, empirical_sum_mse, served_epsilon, trial_errors,
    DegenerateEpsilon, EmpiricalMse, EpsilonBreakdown, ErrorReport, TrialErrors,
};
use crate::channel::{self, ChannelSet};
use crate::error::Result;
use crate::estimation::{estimate_block, synthesize_rx, EstimateSet, EstimatorBank, ObservationBlock};
use crate::scenario::{validate, Scheme, Side, SystemConfig};
use crate::training::{
    build_baseline_schedule, build_dft_schedule, build_pilots, dft_basis, optimize_amplification,
    AmplificationSolution, AoOptions, BeamSchedule, DftBasis, PilotBook, UpdateRule,
};
use crate::{CVector, C64};

/// Everything about a (config, scheme) pair that does not depend on the channel draw.
#[derive(Debug, Clone)]
pub struct TrialPlan {
    /// Config actually simulated (after relocating users for reflect-only surfaces).
    pub config: SystemConfig,
    pub scheme: Scheme,
    pub pilots: PilotBook,
    pub basis: DftBasis,
    /// `(a_R, a_T)` of the DFT-family beams; `None` for on-off.
    pub amplification: Option<(f64, f64)>,
    /// Optimizer output for the DFT MF-RIS scheme.
    pub solution: Option<AmplificationSolution>,
    /// Closed-form error prediction.
    pub theory: EpsilonBreakdown,
    /// Set when every user sits on one side.
    pub degenerate: Option<DegenerateEpsilon>,
    /// Estimators that do not depend on the channel phases (DFT beams make
    /// `Θ_{1,i} = D_{L,N+1}·diag(1, a_i, …, a_i)` for every draw).
    bank: Option<EstimatorBank>,
}

/// Per-block pipeline outputs.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub channels: ChannelSet,
    pub schedule: BeamSchedule,
    pub block: ObservationBlock,
    pub estimates: EstimateSet,
    pub errors: TrialErrors,
}

impl TrialPlan {
    pub fn new(config: &SystemConfig, scheme: Scheme, update: UpdateRule) -> Result<Self> {
        let mut config = validate(config.clone())?;
        config.scheme = scheme;
        if scheme.reflect_only() && config.fair_comparison {
            for u in &mut config.users {
                u.side = Side::Reflect;
            }
        }
        let pilots = build_pilots(&config)?;
        let basis = dft_basis(config.pilot_len, config.elements)?;
        let alpha = config.alpha();
        let mut solution = None;
        let amplification = match scheme {
            Scheme::DftMfris => {
                let s = optimize_amplification(
                    &config,
                    AoOptions {
                        update,
                        ..AoOptions::default()
                    },
                )?;
                let a = (s.a_r, s.a_t);
                solution = Some(s);
                Some(a)
            }
            Scheme::OnOffMfris => None,
            Scheme::Star => Some(((0.5 * alpha).sqrt(), (0.5 * alpha).sqrt())),
            Scheme::Passive => Some((alpha.sqrt(), 0.0)),
            Scheme::Active => Some((config.amplitude_budget().sqrt(), 0.0)),
        };

        let reference_g1 = CVector::from_element(config.elements, C64::new(alpha.sqrt(), 0.0));
        let reference = schedule_for(scheme, amplification, &reference_g1, &basis, &config)?;
        let reference_bank = EstimatorBank::new(&reference, &reference_g1, &config)?;

        let theory = match amplification {
            Some((a_r, a_t)) => {
                let noise_cfg = SystemConfig {
                    surface_noise_power: reference.thermal_noise,
                    ..config.clone()
                };
                served_epsilon(a_r, a_t, &noise_cfg)
            }
            None => covariance_breakdown(&reference_bank, &config),
        };

        let degenerate = solution
            .as_ref()
            .and_then(|s| s.single_side)
            .map(|s| degenerate_epsilon(s, &config));

        Ok(Self {
            config,
            scheme,
            pilots,
            basis,
            amplification,
            solution,
            theory,
            degenerate,
            bank: amplification.map(|_| reference_bank),
        })
    }

    /// `(a_R, a_T)` reported for this plan. On-off reports the DFT scale with the
    /// same per-element amplitude, `sqrt(β_max·α/2)` on each side.
    pub fn reported_amplification(&self) -> (f64, f64) {
        self.amplification.unwrap_or_else(|| {
            let a = (self.config.amplitude_budget() / 2.0).sqrt();
            (a, a)
        })
    }

    pub fn schedule(&self, g1: &CVector) -> Result<BeamSchedule> {
        schedule_for(self.scheme, self.amplification, g1, &self.basis, &self.config)
    }

    /// One block: channels, beams, pilots, LS estimation and scoring.
    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<TrialOutcome> {
        let channels = channel::generate(&self.config, rng);
        let g1 = &channels.ris_bs.g[0];
        let schedule = self.schedule(g1)?;
        let block = synthesize_rx(&channels, &schedule, &self.pilots, &self.config, rng)?;
        let owned;
        let bank = match &self.bank {
            Some(b) => b,
            None => {
                owned = EstimatorBank::new(&schedule, g1, &self.config)?;
                &owned
            }
        };
        let estimates = estimate_block(&block, &channels, bank, &self.config)?;
        let errors = trial_errors(&channels, &estimates)?;
        Ok(TrialOutcome {
            channels,
            schedule,
            block,
            estimates,
            errors,
        })
    }

    /// CRLB diagonal per user, evaluated on the reference-antenna estimator.
    pub fn crlb_diag(&self) -> Result<Vec<Vec<f64>>> {
        let alpha = self.config.alpha();
        let g1 = CVector::from_element(self.config.elements, C64::new(alpha.sqrt(), 0.0));
        let schedule = self.schedule(&g1)?;
        let bank = EstimatorBank::new(&schedule, &g1, &self.config)?;
        self.config
            .users
            .iter()
            .map(|u| {
                let theta = match &bank.theta[u.side.index()] {
                    Some(t) => t.clone(),
                    None => crate::CMatrix::from_element(self.config.pilot_len, 1, C64::new(1.0, 0.0)),
                };
                crlb(&theta, &bank.noise_covariance, u.power).map(|d| d.iter().copied().collect())
            })
            .collect()
    }
}

fn schedule_for(
    scheme: Scheme,
    amplification: Option<(f64, f64)>,
    g1: &CVector,
    basis: &DftBasis,
    config: &SystemConfig,
) -> Result<BeamSchedule> {
    match (scheme, amplification) {
        (Scheme::DftMfris, Some((a_r, a_t))) => build_dft_schedule(a_r, a_t, g1, basis, config),
        _ => build_baseline_schedule(scheme, config, g1, basis),
    }
}

/// Closed-form-free prediction from LS covariances (used where no `(a_R, a_T)` exists).
fn covariance_breakdown(bank: &EstimatorBank, config: &SystemConfig) -> EpsilonBreakdown {
    use crate::analysis::{ErrorValue, UserEpsilon};
    let m = config.antennas;
    let mut users = Vec::new();
    let (mut direct, mut cascaded) = (0.0, 0.0);
    for u in &config.users {
        let c = bank.for_side(u.side).covariance(u.power);
        let d = c[(0, 0)].re;
        let f = if c.nrows() > 1 {
            let v = covariance_epsilon(&[vec![c.clone(); m]]) - d;
            cascaded += v;
            ErrorValue::Finite(v)
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
    EpsilonBreakdown {
        users,
        direct,
        cascaded,
        total: direct + cascaded,
    }
}

/// RNG for trial `index` of a point: ChaCha8 seeded by the point seed, one stream per trial.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Runs `trials` independent blocks in parallel. Output is independent of the thread count.
pub fn run_trials(plan: &TrialPlan, trials: usize, seed: u64) -> Result<Vec<TrialErrors>> {
    (0..trials)
        .into_par_iter()
        .map(|t| plan.run(&mut trial_rng(seed, t)).map(|o| o.errors))
        .collect()
}

/// Runs a single block with stream `index`.
pub fn run_trial(plan: &TrialPlan, seed: u64, index: usize) -> Result<TrialOutcome> {
    plan.run(&mut trial_rng(seed, index))
}

/// Monte Carlo evaluation of one (config, scheme) pair.
pub fn evaluate(plan: &TrialPlan, trials: usize, seed: u64) -> Result<ErrorReport> {
    let errors = run_trials(plan, trials, seed)?;
    let empirical: EmpiricalMse = empirical_sum_mse(&errors)?;
    let mut report = ErrorReport::new(plan.scheme, &empirical, &plan.theory);
    report.degenerate = plan.degenerate;
    if let Some(d) = plan.degenerate {
        report.eps_theory = d.cascaded;
    }
    Ok(report)
}
