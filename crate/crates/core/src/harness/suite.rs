use super::trial::{evaluate, run_trial, run_trials, TrialPlan};
use crate::analysis::{crlb, theoretical_epsilon};
use crate::error::Result;
use crate::estimation::{noise_covariance, observation_matrix, EstimatorBank};
use crate::scenario::{validate, DespreadMode, Scheme, Side, SurfaceNoise, SystemConfig, UserSpec};
use crate::training::{
    dft_basis, optimize_amplification, oracle_optimum, AoOptions, UpdateRule,
};
use crate::{CMatrix, C64};

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed,
            detail: detail.into(),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn max_rel_offdiag(m: &CMatrix, expected_diag: &[f64]) -> f64 {
    let scale = expected_diag.iter().cloned().fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let e = if i == j { expected_diag[i] } else { 0.0 };
            worst = worst.max((m[(i, j)] - C64::new(e, 0.0)).norm() / scale);
        }
    }
    worst
}

/// Runs a fast property suite against `config`. `trials` sets the Monte Carlo size.
pub fn run_suite(config: &SystemConfig, trials: usize) -> Result<Vec<Check>> {
    let cfg = validate(config.clone())?;
    let mut out = vec![Check::new("config", true, "all invariants hold")];
    let (l, n) = (cfg.pilot_len, cfg.elements);

    let basis = dft_basis(l, n)?;
    let gram = basis.full.adjoint() * &basis.full;
    let leak = max_rel_offdiag(&gram, &vec![l as f64; n + 1]);
    out.push(Check::new("dft-orthogonality", leak <= 1e-12, format!("max leak {leak:e}")));

    let sol = optimize_amplification(&cfg, AoOptions::default())?;
    let oracle = oracle_optimum(&cfg, 200)?;
    let gap = rel(sol.epsilon, oracle.epsilon);
    out.push(Check::new("ao-vs-oracle", gap <= 1e-3, format!("relative gap {gap:e}")));
    let monotone = sol
        .trace
        .windows(2)
        .all(|w| w[1].epsilon <= w[0].epsilon + 1e-12 * w[0].epsilon.abs());
    out.push(Check::new(
        "ao-monotone",
        monotone && sol.converged,
        format!("{} iterations, converged = {}", sol.iterations, sol.converged),
    ));

    let plan = TrialPlan::new(&cfg, Scheme::DftMfris, UpdateRule::Oracle)?;
    let outcome = run_trial(&plan, cfg.seed, 0)?;
    let g = &outcome.channels.ris_bs.g;
    let mut theta_gap: f64 = 0.0;
    let mut cz_gap: f64 = 0.0;
    let (a_r, a_t) = (sol.a_r, sol.a_t);
    let expected_cz = n as f64 * (a_r * a_r + a_t * a_t) * cfg.surface_noise_power + cfg.receiver_noise_power;
    for gm in g {
        for (side, a) in [(Side::Reflect, a_r), (Side::Refract, a_t)] {
            let t = observation_matrix(&outcome.schedule, side, gm);
            let mut diag = vec![l as f64 * a * a; n + 1];
            diag[0] = l as f64;
            theta_gap = theta_gap.max(max_rel_offdiag(&(t.adjoint() * &t), &diag));
        }
        let cz = noise_covariance(&outcome.schedule, gm, &cfg);
        cz_gap = cz_gap.max(max_rel_offdiag(&cz, &vec![expected_cz; l]));
    }
    out.push(Check::new("theta-gram", theta_gap <= 1e-10, format!("max deviation {theta_gap:e}")));
    out.push(Check::new("noise-covariance", cz_gap <= 1e-10, format!("max deviation {cz_gap:e}")));

    let bank = EstimatorBank::new(&outcome.schedule, &g[0], &cfg)?;
    let mut crlb_gap: f64 = 0.0;
    for u in &cfg.users {
        if let Some(theta) = &bank.theta[u.side.index()] {
            let c = bank.for_side(u.side).covariance(u.power);
            let bound = crlb(theta, &bank.noise_covariance, u.power)?;
            for i in 0..bound.len() {
                crlb_gap = crlb_gap.max(rel(bound[i], c[(i, i)].re));
            }
        }
    }
    out.push(Check::new("crlb-attainment", crlb_gap <= 1e-9, format!("max gap {crlb_gap:e}")));

    let single = SystemConfig {
        users: vec![cfg.users[0]],
        ..cfg.clone()
    }
    .with_minimal_pilots();
    let ideal = TrialPlan::new(&single, Scheme::DftMfris, UpdateRule::Oracle)?;
    let full = TrialPlan::new(
        &SystemConfig {
            despread_mode: DespreadMode::Full,
            ..single.clone()
        },
        Scheme::DftMfris,
        UpdateRule::Oracle,
    )?;
    let same = run_trial(&ideal, 7, 0)?.block.despread == run_trial(&full, 7, 0)?.block.despread;
    out.push(Check::new("full-equals-ideal-k1", same, "single-user despread blocks"));

    let one_side = SystemConfig {
        users: vec![
            UserSpec::new(Side::Reflect, 0.1, 5.0, 20.0),
            UserSpec::new(Side::Reflect, 0.1, 5.0, 20.0),
        ],
        ..cfg.clone()
    };
    let deg = TrialPlan::new(&one_side, Scheme::DftMfris, UpdateRule::Oracle)
        .and_then(|p| evaluate(&p, 50, 3));
    let ok = matches!(&deg, Ok(r) if r.degenerate.is_some_and(|d| d.cascaded.is_infinite()));
    out.push(Check::new("degenerate-path", ok, "single-side config reports an infinite marker"));

    let mc_cfg = SystemConfig {
        surface_noise: SurfaceNoise::PerAntenna,
        ..cfg.clone()
    };
    let mc_plan = TrialPlan::new(&mc_cfg, Scheme::DftMfris, UpdateRule::Oracle)?;
    let report = evaluate(&mc_plan, trials.max(1), cfg.seed)?;
    let theory = theoretical_epsilon(a_r, a_t, &mc_cfg).map(|e| e.total).unwrap_or(f64::NAN);
    let mc_gap = rel(report.eps_empirical, theory);
    let tol = (4.0 * report.std_error / theory).max(0.01);
    out.push(Check::new(
        "monte-carlo-vs-theory",
        mc_gap <= tol,
        format!("{} trials, relative gap {mc_gap:.3e}", report.trials),
    ));

    let a = run_trials(&plan, 64, cfg.seed)?;
    let b = run_trials(&plan, 64, cfg.seed)?;
    out.push(Check::new("determinism", a == b, "repeated runs match bit-for-bit"));
    Ok(out)
}
