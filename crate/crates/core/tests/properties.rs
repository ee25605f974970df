mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mfris_est::analysis::{covariance_epsilon, theoretical_epsilon};
use mfris_est::channel::generate;
use mfris_est::estimation::{ls_estimate, noise_covariance, observation_matrix};
use mfris_est::harness::{evaluate, run_sweep, SweepSpec, SweepVar, TrialPlan};
use mfris_est::scenario::{dbm_to_watts, path_loss, validate, Scheme, Side, SystemConfig};
use mfris_est::training::{
    build_dft_schedule, dft_basis, optimize_amplification, AoOptions, UpdateRule,
};

use common::random_config;

fn config(seed: u64) -> SystemConfig {
    random_config(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn swap_sides(cfg: &SystemConfig) -> SystemConfig {
    let mut out = cfg.clone();
    for u in &mut out.users {
        u.side = u.side.other();
    }
    out
}

fn eps(cfg: &SystemConfig, x: f64, y: f64) -> f64 {
    theoretical_epsilon(x.sqrt(), y.sqrt(), cfg).unwrap().total
}

/// Two points with positive coordinates inside `x + y ≤ budget`.
fn feasible_pair(budget: f64, u: [f64; 4]) -> [(f64, f64); 2] {
    let pt = |a: f64, b: f64| {
        let s = a.max(1e-3);
        let share = b.clamp(1e-3, 1.0 - 1e-3);
        (budget * s * share, budget * s * (1.0 - share))
    };
    [pt(u[0], u[1]), pt(u[2], u[3])]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn validate_is_idempotent(seed in any::<u64>(), l_cut in 0usize..3) {
        let mut cfg = config(seed);
        cfg.pilot_len = cfg.pilot_len.saturating_sub(l_cut * 4);
        match validate(cfg.clone()) {
            Ok(v) => prop_assert_eq!(validate(v.clone()).unwrap(), v),
            Err(e) => prop_assert_eq!(validate(cfg).unwrap_err().to_string(), e.to_string()),
        }
    }

    #[test]
    fn dbm_scale(x in -150.0f64..60.0, dx in 1e-6f64..20.0) {
        prop_assert!(dbm_to_watts(x + dx) > dbm_to_watts(x));
        let ratio = dbm_to_watts(x + 10.0) / dbm_to_watts(x);
        prop_assert!((ratio - 10.0).abs() <= 1e-12 * 10.0);
    }

    #[test]
    fn path_loss_falls_with_distance(d in 0.1f64..1e3, step in 1e-6f64..1e2, exp in 0.1f64..6.0) {
        prop_assert!(path_loss(d + step, exp, 1e-3).unwrap() < path_loss(d, exp, 1e-3).unwrap());
    }

    #[test]
    fn rank_one_phase_offsets(seed in any::<u64>()) {
        let cfg = config(seed);
        let ch = generate(&cfg, &mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        let g1 = &ch.ris_bs.g[0];
        let amp = cfg.alpha().sqrt();
        for g in &ch.ris_bs.g {
            let ratio = g[0] / g1[0];
            prop_assert!((ratio.norm() - 1.0).abs() <= 1e-12);
            for n in 0..cfg.elements {
                prop_assert!((g[n].norm() - amp).abs() <= 1e-12 * amp);
                prop_assert!((g[n] / g1[n] - ratio).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn label_swap_leaves_epsilon(seed in any::<u64>(), u in prop::array::uniform4(0.0f64..1.0)) {
        let cfg = config(seed);
        let swapped = swap_sides(&cfg);
        let [(x, y), _] = feasible_pair(cfg.amplitude_budget(), u);
        let a = eps(&cfg, x, y);
        let b = eps(&swapped, y, x);
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn epsilon_matches_covariance_sum(seed in any::<u64>(), u in prop::array::uniform4(0.0f64..1.0)) {
        let cfg = config(seed);
        let [(x, y), _] = feasible_pair(cfg.amplitude_budget(), u);
        let (a_r, a_t) = (x.sqrt(), y.sqrt());
        let ch = generate(&cfg, &mut ChaCha8Rng::seed_from_u64(seed));
        let basis = dft_basis(cfg.pilot_len, cfg.elements).unwrap();
        let sched = build_dft_schedule(a_r, a_t, &ch.ris_bs.g[0], &basis, &cfg).unwrap();
        prop_assert!(sched.satisfies_constraints(cfg.beta_max));
        let covs: Vec<Vec<_>> = cfg
            .users
            .iter()
            .map(|u| {
                ch.ris_bs
                    .g
                    .iter()
                    .map(|g| {
                        let theta = observation_matrix(&sched, u.side, g);
                        let y = theta.column(0).into_owned();
                        ls_estimate(&y, &theta, &noise_covariance(&sched, g, &cfg), u.power).unwrap().1
                    })
                    .collect()
            })
            .collect();
        for per_antenna in &covs {
            for c in per_antenna {
                prop_assert!((c - &per_antenna[0]).norm() <= 1e-10 * per_antenna[0].norm());
            }
        }
        let theory = theoretical_epsilon(a_r, a_t, &cfg).unwrap().total;
        prop_assert!((covariance_epsilon(&covs) - theory).abs() <= 1e-10 * theory);
    }

    #[test]
    fn epsilon_falls_with_noise(
        seed in any::<u64>(),
        u in prop::array::uniform4(0.0f64..1.0),
        shrink in 0.0f64..1.0,
    ) {
        let cfg = config(seed);
        let [(x, y), _] = feasible_pair(cfg.amplitude_budget(), u);
        let base = eps(&cfg, x, y);
        let quieter_surface = SystemConfig { surface_noise_power: cfg.surface_noise_power * shrink, ..cfg.clone() };
        let quieter_rx = SystemConfig { receiver_noise_power: cfg.receiver_noise_power * shrink, ..cfg.clone() };
        prop_assert!(eps(&quieter_surface, x, y) <= base);
        prop_assert!(eps(&quieter_rx, x, y) <= base);
    }

    #[test]
    fn convex_when_receiver_noise_dominates(
        seed in any::<u64>(),
        u in prop::array::uniform4(0.0f64..1.0),
        level in 0.0f64..1.0,
    ) {
        let mut cfg = config(seed);
        let budget = cfg.amplitude_budget();
        cfg.surface_noise_power =
            level * cfg.receiver_noise_power / (10.0 * cfg.elements as f64 * budget);
        let [(x1, y1), (x2, y2)] = feasible_pair(budget, u);
        let mid = eps(&cfg, 0.5 * (x1 + x2), 0.5 * (y1 + y2));
        let chord = 0.5 * (eps(&cfg, x1, y1) + eps(&cfg, x2, y2));
        prop_assert!(mid <= chord * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn label_swap_swaps_optimum(seed in any::<u64>()) {
        let cfg = config(seed);
        let a = optimize_amplification(&cfg, AoOptions::default()).unwrap();
        let b = optimize_amplification(&swap_sides(&cfg), AoOptions::default()).unwrap();
        prop_assert!((a.epsilon - b.epsilon).abs() <= 1e-6 * a.epsilon);
        let scale = cfg.amplitude_budget().sqrt();
        prop_assert!((a.a_r - b.a_t).abs() <= 1e-3 * scale);
        prop_assert!((a.a_t - b.a_r).abs() <= 1e-3 * scale);
    }

    #[test]
    fn optimizer_stays_feasible_and_monotone(seed in any::<u64>(), closed in any::<bool>()) {
        let cfg = config(seed);
        let update = if closed { UpdateRule::ClosedForm } else { UpdateRule::Oracle };
        let s = optimize_amplification(&cfg, AoOptions { update, ..AoOptions::default() }).unwrap();
        let budget = cfg.amplitude_budget();
        prop_assert!(s.a_r * s.a_r + s.a_t * s.a_t <= budget * (1.0 + 1e-12));
        for w in s.trace.windows(2) {
            prop_assert!(w[1].epsilon <= w[0].epsilon + 1e-12);
        }
    }
}

#[test]
fn nonconvex_when_surface_noise_dominates() {
    let cfg = SystemConfig {
        surface_noise_power: dbm_to_watts(-40.0),
        ..SystemConfig::default()
    };
    let b = cfg.amplitude_budget();
    let (p1, p2) = ((0.7 * b, 0.008 * b), (0.06 * b, 0.0025 * b));
    let mid = eps(&cfg, 0.5 * (p1.0 + p2.0), 0.5 * (p1.1 + p2.1));
    let chord = 0.5 * (eps(&cfg, p1.0, p1.1) + eps(&cfg, p2.0, p2.1));
    assert!(mid > chord * 1.05, "mid {mid:e} chord {chord:e}");
}

#[test]
fn standard_error_shrinks_with_trials() {
    let plan = TrialPlan::new(&SystemConfig::default(), Scheme::DftMfris, UpdateRule::Oracle).unwrap();
    let small = evaluate(&plan, 100, 21).unwrap();
    let large = evaluate(&plan, 10_000, 21).unwrap();
    let ratio = small.std_error / large.std_error;
    assert!((ratio / 10.0 - 1.0).abs() <= 0.25, "ratio {ratio}");
}

#[test]
fn sweep_rows_are_feasible() {
    let mut spec = SweepSpec::new(SweepVar::Distance, SystemConfig::default());
    spec.trials = 20;
    let result = run_sweep(&spec).unwrap();
    for r in &result.rows {
        let cfg = SystemConfig {
            d_bs_ris: r.value,
            ..SystemConfig::default()
        };
        assert!(r.a_r * r.a_r + r.a_t * r.a_t <= cfg.amplitude_budget() * (1.0 + 1e-12), "{r:?}");
        assert!(r.eps_empirical >= 0.0);
    }
}

#[test]
fn symmetric_config_splits_budget_evenly() {
    let cfg = SystemConfig::default();
    assert_eq!(cfg.users[0].side, Side::Reflect);
    let s = optimize_amplification(&cfg, AoOptions::default()).unwrap();
    assert!((s.a_r - s.a_t).abs() <= 1e-6 * s.a_r);
}
