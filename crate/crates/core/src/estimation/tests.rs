use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::channel::{complex_gaussian_vector, generate, RisBsLink};
use crate::scenario::{Scheme, SurfaceNoise, UserSpec};
use crate::training::{
    build_baseline_schedule, build_dft_schedule, build_pilots, build_pilots_for, dft_basis,
    PilotBook,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dft_setup(cfg: &SystemConfig, seed: u64) -> (ChannelSet, BeamSchedule, PilotBook) {
    let ch = generate(cfg, &mut rng(seed));
    let basis = dft_basis(cfg.pilot_len, cfg.elements).unwrap();
    let a = (cfg.amplitude_budget() / 2.0).sqrt();
    let s = build_dft_schedule(a, a, &ch.ris_bs.g[0], &basis, cfg).unwrap();
    (ch, s, build_pilots(cfg).unwrap())
}

fn silence_users(ch: &mut ChannelSet) {
    for v in ch.direct.iter_mut().chain(ch.user_ris.iter_mut()) {
        v.fill(C64::new(0.0, 0.0));
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[test]
fn receiver_noise_only() {
    let cfg = SystemConfig::default();
    let mut ch = generate(&cfg, &mut rng(1));
    silence_users(&mut ch);
    let basis = dft_basis(cfg.pilot_len, cfg.elements).unwrap();
    let s = build_dft_schedule(0.0, 0.0, &ch.ris_bs.g[0], &basis, &cfg).unwrap();
    let p = build_pilots(&cfg).unwrap();
    let mut r = rng(2);
    let (mut acc, mut count) = (0.0, 0usize);
    for _ in 0..500 {
        let b = synthesize_rx(&ch, &s, &p, &cfg, &mut r).unwrap();
        for y in &b.rx {
            acc += y.norm_squared();
            count += y.len();
        }
    }
    let var = acc / count as f64;
    assert!((var / cfg.receiver_noise_power - 1.0).abs() < 0.02, "{var}");
}

#[test]
fn pencil_case() {
    let cfg = SystemConfig {
        antennas: 1,
        elements: 1,
        pilot_len: 2,
        users: vec![UserSpec::new(Side::Reflect, 0.25, 5.0, 20.0)],
        surface_noise_power: 0.0,
        receiver_noise_power: 0.0,
        ..SystemConfig::default()
    };
    let ch = generate(&cfg, &mut rng(4));
    let basis = dft_basis(2, 1).unwrap();
    let a = 0.5 * cfg.amplitude_budget().sqrt();
    let s = build_dft_schedule(a, 0.0, &ch.ris_bs.g[0], &basis, &cfg).unwrap();
    let p = build_pilots(&cfg).unwrap();
    let b = synthesize_rx(&ch, &s, &p, &cfg, &mut rng(5)).unwrap();
    let (h, f, g) = (ch.direct[0][0], ch.user_ris[0][0], ch.ris_bs.g[0][0]);
    for l in 0..2 {
        let phi_h = s.reflect[l][0].conj();
        let expected = (h + phi_h * g.conj() * f) * 0.5 * p.symbol(0, l);
        assert!((b.rx[0][l] - expected).norm() <= 1e-15 * expected.norm());
    }
}

#[test]
fn noise_variance_under_dft() {
    let cfg = SystemConfig {
        surface_noise_power: 1e-9,
        ..SystemConfig::default()
    };
    let (mut ch, s, p) = dft_setup(&cfg, 3);
    silence_users(&mut ch);
    let (a_r, a_t) = s.amplification.unwrap();
    let expected = cfg.elements as f64 * (a_r * a_r + a_t * a_t) * cfg.surface_noise_power
        + cfg.receiver_noise_power;
    let mut r = rng(6);
    let (mut acc, mut count) = (0.0, 0usize);
    while count < 100_000 {
        let b = synthesize_rx(&ch, &s, &p, &cfg, &mut r).unwrap();
        acc += b.rx[0].norm_squared();
        count += b.rx[0].len();
    }
    assert!((acc / count as f64 / expected - 1.0).abs() < 0.02);
}

#[test]
fn despread_identity_and_errors() {
    let cfg = SystemConfig::default();
    let (ch, s, _) = dft_setup(&cfg, 8);
    let ones = build_pilots_for(2, cfg.pilot_len).unwrap();
    assert!(ones.sequences[0].iter().all(|x| *x == C64::new(1.0, 0.0)));
    let b = synthesize_rx(&ch, &s, &ones, &cfg, &mut rng(9)).unwrap();
    assert_eq!(despread(&b, &ones, 0).unwrap(), b.rx);
    assert!(matches!(despread(&b, &ones, 2), Err(Error::UnknownUser(2))));
}

#[test]
fn despread_keeps_noise_statistics() {
    let cfg = SystemConfig {
        despread_mode: crate::scenario::DespreadMode::Full,
        ..SystemConfig::default()
    };
    let mut ch = generate(&cfg, &mut rng(1));
    silence_users(&mut ch);
    let basis = dft_basis(cfg.pilot_len, cfg.elements).unwrap();
    let s = build_dft_schedule(0.0, 0.0, &ch.ris_bs.g[0], &basis, &cfg).unwrap();
    let p = build_pilots(&cfg).unwrap();
    let mut r = rng(10);
    let (mut acc, mut cross, mut count) = (0.0, C64::new(0.0, 0.0), 0usize);
    for _ in 0..1000 {
        let b = synthesize_rx(&ch, &s, &p, &cfg, &mut r).unwrap();
        let y = &b.despread[1][0];
        acc += y.norm_squared();
        for l in 1..y.len() {
            cross += y[l] * y[l - 1].conj();
        }
        count += y.len();
    }
    let var = acc / count as f64;
    assert!((var / cfg.receiver_noise_power - 1.0).abs() < 0.03);
    assert!(cross.norm() / count as f64 / var < 0.03);
}

#[test]
fn full_equals_ideal_single_user() {
    let base = SystemConfig {
        users: vec![UserSpec::new(Side::Refract, 0.1, 5.0, 20.0)],
        ..SystemConfig::default()
    };
    let full = SystemConfig {
        despread_mode: crate::scenario::DespreadMode::Full,
        ..base.clone()
    };
    let (ch, s, p) = dft_setup(&base, 11);
    let a = synthesize_rx(&ch, &s, &p, &base, &mut rng(12)).unwrap();
    let b = synthesize_rx(&ch, &s, &p, &full, &mut rng(12)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn noise_covariance_cases() {
    let cfg = SystemConfig::default();
    let (ch, _, _) = dft_setup(&cfg, 13);
    let g = &ch.ris_bs.g[0];
    let basis = dft_basis(cfg.pilot_len, cfg.elements).unwrap();

    let off = build_dft_schedule(0.0, 0.0, g, &basis, &cfg).unwrap();
    let cz = noise_covariance(&off, g, &cfg);
    assert_eq!(cz, CMatrix::identity(26, 26).scale(cfg.receiver_noise_power));

    let (a_r, a_t) = (2e-3, 4e-3);
    let dft = build_dft_schedule(a_r, a_t, g, &basis, &cfg).unwrap();
    let expected = 25.0 * (a_r * a_r + a_t * a_t) * cfg.surface_noise_power + cfg.receiver_noise_power;
    for gm in &ch.ris_bs.g {
        let cz = noise_covariance(&dft, gm, &cfg);
        let diff = cz - CMatrix::identity(26, 26).scale(expected);
        assert!(max_abs(&diff) <= 1e-10 * expected);
    }

    let onoff = build_baseline_schedule(Scheme::OnOffMfris, &cfg, g, &basis).unwrap();
    let cz = noise_covariance(&onoff, g, &cfg);
    assert_eq!(cz[(0, 0)].re, cfg.receiver_noise_power);
    assert!(cz[(1, 1)].re > cfg.receiver_noise_power);
    assert_eq!(cz[(0, 1)], C64::new(0.0, 0.0));
}

#[test]
fn noiseless_recovery() {
    let cfg = SystemConfig {
        surface_noise_power: 0.0,
        receiver_noise_power: 0.0,
        ..SystemConfig::default()
    };
    for scheme in [Scheme::DftMfris, Scheme::OnOffMfris] {
        let (ch, dft, p) = dft_setup(&cfg, 14);
        let s = if scheme == Scheme::DftMfris {
            dft
        } else {
            let basis = dft_basis(cfg.pilot_len, cfg.elements).unwrap();
            build_baseline_schedule(scheme, &cfg, &ch.ris_bs.g[0], &basis).unwrap()
        };
        let b = synthesize_rx(&ch, &s, &p, &cfg, &mut rng(15)).unwrap();
        for m in [0, 5] {
            let theta = observation_matrix(&s, Side::Reflect, &ch.ris_bs.g[m]);
            let cz = regularize_covariance(&noise_covariance(&s, &ch.ris_bs.g[m], &cfg));
            let (est, _) = ls_estimate(&b.despread[0][m], &theta, &cz, cfg.users[0].power).unwrap();
            let truth = ch.stacked(m, 0);
            assert!((&est - &truth).norm() <= 1e-9 * truth.norm(), "{scheme} m={m}");
            let simple = simplified_ls_estimate(&b.despread[0][m], &theta, cfg.users[0].power).unwrap();
            assert!((&simple - &truth).norm() <= 1e-9 * truth.norm());
        }
    }
}

#[test]
fn consistency_identity_and_diagonal_covariance() {
    let cfg = SystemConfig::default();
    let (ch, s, _) = dft_setup(&cfg, 16);
    let mut first: Option<CMatrix> = None;
    for gm in &ch.ris_bs.g {
        let theta = observation_matrix(&s, Side::Refract, gm);
        let cz = noise_covariance(&s, gm, &cfg);
        let est = LsEstimator::new(&theta, &cz).unwrap();
        let p = 0.1;
        let ident = est.gain(p) * theta.scale(p.sqrt());
        assert!(max_abs(&(ident - CMatrix::identity(26, 26))) <= 1e-10);
        let c = est.covariance(p);
        let diag_max = (0..26).map(|i| c[(i, i)].re).fold(0.0, f64::max);
        let off = CMatrix::from_fn(26, 26, |i, j| if i == j { C64::new(0.0, 0.0) } else { c[(i, j)] });
        assert!(max_abs(&off) <= 1e-10 * diag_max);
        match &first {
            None => first = Some(c),
            Some(c0) => assert!(max_abs(&(c - c0)) <= 1e-10 * diag_max),
        }
    }
}

#[test]
fn linearity() {
    let cfg = SystemConfig::default();
    let (ch, s, _) = dft_setup(&cfg, 17);
    let theta = observation_matrix(&s, Side::Reflect, &ch.ris_bs.g[0]);
    let cz = noise_covariance(&s, &ch.ris_bs.g[0], &cfg);
    let y = complex_gaussian_vector(&mut rng(18), 26, 1.0);
    let k = C64::new(-0.3, 2.0);
    let (a, _) = ls_estimate(&y, &theta, &cz, 0.1).unwrap();
    let (b, _) = ls_estimate(&y.map(|x| x * k), &theta, &cz, 0.1).unwrap();
    assert!((a * k - &b).norm() <= 1e-12 * b.norm());
}

#[test]
fn simplified_matches_only_for_scalar_covariance() {
    let cfg = SystemConfig {
        pilot_len: 40,
        ..SystemConfig::default()
    };
    let (ch, s, _) = dft_setup(&cfg, 19);
    let g = &ch.ris_bs.g[0];
    let y = complex_gaussian_vector(&mut rng(20), 40, 1.0);

    let theta = observation_matrix(&s, Side::Reflect, g);
    let cz = noise_covariance(&s, g, &cfg);
    let (full, _) = ls_estimate(&y, &theta, &cz, 0.1).unwrap();
    let simple = simplified_ls_estimate(&y, &theta, 0.1).unwrap();
    assert!((&full - &simple).norm() <= 1e-10 * full.norm());

    let cz = CMatrix::from_diagonal(&CVector::from_fn(40, |l, _| C64::new(1.0 + l as f64, 0.0)));
    let (full, _) = ls_estimate(&y, &theta, &cz, 0.1).unwrap();
    let simple = simplified_ls_estimate(&y, &theta, 0.1).unwrap();
    assert!((&full - &simple).norm() > 1e-6 * full.norm());
}

#[test]
fn repeated_beams_are_singular() {
    let cfg = SystemConfig::default();
    let (ch, mut s, _) = dft_setup(&cfg, 21);
    let first = s.reflect[1].clone();
    for v in s.reflect.iter_mut().skip(2) {
        *v = first.clone();
    }
    let g = &ch.ris_bs.g[0];
    let theta = observation_matrix(&s, Side::Reflect, g);
    let cz = noise_covariance(&s, g, &cfg);
    assert!(matches!(LsEstimator::new(&theta, &cz), Err(Error::Singular(_))));
    let bad = CMatrix::identity(26, 26).scale(-1.0);
    assert!(matches!(
        LsEstimator::new(&theta, &bad),
        Err(Error::NotPositiveDefinite)
    ));
}

#[test]
fn dense_covariance_path_agrees() {
    let cfg = SystemConfig::default();
    let (ch, s, _) = dft_setup(&cfg, 22);
    let g = &ch.ris_bs.g[0];
    let theta = observation_matrix(&s, Side::Reflect, g);
    let cz = noise_covariance(&s, g, &cfg);
    let mut dense = cz.clone();
    dense[(0, 1)] = cz[(0, 0)] * 1e-3;
    dense[(1, 0)] = cz[(0, 0)] * 1e-3;
    let y = complex_gaussian_vector(&mut rng(23), 26, 1.0);
    let (e1, c1) = ls_estimate(&y, &theta, &dense, 0.1).unwrap();
    // explicit formula
    let ci = dense.clone().try_inverse().unwrap();
    let fisher = theta.adjoint() * &ci * &theta;
    let finv = fisher.try_inverse().unwrap();
    let e2 = (&finv * theta.adjoint() * &ci * &y).unscale(0.1f64.sqrt());
    assert!((&e1 - &e2).norm() <= 1e-8 * e2.norm());
    assert!(max_abs(&(c1 - finv.unscale(0.1))) <= 1e-8 * max_abs(&finv.unscale(0.1)));
}

#[test]
fn unbiased_with_matching_covariance() {
    let cfg = SystemConfig {
        surface_noise: SurfaceNoise::PerAntenna,
        ..SystemConfig::default()
    };
    let (ch, s, p) = dft_setup(&cfg, 24);
    let g = &ch.ris_bs.g[0];
    let theta = observation_matrix(&s, Side::Reflect, g);
    let cz = noise_covariance(&s, g, &cfg);
    let est = LsEstimator::new(&theta, &cz).unwrap();
    let power = cfg.users[0].power;
    let c = est.covariance(power);
    let truth = ch.stacked(0, 0);
    let trials = 20_000;
    let mut r = rng(25);
    let mut mean = CVector::zeros(26);
    let mut var = vec![0.0; 26];
    for _ in 0..trials {
        let b = synthesize_rx(&ch, &s, &p, &cfg, &mut r).unwrap();
        let e = est.estimate(&b.despread[0][0], power) - &truth;
        for i in 0..26 {
            var[i] += e[i].norm_sqr();
        }
        mean += e;
    }
    let n = trials as f64;
    for i in 0..26 {
        let v = var[i] / n;
        assert!((v / c[(i, i)].re - 1.0).abs() < 0.05, "component {i}");
        assert!((mean[i] / n).norm() <= 4.0 * (v / n).sqrt(), "bias {i}");
    }
}

#[test]
fn combine_cases() {
    let mut r = rng(26);
    let f = complex_gaussian_vector(&mut r, 4, 1.0);
    let single = vec![vec![AntennaEstimate {
        direct: C64::new(1.0, 2.0),
        cascaded: Some(f.clone()),
    }]];
    let set = combine_estimates(&single, &[C64::new(1.0, 0.0)]).unwrap();
    assert_eq!(set.cascaded[0].as_ref().unwrap(), &f);
    assert_eq!(set.direct[0][0], C64::new(1.0, 2.0));

    let same: Vec<AntennaEstimate> = (0..8)
        .map(|_| AntennaEstimate {
            direct: C64::new(0.0, 0.0),
            cascaded: Some(f.clone()),
        })
        .collect();
    let set = combine_estimates(&[same], &[C64::new(1.0, 0.0); 8]).unwrap();
    assert!((set.cascaded[0].as_ref().unwrap() - &f).norm() <= 1e-15 * f.norm());

    // de-rotation: antenna m reports e^{-jθ_m} f
    let link = RisBsLink {
        g: vec![CVector::zeros(1); 3],
        antenna_phase: vec![0.0, 1.0, -2.5],
    };
    let rot: Vec<C64> = (0..3).map(|m| link.rotation(m)).collect();
    let ests: Vec<AntennaEstimate> = rot
        .iter()
        .map(|r| AntennaEstimate {
            direct: C64::new(0.0, 0.0),
            cascaded: Some(&f / *r),
        })
        .collect();
    let set = combine_estimates(&[ests], &rot).unwrap();
    assert!((set.cascaded[0].as_ref().unwrap() - &f).norm() <= 1e-14 * f.norm());

    assert!(combine_estimates(&[vec![]], &[]).is_err());
}

#[test]
fn averaging_reduces_variance() {
    let cfg = SystemConfig {
        surface_noise: SurfaceNoise::PerAntenna,
        ..SystemConfig::default()
    };
    let (ch, s, p) = dft_setup(&cfg, 27);
    let bank = EstimatorBank::new(&s, &ch.ris_bs.g[0], &cfg).unwrap();
    let mut r = rng(28);
    let (mut single, mut avg) = (0.0, 0.0);
    let trials = 10_000;
    for _ in 0..trials {
        let b = synthesize_rx(&ch, &s, &p, &cfg, &mut r).unwrap();
        let set = estimate_block(&b, &ch, &bank, &cfg).unwrap();
        single += (&set.cascaded_per_antenna[0][3] - &ch.user_ris[0]).norm_squared();
        avg += (set.cascaded[0].as_ref().unwrap() - &ch.user_ris[0]).norm_squared();
    }
    let ratio = avg / single;
    assert!((ratio * 8.0 - 1.0).abs() < 0.1, "{ratio}");
}

#[test]
fn silent_side_is_direct_only() {
    let cfg = SystemConfig {
        fair_comparison: false,
        ..SystemConfig::default()
    };
    let ch = generate(&cfg, &mut rng(29));
    let basis = dft_basis(cfg.pilot_len, cfg.elements).unwrap();
    let s = build_baseline_schedule(Scheme::Passive, &cfg, &ch.ris_bs.g[0], &basis).unwrap();
    let p = build_pilots(&cfg).unwrap();
    let bank = EstimatorBank::new(&s, &ch.ris_bs.g[0], &cfg).unwrap();
    let b = synthesize_rx(&ch, &s, &p, &cfg, &mut rng(30)).unwrap();
    let set = estimate_block(&b, &ch, &bank, &cfg).unwrap();
    assert!(set.cascaded[0].is_some());
    assert!(set.cascaded[1].is_none());
    assert_eq!(set.covariance[1].shape(), (1, 1));
}
