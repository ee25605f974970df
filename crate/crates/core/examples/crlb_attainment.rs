//! Compares the estimator covariance with the Cramér-Rao bound for a DFT
//! schedule and for the on-off schedule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mfris_est::analysis::crlb;
use mfris_est::channel::generate;
use mfris_est::estimation::{ls_estimate, noise_covariance, observation_matrix};
use mfris_est::training::{build_baseline_schedule, build_dft_schedule, dft_basis, optimize_amplification, AoOptions};
use mfris_est::{Scheme, Side, SystemConfig};

fn main() -> mfris_est::Result<()> {
    let cfg = SystemConfig::default();
    let ch = generate(&cfg, &mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let g = &ch.ris_bs.g[0];
    let basis = dft_basis(cfg.pilot_len, cfg.elements)?;
    let sol = optimize_amplification(&cfg, AoOptions::default())?;
    let p = cfg.users[0].power;

    for (name, sched) in [
        ("dft", build_dft_schedule(sol.a_r, sol.a_t, g, &basis, &cfg)?),
        ("on-off", build_baseline_schedule(Scheme::OnOffMfris, &cfg, g, &basis)?),
    ] {
        let theta = observation_matrix(&sched, Side::Reflect, g);
        let cz = noise_covariance(&sched, g, &cfg);
        let (_, c) = ls_estimate(&theta.column(0).into_owned(), &theta, &cz, p)?;
        let bound = crlb(&theta, &cz, p)?;
        let off: f64 = c.iter().map(|x| x.norm()).sum::<f64>() - c.diagonal().iter().map(|x| x.norm()).sum::<f64>();
        let gap = (0..bound.len())
            .map(|i| (bound[i] - c[(i, i)].re).abs() / bound[i])
            .fold(0.0, f64::max);
        println!("{name:>6}: trace C = {:.4e}, off-diagonal mass {off:.2e}, max CRLB gap {gap:.2e}", c.trace().re);
    }
    Ok(())
}
