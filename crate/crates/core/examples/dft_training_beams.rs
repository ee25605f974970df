//! Builds the DFT training beams for the reference scenario and checks
//! the orthogonality the LS estimator relies on.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mfris_est::channel::generate;
use mfris_est::estimation::observation_matrix;
use mfris_est::training::{build_dft_schedule, dft_basis};
use mfris_est::{Side, SystemConfig};

fn main() -> mfris_est::Result<()> {
    let cfg = SystemConfig::default();
    let ch = generate(&cfg, &mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let basis = dft_basis(cfg.pilot_len, cfg.elements)?;
    let a = (cfg.amplitude_budget() / 2.0).sqrt();
    let sched = build_dft_schedule(a, a, &ch.ris_bs.g[0], &basis, &cfg)?;

    println!("L = {}, N = {}, a_R = a_T = {a:.6e}", sched.slots(), sched.elements());
    println!("peak per-element power {:.4} (beta_max {:.4})", sched.peak_power(), cfg.beta_max);
    println!("constraints hold: {}", sched.satisfies_constraints(cfg.beta_max));

    let theta = observation_matrix(&sched, Side::Reflect, &ch.ris_bs.g[0]);
    let gram = theta.adjoint() * &theta;
    let l = cfg.pilot_len as f64;
    let off: f64 = (0..gram.nrows())
        .flat_map(|i| (0..gram.ncols()).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .map(|(i, j)| gram[(i, j)].norm())
        .fold(0.0, f64::max);
    println!("Theta^H Theta: [0,0] = {:.3} (L), [1,1] = {:.3e} (L a^2), max off-diagonal {off:.2e}",
        gram[(0, 0)].re, gram[(1, 1)].re);
    println!("expected L a^2 = {:.3e}", l * a * a);
    Ok(())
}
