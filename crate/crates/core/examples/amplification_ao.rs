//! Tunes (a_R, a_T) with alternating optimization and compares the result
//! against a dense search and the printed closed-form update.

use mfris_est::scenario::{dbm_to_watts, Side, UserSpec};
use mfris_est::training::{optimize_amplification, oracle_optimum, AoOptions, UpdateRule};
use mfris_est::SystemConfig;

fn main() -> mfris_est::Result<()> {
    let cfg = SystemConfig {
        users: vec![
            UserSpec::new(Side::Reflect, dbm_to_watts(25.0), 5.0, 20.0),
            UserSpec::new(Side::Refract, dbm_to_watts(15.0), 5.0, 20.0),
            UserSpec::new(Side::Refract, dbm_to_watts(15.0), 6.0, 22.0),
        ],
        ..SystemConfig::default()
    };

    let ao = optimize_amplification(&cfg, AoOptions::default())?;
    println!("oracle-update AO: a_R = {:.6e}, a_T = {:.6e}, eps = {:.6e}", ao.a_r, ao.a_t, ao.epsilon);
    println!("  {} iterations, converged = {}", ao.iterations, ao.converged);
    for (i, t) in ao.trace.iter().enumerate() {
        println!("  step {i:>2}: a_R = {:.4e}, a_T = {:.4e}, eps = {:.6e}", t.a_r, t.a_t, t.epsilon);
    }
    if let Some(d) = ao.closed_form_divergence {
        println!("  largest closed-form disagreement {d:.3e}");
    }

    let closed = optimize_amplification(
        &cfg,
        AoOptions {
            update: UpdateRule::ClosedForm,
            ..AoOptions::default()
        },
    )?;
    println!("closed-form AO: eps = {:.6e}", closed.epsilon);

    let oracle = oracle_optimum(&cfg, 400)?;
    println!("dense search:   eps = {:.6e} at ({:.4e}, {:.4e})", oracle.epsilon, oracle.a_r, oracle.a_t);
    println!("relative gap AO vs search: {:.2e}", (ao.epsilon - oracle.epsilon).abs() / oracle.epsilon);
    Ok(())
}
