//! One training block end to end: synthesize, despread, estimate, score.

use mfris_est::harness::{run_trial, TrialPlan};
use mfris_est::training::UpdateRule;
use mfris_est::{Scheme, SystemConfig};

fn main() -> mfris_est::Result<()> {
    let cfg = SystemConfig::default();
    let plan = TrialPlan::new(&cfg, Scheme::DftMfris, UpdateRule::Oracle)?;
    let out = run_trial(&plan, cfg.seed, 0)?;

    for k in 0..cfg.user_count() {
        let h = &out.channels.direct[k];
        let h_hat = &out.estimates.direct[k];
        println!("user {k} ({}):", cfg.users[k].side);
        println!("  |h|^2 = {:.4e}, |h - h_hat|^2 = {:.4e}", h.norm_squared(), out.errors.direct[k]);
        if let Some(e) = out.errors.cascaded[k] {
            println!("  |f|^2 = {:.4e}, |f - f_hat|^2 = {e:.4e}", out.channels.user_ris[k].norm_squared());
        }
        println!("  h[0] = {:.3e}, estimate {:.3e}", h[0], h_hat[0]);
    }
    println!("block sum squared error {:.4e}", out.errors.total());
    println!("predicted eps {:.4e}", plan.theory.total);
    Ok(())
}
