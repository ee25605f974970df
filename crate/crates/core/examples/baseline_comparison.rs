//! Empirical and predicted error of each surface type at one operating point.

use mfris_est::harness::{evaluate, TrialPlan};
use mfris_est::training::UpdateRule;
use mfris_est::{Scheme, SystemConfig};

fn main() -> mfris_est::Result<()> {
    let cfg = SystemConfig::default();
    println!("{:<12} {:>12} {:>12} {:>12} {:>12}", "scheme", "a_R", "a_T", "empirical", "theory");
    for scheme in Scheme::ALL {
        let plan = TrialPlan::new(&cfg, scheme, UpdateRule::Oracle)?;
        let r = evaluate(&plan, 2000, cfg.seed)?;
        let (a_r, a_t) = plan.reported_amplification();
        println!(
            "{:<12} {a_r:>12.4e} {a_t:>12.4e} {:>12.4e} {:>12}",
            scheme.tag(),
            r.eps_empirical,
            format!("{:.4e}", r.eps_theory.finite().unwrap_or(f64::INFINITY))
        );
    }
    Ok(())
}
