//! Sum MSE against transmit power for every scheme. Pass a trial count as
//! the first argument (default 2000).

use mfris_est::harness::{run_sweep, to_csv_string, SweepSpec, SweepVar};
use mfris_est::SystemConfig;

fn main() -> mfris_est::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let mut spec = SweepSpec::new(SweepVar::Power, SystemConfig::default());
    spec.trials = trials;
    let result = run_sweep(&spec)?;
    print!("{}", to_csv_string(&result)?);
    Ok(())
}
