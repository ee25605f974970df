//! Loads a scenario from TOML, prints the resolved values and the tuned
//! amplification. Pass a path, or run without one to use a built-in file.

use mfris_est::training::{optimize_amplification, AoOptions};
use mfris_est::SystemConfig;

const SAMPLE: &str = r#"
M = 4
N = 16
sigma_s_sq_dbm = -70.0
sigma_sq_dbm = -80.0
beta_max_db = 19.0
d_bs_ris = 30.0

[[users]]
side = "reflect"
power_dbm = 20.0
d_ris = 5.0
d_bs = 30.0

[[users]]
side = "refract"
power_dbm = 17.0
d_ris = 4.0
d_bs = 28.0
"#;

fn main() -> mfris_est::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => SystemConfig::load(path)?,
        None => SystemConfig::from_toml_str(SAMPLE)?,
    };
    print!("{}", cfg.to_toml_string());
    let s = optimize_amplification(&cfg, AoOptions::default())?;
    println!("# a_R = {:.6e}, a_T = {:.6e}, eps = {:.6e}", s.a_r, s.a_t, s.epsilon);
    Ok(())
}
