#![allow(dead_code)]

use rand::Rng;

use mfris_est::scenario::{dbm_to_watts, db_to_linear, validate, Side, SystemConfig, UserSpec};

/// A random valid two-sided scenario.
pub fn random_config<R: Rng>(rng: &mut R) -> SystemConfig {
    let elements = rng.gen_range(2..=32);
    let k = rng.gen_range(2..=6);
    let mut users: Vec<UserSpec> = (0..k)
        .map(|i| {
            let side = if i % 2 == 0 { Side::Reflect } else { Side::Refract };
            UserSpec::new(
                side,
                dbm_to_watts(rng.gen_range(0.0..30.0)),
                rng.gen_range(2.0..15.0),
                rng.gen_range(10.0..50.0),
            )
        })
        .collect();
    if rng.gen_bool(0.5) {
        users.swap(0, k - 1);
    }
    let cfg = SystemConfig {
        antennas: rng.gen_range(1..=8),
        elements,
        users,
        pilot_len: (elements + 1).max(k) + rng.gen_range(0..6),
        surface_noise_power: dbm_to_watts(rng.gen_range(-90.0..-60.0)),
        receiver_noise_power: dbm_to_watts(rng.gen_range(-95.0..-75.0)),
        beta_max: db_to_linear(rng.gen_range(0.0..25.0)),
        d_bs_ris: rng.gen_range(5.0..50.0),
        ..SystemConfig::default()
    };
    validate(cfg).expect("generator yields valid configs")
}
