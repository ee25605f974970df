//! LS channel estimation for multi-functional RIS (MF-RIS) aided uplinks.
//!
//! An MF-RIS element reflects, refracts and amplifies at once. Users on the
//! reflect side and on the refract side send orthogonal pilots; the surface
//! sweeps DFT training beams scaled by amplification parameters `(a_R, a_T)`
//! and the BS recovers each user's direct and user–surface channels by
//! least squares.
//!
//! * [`scenario`]: configuration, units, validation, config files.
//! * [`channel`]: seeded channel realizations and text fixtures.
//! * [`training`]: pilots, DFT/baseline beam schedules, amplification tuning.
//! * [`estimation`]: received-pilot synthesis and LS estimation.
//! * [`analysis`]: closed-form errors, CRLB, empirical MSE.
//! * [`harness`]: Monte Carlo trials, sweeps, CSV output, property suite.
//!
//! ```
//! use mfris_est::scenario::SystemConfig;
//! use mfris_est::training::{optimize_amplification, AoOptions};
//!
//! let cfg = SystemConfig::default();
//! let sol = optimize_amplification(&cfg, AoOptions::default()).unwrap();
//! assert!(sol.a_r * sol.a_r + sol.a_t * sol.a_t <= cfg.amplitude_budget() * (1.0 + 1e-12));
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod matrix_text;
pub mod scenario;
pub mod training;

pub use error::{Error, Result};
pub use scenario::{Scheme, Side, SystemConfig};

pub type C64 = num_complex::Complex64;
pub type CMatrix = nalgebra::DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;
