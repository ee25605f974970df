use std::f64::consts::TAU;

use crate::error::{Error, Result, Violation};
use crate::scenario::SystemConfig;
use crate::{CVector, C64};

/// K orthogonal unit-modulus pilot sequences of length L.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotBook {
    pub sequences: Vec<CVector>,
    /// DFT tone index q_k of each sequence.
    pub tones: Vec<usize>,
}

impl PilotBook {
    pub fn len(&self) -> usize {
        self.sequences.first().map_or(0, |s| s.len())
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn users(&self) -> usize {
        self.sequences.len()
    }

    pub fn symbol(&self, k: usize, l: usize) -> C64 {
        self.sequences[k][l]
    }
}

pub fn build_pilots(config: &SystemConfig) -> Result<PilotBook> {
    build_pilots_for(config.user_count(), config.pilot_len)
}

/// `s_k(l) = e^{j2π l q_k / L}` with adjacent tones `q_k = k` (zero-based).
pub fn build_pilots_for(users: usize, len: usize) -> Result<PilotBook> {
    if len < users {
        return Err(Error::InvalidConfig(vec![Violation::new("pilot_len", "L ≥ K")]));
    }
    let tones: Vec<usize> = (0..users).collect();
    let sequences = tones
        .iter()
        .map(|&q| {
            CVector::from_fn(len, |l, _| {
                // reduce l*q mod L first so the phase stays exact for large products
                let idx = (l * q) % len;
                if idx == 0 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::from_polar(1.0, TAU * idx as f64 / len as f64)
                }
            })
        })
        .collect();
    Ok(PilotBook { sequences, tones })
}
