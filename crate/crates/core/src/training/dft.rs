use std::f64::consts::TAU;

use nalgebra::DMatrixView;

use crate::error::{Error, Result};
use crate::{CMatrix, C64};

/// First N+1 columns of the L-point DFT matrix.
///
/// Entry `(l, n)` is `e^{−j2π l n / L}` (zero-based). Column 0 drives the
/// direct channel, columns 1..=N the cascaded one.
#[derive(Debug, Clone, PartialEq)]
pub struct DftBasis {
    pub full: CMatrix,
}

impl DftBasis {
    pub fn slots(&self) -> usize {
        self.full.nrows()
    }

    pub fn elements(&self) -> usize {
        self.full.ncols() - 1
    }

    /// The last N columns, one row `d_lᴴ` per slot.
    pub fn cascaded(&self) -> DMatrixView<'_, C64> {
        self.full.columns(1, self.elements())
    }

    pub fn row_entry(&self, l: usize, n: usize) -> C64 {
        self.full[(l, n + 1)]
    }
}

pub fn dft_basis(slots: usize, elements: usize) -> Result<DftBasis> {
    if slots < elements + 1 {
        return Err(Error::Dimension(format!(
            "DFT basis needs L ≥ N+1 (L = {slots}, N = {elements})"
        )));
    }
    let full = CMatrix::from_fn(slots, elements + 1, |l, n| {
        let idx = (l * n) % slots;
        if idx == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::from_polar(1.0, -TAU * idx as f64 / slots as f64)
        }
    });
    Ok(DftBasis { full })
}
