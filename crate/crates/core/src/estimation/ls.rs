use nalgebra::{Cholesky, DVector, Dyn};

use super::synth::response_matrix;
use crate::error::{Error, Result};
use crate::scenario::{Side, SystemConfig};
use crate::training::BeamSchedule;
use crate::{CMatrix, CVector, C64};

/// Condition-number estimate above which the Fisher matrix is treated as singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e12;

/// `Θ_{m,i}`: row l is `[1, φ_iᴴ(l)·G_m]`, computed from `g_m`.
pub fn observation_matrix(schedule: &BeamSchedule, side: Side, g: &CVector) -> CMatrix {
    let resp = response_matrix(schedule, side, g);
    let mut theta = CMatrix::from_element(resp.nrows(), resp.ncols() + 1, C64::new(1.0, 0.0));
    theta.columns_mut(1, resp.ncols()).copy_from(&resp);
    theta
}

/// Diagonal of `Ψ_{m,i}Ψ_{m,i}ᴴ`, i.e. `‖φ_iᴴ(l)·G_m‖²` per slot.
pub fn psi_gram(schedule: &BeamSchedule, side: Side, g: &CVector) -> DVector<f64> {
    let resp = response_matrix(schedule, side, g);
    DVector::from_fn(resp.nrows(), |l, _| resp.row(l).iter().map(|x| x.norm_sqr()).sum())
}

/// `C_{z,m} = σ_s²[Ψ_{m,R}Ψ_{m,R}ᴴ + Ψ_{m,T}Ψ_{m,T}ᴴ] + σ²I_L`, with σ_s² the
/// schedule's thermal noise (zero for passive surfaces).
pub fn noise_covariance(schedule: &BeamSchedule, g: &CVector, config: &SystemConfig) -> CMatrix {
    let gram = psi_gram(schedule, Side::Reflect, g) + psi_gram(schedule, Side::Refract, g);
    let diag = gram.map(|x| C64::new(schedule.thermal_noise * x + config.receiver_noise_power, 0.0));
    CMatrix::from_diagonal(&diag)
}

/// Adds a relative floor to the diagonal so a noiseless covariance stays invertible.
pub fn regularize_covariance(cz: &CMatrix) -> CMatrix {
    let max = cz.diagonal().iter().map(|x| x.re).fold(0.0, f64::max);
    let floor = if max > 0.0 { 1e-12 * max } else { 1.0 };
    let mut out = cz.clone();
    for i in 0..out.nrows() {
        if out[(i, i)].re < floor {
            out[(i, i)] = C64::new(out[(i, i)].re.max(0.0) + floor, 0.0);
        }
    }
    out
}

fn is_diagonal(c: &CMatrix) -> bool {
    c.is_square()
        && (0..c.nrows()).all(|i| (0..c.ncols()).all(|j| i == j || c[(i, j)] == C64::new(0.0, 0.0)))
}

/// Whitened least squares for a fixed `(Θ, C_z)`.
///
/// Precomputes `E₀ = (ΘᴴC_z⁻¹Θ)⁻¹ΘᴴC_z⁻¹` so each estimate is one matrix–vector product.
#[derive(Debug, Clone)]
pub struct LsEstimator {
    gain: CMatrix,
    fisher_inverse: CMatrix,
}

impl LsEstimator {
    pub fn new(theta: &CMatrix, cz: &CMatrix) -> Result<Self> {
        let (l, p) = theta.shape();
        if cz.shape() != (l, l) {
            return Err(Error::Dimension(format!(
                "Θ has {l} rows, C_z is {}×{}",
                cz.nrows(),
                cz.ncols()
            )));
        }
        if p == 0 || p > l {
            return Err(Error::Singular(format!("Θ is {l}×{p}: more unknowns than slots")));
        }
        // X = C_z^{-1/2}-whitened Θ, so that ΘᴴC_z⁻¹ = X̃ᴴ with X̃ = L⁻ᴴ X
        let (whitened, weighted) = if is_diagonal(cz) {
            let d: Vec<f64> = cz.diagonal().iter().map(|x| x.re).collect();
            if d.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::NotPositiveDefinite);
            }
            let w = CMatrix::from_fn(l, p, |r, c| theta[(r, c)] / d[r].sqrt());
            let v = CMatrix::from_fn(l, p, |r, c| theta[(r, c)] / d[r]);
            (w, v)
        } else {
            let chol = Cholesky::new(cz.clone()).ok_or(Error::NotPositiveDefinite)?;
            let lower = chol.l();
            let w = lower
                .solve_lower_triangular(theta)
                .ok_or(Error::NotPositiveDefinite)?;
            let v = lower
                .adjoint()
                .solve_upper_triangular(&w)
                .ok_or(Error::NotPositiveDefinite)?;
            (w, v)
        };
        let fisher = whitened.adjoint() * &whitened;

        // Jacobi scaling before the condition check
        let scale: Vec<f64> = (0..p).map(|i| fisher[(i, i)].re).collect();
        if scale.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::Singular("observation matrix has an all-zero column".into()));
        }
        let inv_sqrt: Vec<f64> = scale.iter().map(|s| 1.0 / s.sqrt()).collect();
        let scaled = CMatrix::from_fn(p, p, |i, j| fisher[(i, j)] * (inv_sqrt[i] * inv_sqrt[j]));
        let chol: Cholesky<C64, Dyn> = Cholesky::new(scaled)
            .ok_or_else(|| Error::Singular("repeated or dependent training beams".into()))?;
        let pivots: Vec<f64> = chol.l_dirty().diagonal().iter().map(|x| x.re.abs()).collect();
        let (lo, hi) = pivots
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let cond = (hi / lo).powi(2);
        if !(cond <= SINGULARITY_THRESHOLD) {
            return Err(Error::Singular(format!(
                "training beams (condition estimate {cond:e})"
            )));
        }

        // F⁻¹ = S (S F S)⁻¹ S with S = diag(inv_sqrt)
        let rhs = CMatrix::from_fn(p, l, |i, r| weighted[(r, i)].conj() * inv_sqrt[i]);
        let solved = chol.solve(&rhs);
        let gain = CMatrix::from_fn(p, l, |i, r| solved[(i, r)] * inv_sqrt[i]);
        let eye = CMatrix::from_diagonal(&DVector::from_iterator(
            p,
            inv_sqrt.iter().map(|&s| C64::new(s, 0.0)),
        ));
        let inner = chol.solve(&eye);
        let fisher_inverse = CMatrix::from_fn(p, p, |i, j| inner[(i, j)] * inv_sqrt[i]);
        Ok(Self { gain, fisher_inverse })
    }

    /// `(1/sqrt(P_k))·(ΘᴴC_z⁻¹Θ)⁻¹ΘᴴC_z⁻¹ y`.
    pub fn estimate(&self, y: &CVector, power: f64) -> CVector {
        (&self.gain * y).unscale(power.sqrt())
    }

    /// `C_h = (1/P_k)(ΘᴴC_z⁻¹Θ)⁻¹`.
    pub fn covariance(&self, power: f64) -> CMatrix {
        self.fisher_inverse.unscale(power)
    }

    /// The matrix `E = (1/sqrt(P_k))(ΘᴴC_z⁻¹Θ)⁻¹ΘᴴC_z⁻¹` applied by [`Self::estimate`].
    pub fn gain(&self, power: f64) -> CMatrix {
        self.gain.unscale(power.sqrt())
    }

    pub fn unknowns(&self) -> usize {
        self.gain.nrows()
    }
}

/// One-shot whitened LS: returns the estimate and its covariance `C_h`.
pub fn ls_estimate(y: &CVector, theta: &CMatrix, cz: &CMatrix, power: f64) -> Result<(CVector, CMatrix)> {
    if y.len() != theta.nrows() {
        return Err(Error::Dimension(format!("y has {} slots, Θ {}", y.len(), theta.nrows())));
    }
    let est = LsEstimator::new(theta, cz)?;
    Ok((est.estimate(y, power), est.covariance(power)))
}

/// Unwhitened LS `(1/sqrt(P_k))(ΘᴴΘ)⁻¹Θᴴ y`.
pub fn simplified_ls_estimate(y: &CVector, theta: &CMatrix, power: f64) -> Result<CVector> {
    let identity = CMatrix::identity(theta.nrows(), theta.nrows());
    ls_estimate(y, theta, &identity, power).map(|(e, _)| e)
}
