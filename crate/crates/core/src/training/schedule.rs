use crate::error::{Error, Result};
use crate::scenario::{Scheme, Side, SystemConfig};
use crate::training::DftBasis;
use crate::{CVector, C64};

/// Relative slack on `a_R² + a_T² ≤ β_max·α` and the per-element bounds.
pub const FEASIBILITY_SLACK: f64 = 1e-12;

/// Per-slot reflection/refraction coefficients for one training block.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSchedule {
    pub scheme: Scheme,
    /// `φ_R(l)`, one length-N vector per slot.
    pub reflect: Vec<CVector>,
    /// `φ_T(l)`.
    pub refract: Vec<CVector>,
    /// `(a_R, a_T)` for DFT-family schedules.
    pub amplification: Option<(f64, f64)>,
    /// Surface thermal noise power the schedule injects (0 for passive surfaces).
    pub thermal_noise: f64,
}

impl BeamSchedule {
    pub fn slots(&self) -> usize {
        self.reflect.len()
    }

    pub fn elements(&self) -> usize {
        self.reflect.first().map_or(0, |v| v.len())
    }

    pub fn coefficients(&self, side: Side) -> &[CVector] {
        match side {
            Side::Reflect => &self.reflect,
            Side::Refract => &self.refract,
        }
    }

    /// `φ_iᴴ(l)·G_m` as a vector of its N entries, given `g_m`.
    pub fn response_row(&self, side: Side, l: usize, g: &CVector) -> CVector {
        let phi = &self.coefficients(side)[l];
        phi.zip_map(g, |p, h| (p * h).conj())
    }

    /// True when side `i` never radiates (e.g. the refract side of a reflect-only surface).
    pub fn is_silent(&self, side: Side) -> bool {
        self.coefficients(side)
            .iter()
            .all(|v| v.iter().all(|x| *x == C64::new(0.0, 0.0)))
    }

    /// Largest `|φ_R,n(l)|² + |φ_T,n(l)|²` over all elements and slots.
    pub fn peak_power(&self) -> f64 {
        self.reflect
            .iter()
            .zip(&self.refract)
            .flat_map(|(r, t)| r.iter().zip(t.iter()).map(|(a, b)| a.norm_sqr() + b.norm_sqr()))
            .fold(0.0, f64::max)
    }

    /// Largest single-mode amplitude `|φ_i,n(l)|`.
    pub fn peak_amplitude(&self) -> f64 {
        self.reflect
            .iter()
            .chain(&self.refract)
            .flat_map(|v| v.iter().map(|x| x.norm()))
            .fold(0.0, f64::max)
    }

    /// Both per-element amplitude constraints.
    pub fn satisfies_constraints(&self, beta_max: f64) -> bool {
        let slack = 1.0 + FEASIBILITY_SLACK;
        self.peak_power() <= beta_max * slack && self.peak_amplitude() <= beta_max.sqrt() * slack
    }
}

/// DFT training beams: slot `l` on side `i` is `φ_iᴴ(l) = a_i·d_lᴴ·G⁻¹`, so that
/// `φ_iᴴ(l)·G_1 = a_i·d_lᴴ` with `G_1 = diag(g_1ᴴ)`.
pub fn build_dft_schedule(
    a_r: f64,
    a_t: f64,
    g1: &CVector,
    basis: &DftBasis,
    config: &SystemConfig,
) -> Result<BeamSchedule> {
    if !(a_r >= 0.0 && a_t >= 0.0) {
        return Err(Error::Infeasible {
            used: a_r * a_r + a_t * a_t,
            budget: config.amplitude_budget(),
        });
    }
    let budget = config.amplitude_budget();
    let used = a_r * a_r + a_t * a_t;
    if used > budget * (1.0 + FEASIBILITY_SLACK) {
        return Err(Error::Infeasible { used, budget });
    }
    if g1.len() != basis.elements() {
        return Err(Error::Dimension(format!(
            "g_1 has {} entries, basis expects {}",
            g1.len(),
            basis.elements()
        )));
    }
    if let Some(n) = g1.iter().position(|x| *x == C64::new(0.0, 0.0)) {
        return Err(Error::SingularChannel { element: n });
    }

    let beams = |a: f64| -> Vec<CVector> {
        (0..basis.slots())
            .map(|l| CVector::from_fn(g1.len(), |n, _| basis.row_entry(l, n).conj() * a / g1[n]))
            .collect()
    };
    Ok(BeamSchedule {
        scheme: Scheme::DftMfris,
        reflect: beams(a_r),
        refract: beams(a_t),
        amplification: Some((a_r, a_t)),
        thermal_noise: config.surface_noise_power,
    })
}

/// Fixed comparison schedules.
///
/// * on-off MF-RIS: slot 1 all off, slot `l` switches on element `l−1` with
///   `|φ_R|² = |φ_T|² = β_max/2` (pattern repeats with period N+1);
/// * STAR: DFT beams with `a_R = a_T = sqrt(α/2)`, no thermal noise;
/// * passive: DFT beams with `a_R = sqrt(α)`, `a_T = 0`, no thermal noise;
/// * active: DFT beams with `a_R = sqrt(β_max·α)`, `a_T = 0`.
pub fn build_baseline_schedule(
    scheme: Scheme,
    config: &SystemConfig,
    g1: &CVector,
    basis: &DftBasis,
) -> Result<BeamSchedule> {
    let alpha = config.alpha();
    let (a_r, a_t, thermal) = match scheme {
        Scheme::OnOffMfris => return Ok(on_off(config)),
        Scheme::Star => ((0.5 * alpha).sqrt(), (0.5 * alpha).sqrt(), 0.0),
        Scheme::Passive => (alpha.sqrt(), 0.0, 0.0),
        Scheme::Active => (config.amplitude_budget().sqrt(), 0.0, config.surface_noise_power),
        Scheme::DftMfris => {
            return Err(Error::UnknownScheme(format!(
                "{} is not a baseline (use the amplification optimizer)",
                scheme.tag()
            )))
        }
    };
    let mut s = build_dft_schedule(a_r, a_t, g1, basis, config)?;
    s.scheme = scheme;
    s.thermal_noise = thermal;
    Ok(s)
}

fn on_off(config: &SystemConfig) -> BeamSchedule {
    let n = config.elements;
    let amp = (config.beta_max / 2.0).sqrt();
    let beams: Vec<CVector> = (0..config.pilot_len)
        .map(|l| {
            let mut v = CVector::zeros(n);
            let idx = l % (n + 1);
            if idx > 0 {
                v[idx - 1] = C64::new(amp, 0.0);
            }
            v
        })
        .collect();
    BeamSchedule {
        scheme: Scheme::OnOffMfris,
        reflect: beams.clone(),
        refract: beams,
        amplification: None,
        thermal_noise: config.surface_noise_power,
    }
}
