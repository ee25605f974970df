//! Seeded channel realizations.
//!
//! The surface–BS link is line-of-sight: every entry has modulus `sqrt(α)` and
//! antenna `m` sees the same vector as antenna 1 up to a common phase,
//! `g_m = e^{jθ_m} g_1`. User links are Rayleigh with path-loss variance.
//! Channels stay fixed across all pilot slots of a block.

use std::f64::consts::TAU;
use std::io::{BufRead, Write};

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix_text;
use crate::scenario::{Side, SystemConfig};
use crate::{CMatrix, CVector, C64};

/// Surface–BS link: per-antenna vectors and their common-phase offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct RisBsLink {
    /// `g_m ∈ C^N` for `m = 1..M`.
    pub g: Vec<CVector>,
    /// `θ_m`, with `θ_1 = 0`.
    pub antenna_phase: Vec<f64>,
}

/// One block's worth of channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub ris_bs: RisBsLink,
    /// Direct user–BS vectors `h_k ∈ C^M`.
    pub direct: Vec<CVector>,
    /// User–surface vectors `f_k ∈ C^N`.
    pub user_ris: Vec<CVector>,
    pub sides: Vec<Side>,
}

impl RisBsLink {
    pub fn antennas(&self) -> usize {
        self.g.len()
    }

    pub fn elements(&self) -> usize {
        self.g.first().map_or(0, |g| g.len())
    }

    /// `G_m = diag(g_m^H)` as a dense matrix.
    pub fn diag_matrix(&self, m: usize) -> CMatrix {
        CMatrix::from_diagonal(&self.g[m].map(|x| x.conj()))
    }

    /// `e^{jθ_m}`, the rotation taking antenna-1 quantities to antenna `m`.
    pub fn rotation(&self, m: usize) -> C64 {
        C64::from_polar(1.0, self.antenna_phase[m])
    }
}

impl ChannelSet {
    pub fn users(&self) -> usize {
        self.direct.len()
    }

    /// Stacked `[h_{m,k}, f_kᵀ]ᵀ` for antenna `m`, user `k`.
    pub fn stacked(&self, m: usize, k: usize) -> CVector {
        let f = &self.user_ris[k];
        let mut v = CVector::zeros(f.len() + 1);
        v[0] = self.direct[k][m];
        v.rows_mut(1, f.len()).copy_from(f);
        v
    }
}

/// Circularly-symmetric complex Gaussian with the given variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}

pub fn complex_gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize, variance: f64) -> CVector {
    DVector::from_fn(len, |_, _| complex_gaussian(rng, variance))
}

pub fn gen_ris_bs<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> RisBsLink {
    let amp = config.alpha().sqrt();
    let g1 = DVector::from_fn(config.elements, |_, _| {
        C64::from_polar(amp, rng.gen_range(0.0..TAU))
    });
    let antenna_phase: Vec<f64> = (0..config.antennas)
        .map(|m| if m == 0 { 0.0 } else { rng.gen_range(0.0..TAU) })
        .collect();
    let g = antenna_phase
        .iter()
        .map(|&t| {
            let r = C64::from_polar(1.0, t);
            g1.map(|x| x * r)
        })
        .collect();
    RisBsLink { g, antenna_phase }
}

/// Direct and user–surface Rayleigh links, one pair per user.
pub fn gen_user_links<R: Rng + ?Sized>(
    config: &SystemConfig,
    rng: &mut R,
) -> (Vec<CVector>, Vec<CVector>) {
    let mut direct = Vec::with_capacity(config.users.len());
    let mut cascade = Vec::with_capacity(config.users.len());
    for u in &config.users {
        let var_bs = config.pl_ref * u.distance_to_bs.powf(-config.pl_exponent_user_bs);
        let var_ris = config.pl_ref * u.distance_to_ris.powf(-config.pl_exponent_user_ris);
        direct.push(complex_gaussian_vector(rng, config.antennas, var_bs));
        cascade.push(complex_gaussian_vector(rng, config.elements, var_ris));
    }
    (direct, cascade)
}

pub fn generate<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> ChannelSet {
    let ris_bs = gen_ris_bs(config, rng);
    let (direct, user_ris) = gen_user_links(config, rng);
    ChannelSet {
        ris_bs,
        direct,
        user_ris,
        sides: config.users.iter().map(|u| u.side).collect(),
    }
}

impl ChannelSet {
    /// Text fixture: sides, antenna phases, then `g` (M×N), `h` (K×M), `f` (K×N).
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# channel set")?;
        let sides: Vec<String> = self.sides.iter().map(|s| s.to_string()).collect();
        writeln!(w, "sides {}", sides.join(" "))?;
        let phases: Vec<String> = self.ris_bs.antenna_phase.iter().map(|p| p.to_string()).collect();
        writeln!(w, "phases {}", phases.join(" "))?;
        matrix_text::write_rows(&mut w, "g", &self.ris_bs.g)?;
        matrix_text::write_rows(&mut w, "h", &self.direct)?;
        matrix_text::write_rows(&mut w, "f", &self.user_ris)?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = matrix_text::Lines::new(r);
        let sides = lines
            .keyed("sides")?
            .iter()
            .map(|s| match s.as_str() {
                "reflect" => Ok(Side::Reflect),
                "refract" => Ok(Side::Refract),
                other => Err(lines.error(format!("unknown side `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let antenna_phase = lines
            .keyed("phases")?
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| lines.error(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let g = matrix_text::read_rows(&mut lines, "g")?;
        let direct = matrix_text::read_rows(&mut lines, "h")?;
        let user_ris = matrix_text::read_rows(&mut lines, "f")?;
        if g.len() != antenna_phase.len() || direct.len() != sides.len() || user_ris.len() != sides.len() {
            return Err(Error::Dimension("channel fixture sections disagree".into()));
        }
        Ok(ChannelSet {
            ris_bs: RisBsLink { g, antenna_phase },
            direct,
            user_ris,
            sides,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn single_entry_modulus() {
        let cfg = SystemConfig {
            antennas: 1,
            elements: 1,
            ..SystemConfig::default()
        };
        let link = gen_ris_bs(&cfg, &mut rng(1));
        assert_relative_eq!(link.g[0][0].norm(), cfg.alpha().sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn los_modulus_and_rank_one() {
        let cfg = SystemConfig::default();
        let link = gen_ris_bs(&cfg, &mut rng(7));
        // 1e-3 * 20^-2.5
        let alpha = 5.590169943749475e-7;
        for (m, gm) in link.g.iter().enumerate() {
            for x in gm.iter() {
                assert_relative_eq!(x.norm_sqr(), alpha, max_relative = 1e-13);
            }
            let r = link.rotation(m);
            for (a, b) in gm.iter().zip(link.g[0].iter()) {
                assert!((a - b * r).norm() <= 1e-15 * a.norm());
            }
        }
        assert_eq!(link.antenna_phase[0], 0.0);
    }

    #[test]
    fn beam_response_has_equal_modulus_across_antennas() {
        let cfg = SystemConfig::default();
        let mut r = rng(3);
        let link = gen_ris_bs(&cfg, &mut r);
        let phi = complex_gaussian_vector(&mut r, cfg.elements, 1.0);
        let f = complex_gaussian_vector(&mut r, cfg.elements, 1.0);
        let resp: Vec<C64> = (0..cfg.antennas)
            .map(|m| (phi.adjoint() * link.diag_matrix(m) * &f)[0])
            .collect();
        for x in &resp {
            assert_relative_eq!(x.norm(), resp[0].norm(), max_relative = 1e-12);
        }
    }

    #[test]
    fn direct_variance_matches_path_loss() {
        // 1e-3 * 25^-3.5 = 1.28e-8
        let mut cfg = SystemConfig::default();
        cfg.users[0].distance_to_bs = 25.0;
        let expected = 1.28e-8;
        let mut r = rng(11);
        let mut acc = 0.0;
        let mut n = 0usize;
        while n < 100_000 {
            let (h, _) = gen_user_links(&cfg, &mut r);
            acc += h[0].iter().map(|x| x.norm_sqr()).sum::<f64>();
            n += h[0].len();
        }
        let var = acc / n as f64;
        assert!((var / expected - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn zero_reference_gives_zero_channels() {
        let cfg = SystemConfig {
            pl_ref: 0.0,
            ..SystemConfig::default()
        };
        let (h, f) = gen_user_links(&cfg, &mut rng(2));
        assert!(h.iter().chain(f.iter()).all(|v| v.iter().all(|x| *x == C64::new(0.0, 0.0))));
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = SystemConfig::default();
        let a = generate(&cfg, &mut rng(42));
        let b = generate(&cfg, &mut rng(42));
        assert_eq!(a, b);
        let c = generate(&cfg, &mut rng(43));
        assert_ne!(a, c);
    }

    #[test]
    fn text_fixture_round_trip() {
        let cfg = SystemConfig::default();
        let a = generate(&cfg, &mut rng(5));
        let mut buf = Vec::new();
        a.write_text(&mut buf).unwrap();
        let b = ChannelSet::read_text(buf.as_slice()).unwrap();
        assert_eq!(a, b);
    }
}
