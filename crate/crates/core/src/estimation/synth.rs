use std::io::Write;

use rand::Rng;

use crate::channel::{complex_gaussian, complex_gaussian_vector, ChannelSet};
use crate::error::{Error, Result};
use crate::matrix_text;
use crate::scenario::{DespreadMode, Side, SurfaceNoise, SystemConfig};
use crate::training::{BeamSchedule, PilotBook};
use crate::{CMatrix, CVector, C64};

/// Received pilots for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationBlock {
    /// `y_m`, one length-L vector per antenna (all users superimposed).
    pub rx: Vec<CVector>,
    /// `y_{m,k}`, indexed `[k][m]`.
    pub despread: Vec<Vec<CVector>>,
}

impl ObservationBlock {
    pub fn antennas(&self) -> usize {
        self.rx.len()
    }

    pub fn slots(&self) -> usize {
        self.rx.first().map_or(0, |v| v.len())
    }

    /// Text dump: `rx` (M×L) then one `y<k>` section (M×L) per user.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# observation block")?;
        matrix_text::write_rows(&mut w, "rx", &self.rx)?;
        for (k, y) in self.despread.iter().enumerate() {
            matrix_text::write_rows(&mut w, &format!("y{k}"), y)?;
        }
        Ok(())
    }
}

/// Per-slot responses `φ_iᴴ(l)·G_m`, stored as rows of an L×N matrix.
pub fn response_matrix(schedule: &BeamSchedule, side: Side, g: &CVector) -> CMatrix {
    let l = schedule.slots();
    let n = g.len();
    let mut out = CMatrix::zeros(l, n);
    for (slot, phi) in schedule.coefficients(side).iter().enumerate() {
        for e in 0..n {
            out[(slot, e)] = (phi[e] * g[e]).conj();
        }
    }
    out
}

fn check_dims(channels: &ChannelSet, schedule: &BeamSchedule, pilots: &PilotBook) -> Result<()> {
    let (m, k) = (channels.ris_bs.antennas(), channels.users());
    let n = channels.ris_bs.elements();
    let mut problems = Vec::new();
    if schedule.slots() != pilots.len() {
        problems.push(format!("{} beam slots vs pilot length {}", schedule.slots(), pilots.len()));
    }
    if schedule.elements() != n {
        problems.push(format!("beams have {} elements, channel {n}", schedule.elements()));
    }
    if pilots.users() != k {
        problems.push(format!("{} pilots for {k} users", pilots.users()));
    }
    if channels.direct.iter().any(|h| h.len() != m) || channels.user_ris.iter().any(|f| f.len() != n) {
        problems.push("user link lengths disagree with M, N".into());
    }
    if channels.sides.len() != k || channels.user_ris.len() != k {
        problems.push("user lists disagree".into());
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::Dimension(problems.join("; ")))
    }
}

/// Draws one block of received pilots.
///
/// Signal: `y_m(l) = Σ_k sqrt(P_k)(h_{m,k} + φ_iᴴ(l) G_m f_k) s_k(l) + w_m(l)` with
/// `w_m(l) = Σ_i φ_iᴴ(l) G_m z_i(l) + n_m(l)`. With shared surface noise one
/// `z_i(l)` per slot feeds all antennas; with per-antenna noise each antenna sees
/// an independent draw, sampled directly as the scalar `φ_iᴴ(l) G_m z_{m,i}(l)`
/// (identical in distribution).
///
/// In ideal despread mode `y_{m,k}` keeps only user k's term plus `w_m(l) s_k*(l)`;
/// in full mode `y_{m,k} = y_m ⊙ s_k*`.
pub fn synthesize_rx<R: Rng + ?Sized>(
    channels: &ChannelSet,
    schedule: &BeamSchedule,
    pilots: &PilotBook,
    config: &SystemConfig,
    rng: &mut R,
) -> Result<ObservationBlock> {
    check_dims(channels, schedule, pilots)?;
    if config.users.len() != channels.users() {
        return Err(Error::Dimension("config and channel user counts differ".into()));
    }
    let m_count = channels.ris_bs.antennas();
    let n = channels.ris_bs.elements();
    let l_count = pilots.len();
    let k_count = channels.users();

    let responses: Vec<[CMatrix; 2]> = channels
        .ris_bs
        .g
        .iter()
        .map(|g| Side::BOTH.map(|s| response_matrix(schedule, s, g)))
        .collect();

    // noise w_m(l)
    let ss = schedule.thermal_noise;
    let mut noise: Vec<CVector> = vec![CVector::zeros(l_count); m_count];
    if ss > 0.0 {
        match config.surface_noise {
            SurfaceNoise::Shared => {
                for side in Side::BOTH {
                    for l in 0..l_count {
                        let z = complex_gaussian_vector(rng, n, ss);
                        for (m, w) in noise.iter_mut().enumerate() {
                            let row = responses[m][side.index()].row(l);
                            w[l] += row.iter().zip(z.iter()).map(|(r, z)| r * z).sum::<C64>();
                        }
                    }
                }
            }
            SurfaceNoise::PerAntenna => {
                for (m, w) in noise.iter_mut().enumerate() {
                    for side in Side::BOTH {
                        let resp = &responses[m][side.index()];
                        for l in 0..l_count {
                            let gain: f64 = resp.row(l).iter().map(|r| r.norm_sqr()).sum();
                            w[l] += complex_gaussian(rng, ss * gain);
                        }
                    }
                }
            }
        }
    }
    let s2 = config.receiver_noise_power;
    for w in noise.iter_mut() {
        for l in 0..l_count {
            w[l] += complex_gaussian(rng, s2);
        }
    }

    // user k's noiseless contribution at antenna m: sqrt(P_k)(h_{m,k} + r_{m,i}(l)·f_k)
    let clean = |k: usize, m: usize| -> CVector {
        let side = channels.sides[k];
        let amp = config.users[k].power.sqrt();
        let proj = &responses[m][side.index()] * &channels.user_ris[k];
        proj.map(|x| (x + channels.direct[k][m]) * amp)
    };

    let mut rx: Vec<CVector> = vec![CVector::zeros(l_count); m_count];
    let mut despread: Vec<Vec<CVector>> = vec![Vec::with_capacity(m_count); k_count];
    for m in 0..m_count {
        let mut own: Vec<CVector> = Vec::with_capacity(k_count);
        for k in 0..k_count {
            let c = clean(k, m);
            for l in 0..l_count {
                rx[m][l] += c[l] * pilots.symbol(k, l);
            }
            own.push(c);
        }
        for l in 0..l_count {
            rx[m][l] += noise[m][l];
        }
        for (k, c) in own.into_iter().enumerate() {
            let y = match config.despread_mode {
                DespreadMode::Full => {
                    CVector::from_fn(l_count, |l, _| rx[m][l] * pilots.symbol(k, l).conj())
                }
                DespreadMode::Ideal => {
                    CVector::from_fn(l_count, |l, _| c[l] + noise[m][l] * pilots.symbol(k, l).conj())
                }
            };
            despread[k].push(y);
        }
    }
    Ok(ObservationBlock { rx, despread })
}

/// `y_{m,k}(l) = y_m(l)·s_k*(l)` for every antenna.
pub fn despread(block: &ObservationBlock, pilots: &PilotBook, k: usize) -> Result<Vec<CVector>> {
    if k >= pilots.users() {
        return Err(Error::UnknownUser(k));
    }
    if block.slots() != pilots.len() {
        return Err(Error::Dimension(format!(
            "block has {} slots, pilots {}",
            block.slots(),
            pilots.len()
        )));
    }
    let s = &pilots.sequences[k];
    Ok(block.rx.iter().map(|y| y.zip_map(s, |y, s| y * s.conj())).collect())
}
