//! Geometric multipath channel generation, the DFT analog combining bank,
//! and beamspace projection.
//!
//! Convention: antenna spacing is half a wavelength, so the spatial angle
//! ϑ = sin(physical angle) lives in [−1, 1]. The beam grid is anchored at
//! ϑ = −1 with uniform spacing 2/M; any uniform shift of the grid is
//! equivalent up to beam relabeling.

use crate::config::{CombinerPolicy, Scenario, SystemConfig};
use crate::error::{Error, Result};
use crate::rng::complex_gaussian;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use std::f64::consts::PI;

/// Spatial angle of beam-grid point `i` (0-based) for an `m`-antenna array.
pub fn grid_angle(i: usize, m: usize) -> f64 {
    -1.0 + 2.0 * i as f64 / m as f64
}

/// Index of the grid point nearest to `phi` (period-2 wraparound).
pub fn nearest_grid_index(phi: f64, m: usize) -> usize {
    let i = ((phi + 1.0) * m as f64 / 2.0).round() as i64;
    i.rem_euclid(m as i64) as usize
}

/// Unit-norm ULA array response: element m is (1/√M)·e^{−jπ·m·ϑ}, m = 0..M−1.
pub fn steering_vector(theta_spatial: f64, m: usize) -> DVector<Complex64> {
    let scale = 1.0 / (m as f64).sqrt();
    DVector::from_fn(m, |i, _| {
        scale * Complex64::from_polar(1.0, -PI * i as f64 * theta_spatial)
    })
}

/// One user's multipath channel: h = √(M/L)·Σ_ℓ g_ℓ·a(φ_ℓ).
///
/// Uplink power control has already absorbed pathloss, so the gains are
/// standard complex Gaussian and E[‖h‖²] = M.
#[derive(Clone, Debug, PartialEq)]
pub struct UserChannel {
    /// Array size M the channel was drawn for.
    pub antennas: usize,
    /// Spatial angle of arrival per path, each in [−1, 1].
    pub aoa_spatial: Vec<f64>,
    /// Complex small-scale gain per path.
    pub gains: Vec<Complex64>,
}

impl UserChannel {
    /// Path count L.
    pub fn paths(&self) -> usize {
        self.aoa_spatial.len()
    }

    /// Materializes the antenna-domain vector h (M entries).
    pub fn h(&self) -> DVector<Complex64> {
        let scale = (self.antennas as f64 / self.paths() as f64).sqrt();
        let mut h = DVector::zeros(self.antennas);
        for (phi, g) in self.aoa_spatial.iter().zip(&self.gains) {
            h += steering_vector(*phi, self.antennas) * (scale * g);
        }
        h
    }
}

/// The DFT beam grid plus a selected subset of beams. Columns of the
/// analog combiner Ã are the steering vectors of the selected grid points,
/// kept in `selected` order.
#[derive(Clone, Debug)]
pub struct CombinerBank {
    /// Array size M.
    pub antennas: usize,
    /// All M grid angles ϑ_i = −1 + 2i/M.
    pub grid: Vec<f64>,
    /// Grid indices of the selected beams (distinct; length N ≤ M).
    pub selected: Vec<usize>,
    // Per selected beam: cos/sin of t = π·index/M, precomputed so the
    // projection kernel runs without trigonometry in its inner loop.
    cos_t: Vec<f64>,
    sin_t: Vec<f64>,
    // grid index -> position in `selected` (-1 when unselected)
    positions: Vec<i32>,
}

impl CombinerBank {
    fn with_selected(m: usize, selected: Vec<usize>) -> Self {
        let grid = (0..m).map(|i| grid_angle(i, m)).collect();
        let (cos_t, sin_t) = selected
            .iter()
            .map(|&i| {
                let t = PI * i as f64 / m as f64;
                (t.cos(), t.sin())
            })
            .unzip();
        let mut positions = vec![-1i32; m];
        for (pos, &i) in selected.iter().enumerate() {
            positions[i] = pos as i32;
        }
        CombinerBank {
            antennas: m,
            grid,
            selected,
            cos_t,
            sin_t,
            positions,
        }
    }

    /// Number of selected beams (RF chains fed by the combiner).
    pub fn rf_chains(&self) -> usize {
        self.selected.len()
    }

    /// Position of a grid index within the selected set, if selected.
    pub fn position_of(&self, grid_index: usize) -> Option<usize> {
        match self.positions[grid_index] {
            p if p >= 0 => Some(p as usize),
            _ => None,
        }
    }

    /// Full M×M steering matrix over the grid (unitary).
    pub fn a(&self) -> DMatrix<Complex64> {
        DMatrix::from_columns(
            &(0..self.antennas)
                .map(|i| steering_vector(self.grid[i], self.antennas))
                .collect::<Vec<_>>(),
        )
    }

    /// M×N matrix of the selected steering columns (the analog combiner).
    pub fn a_tilde(&self) -> DMatrix<Complex64> {
        DMatrix::from_columns(
            &self
                .selected
                .iter()
                .map(|&i| steering_vector(self.grid[i], self.antennas))
                .collect::<Vec<_>>(),
        )
    }
}

/// Builds the full M-beam DFT bank (all columns selected).
pub fn build_dft_combiner(m: usize) -> CombinerBank {
    CombinerBank::with_selected(m, (0..m).collect())
}

/// Which beams the analog combiner keeps.
#[derive(Clone, Copy, Debug)]
pub enum BeamSelection<'a> {
    /// All M beams (requires N = M).
    FullDft,
    /// The N beams with the largest total energy over the candidate pool.
    StrongestBeams,
    /// An explicit list of N distinct grid indices, in the given order.
    Fixed(&'a [usize]),
}

impl SystemConfig {
    /// The beam-selection policy implied by this configuration.
    pub fn beam_selection(&self) -> BeamSelection<'_> {
        match self.combiner {
            CombinerPolicy::FullDft => BeamSelection::FullDft,
            CombinerPolicy::StrongestBeams => BeamSelection::StrongestBeams,
            CombinerPolicy::FixedIndices => BeamSelection::Fixed(&self.combiner_indices),
        }
    }
}

/// Beamspace image of a candidate pool: column k is Ãᴴh for user
/// `user_ids[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamspaceChannel {
    pub h_b: DMatrix<Complex64>,
    pub user_ids: Vec<usize>,
}

/// Truncated path count L ~ max{Poisson(λ), 1}.
pub fn draw_path_count<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> usize {
    let pois = Poisson::new(lambda).expect("mean_paths must be positive and finite");
    (pois.sample(rng) as usize).max(1)
}

/// Draws one user's channel. Angle order and gain order are fixed
/// (path count, then all angles, then all gains) so streams are stable.
pub fn draw_user_channel<R: Rng + ?Sized>(
    config: &SystemConfig,
    scenario: Scenario,
    rng: &mut R,
) -> Result<UserChannel> {
    let m = config.antennas;
    let l = draw_path_count(config.mean_paths, rng);
    let aoa_spatial = match scenario {
        Scenario::Aligned => {
            if l > m {
                return Err(Error::Domain(format!(
                    "cannot place {l} distinct grid angles on an {m}-beam grid"
                )));
            }
            rand::seq::index::sample(rng, m, l)
                .into_iter()
                .map(|i| grid_angle(i, m))
                .collect()
        }
        Scenario::Arbitrary => (0..l).map(|_| rng.random_range(-1.0..1.0)).collect(),
    };
    let gains = (0..l).map(|_| complex_gaussian(rng)).collect();
    Ok(UserChannel {
        antennas: m,
        aoa_spatial,
        gains,
    })
}

/// Projects one user onto the bank's selected beams: returns Ãᴴh.
///
/// Uses the closed-form Dirichlet sum a(ϑ_i)ᴴa(φ) =
/// e^{j(M−1)(u+t_i)}·sin(M(u+t_i))/(M·sin(u+t_i)) with u = π(−1−φ)/2 and
/// t_i = πi/M, rearranged so each path costs ~5 trig calls total. Paths
/// that sit bitwise on a grid angle take the exact Kronecker-delta path.
pub fn beamspace_column(bank: &CombinerBank, ch: &UserChannel) -> DVector<Complex64> {
    let m = bank.antennas;
    let mf = m as f64;
    let n = bank.rf_chains();
    let mut col = DVector::zeros(n);
    let scale = (mf / ch.paths() as f64).sqrt();
    for (phi, g) in ch.aoa_spatial.iter().zip(&ch.gains) {
        let amp = scale * g;
        let near = nearest_grid_index(*phi, m);
        if bank.grid[near] == *phi {
            // on-grid path: projection is exactly √(M/L)·g at its own beam
            if let Some(pos) = bank.position_of(near) {
                col[pos] += amp;
            }
            continue;
        }
        let u = PI * (-1.0 - phi) / 2.0;
        let (sin_u, cos_u) = u.sin_cos();
        let s_mu = (mf * u).sin();
        let phase = Complex64::from_polar(1.0, (mf - 1.0) * u);
        for pos in 0..n {
            // sin(u + t_i) by angle addition; den = M·sin(u + t_i)
            let den = mf * (sin_u * bank.cos_t[pos] + cos_u * bank.sin_t[pos]);
            let inner = if den.abs() < 1e-9 {
                // removable singularity: beam and path coincide (mod 2)
                Complex64::new(1.0, 0.0)
            } else {
                // the e^{jπi} factors of sin(M(u+t_i)) and e^{j(M−1)t_i}
                // cancel, leaving sin(Mu)/den · e^{j(M−1)u} · e^{−jt_i}
                let r = s_mu / den;
                phase * Complex64::new(r * bank.cos_t[pos], -r * bank.sin_t[pos])
            };
            col[pos] += amp * inner;
        }
    }
    col
}

/// Projects a candidate pool onto the selected beams: H_b = ÃᴴH.
pub fn beamspace_project(bank: &CombinerBank, channels: &[UserChannel]) -> BeamspaceChannel {
    let cols: Vec<_> = channels.iter().map(|ch| beamspace_column(bank, ch)).collect();
    let h_b = if cols.is_empty() {
        DMatrix::zeros(bank.rf_chains(), 0)
    } else {
        DMatrix::from_columns(&cols)
    };
    BeamspaceChannel {
        h_b,
        user_ids: (0..channels.len()).collect(),
    }
}

/// Narrows a full bank to `n` beams according to `selection`.
///
/// strongest_beams ranks grid beams by Σ_k |a(ϑ_i)ᴴh_k|² over the pool
/// (ties to the lower index) and keeps the winners in ascending grid
/// order; fixed indices are kept in their given order.
pub fn select_combiner(
    bank: &CombinerBank,
    channels: &[UserChannel],
    n: usize,
    selection: BeamSelection<'_>,
) -> Result<CombinerBank> {
    let m = bank.antennas;
    if n > m {
        return Err(Error::Config(format!("cannot select {n} of {m} beams")));
    }
    match selection {
        BeamSelection::FullDft => {
            if n != m {
                return Err(Error::Config(format!(
                    "full_dft combining needs rf_chains == antennas ({n} vs {m})"
                )));
            }
            Ok(CombinerBank::with_selected(m, (0..m).collect()))
        }
        BeamSelection::Fixed(indices) => {
            if indices.len() != n {
                return Err(Error::Config(format!(
                    "fixed selection lists {} indices, expected {n}",
                    indices.len()
                )));
            }
            if let Some(&bad) = indices.iter().find(|&&i| i >= m) {
                return Err(Error::Config(format!("beam index {bad} out of range 0..{m}")));
            }
            let mut sorted = indices.to_vec();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Config("fixed beam indices contain duplicates".into()));
            }
            Ok(CombinerBank::with_selected(m, indices.to_vec()))
        }
        BeamSelection::StrongestBeams => {
            if n == m {
                return Ok(CombinerBank::with_selected(m, (0..m).collect()));
            }
            // Rank beams by pool energy on the full grid.
            let full;
            let full_bank = if bank.rf_chains() == m {
                bank
            } else {
                full = build_dft_combiner(m);
                &full
            };
            let mut energy = vec![0.0f64; m];
            for ch in channels {
                let col = beamspace_column(full_bank, ch);
                for i in 0..m {
                    energy[i] += col[i].norm_sqr();
                }
            }
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| energy[b].total_cmp(&energy[a]).then(a.cmp(&b)));
            let mut selected = order[..n].to_vec();
            selected.sort_unstable();
            Ok(CombinerBank::with_selected(m, selected))
        }
    }
}
