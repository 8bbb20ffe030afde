//! User scheduling algorithms: structure-aware selection (CSS), greedy
//! max-sum-rate, chordal-distance subspace selection, and the SUS, mBAS,
//! and random baselines.
//!
//! Common conventions: candidate ids are beamspace column indices; ties in
//! any argmax go to the lowest id; every scheduler is a pure function of
//! its inputs (plus an explicit RNG stream where randomness is part of the
//! algorithm).

mod baselines;
mod chordal;
mod css;
mod greedy;

pub use baselines::{schedule_mbas, schedule_random, schedule_sus};
pub use chordal::{aoa_subspace, chordal_distance, schedule_chordal, AoaSubspace};
pub use css::schedule_css;
pub use greedy::schedule_greedy;

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;

/// The scheduling algorithms the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Css,
    Greedy,
    Chordal,
    Sus,
    Mbas,
    Random,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Css,
        Algorithm::Greedy,
        Algorithm::Chordal,
        Algorithm::Sus,
        Algorithm::Mbas,
        Algorithm::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Css => "css",
            Algorithm::Greedy => "greedy",
            Algorithm::Chordal => "chordal",
            Algorithm::Sus => "sus",
            Algorithm::Mbas => "mbas",
            Algorithm::Random => "random",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}'")))
    }
}

/// One scheduling step: how many candidates were in play, who was picked,
/// and the value of the selection metric.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleStep {
    pub candidate_count: usize,
    pub selected: usize,
    pub metric: f64,
}

/// Output of one scheduler run.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleResult {
    pub algorithm: Algorithm,
    /// Selected user ids in scheduling order (≤ S, all distinct).
    pub scheduled: Vec<usize>,
    pub iterations: Vec<ScheduleStep>,
    /// Compact snapshot of the parameters the run used.
    pub params: String,
    /// Irregularities (excluded users, early stops, fallbacks).
    pub diagnostics: Vec<String>,
}

impl ScheduleResult {
    pub(crate) fn new(algorithm: Algorithm, params: String) -> Self {
        ScheduleResult {
            algorithm,
            scheduled: Vec::new(),
            iterations: Vec::new(),
            params,
            diagnostics: Vec::new(),
        }
    }
}

/// Component of `h` orthogonal to a mutually-orthogonal `basis`:
/// f = (I − Σ_j f_jf_jᴴ/‖f_j‖²)·h. A zero result means h lies in the span.
pub fn gram_schmidt_component(
    h: &DVector<Complex64>,
    basis: &[DVector<Complex64>],
) -> DVector<Complex64> {
    let mut f = h.clone();
    for b in basis {
        let nb = b.norm_squared();
        if nb > 0.0 {
            let coeff = b.dotc(&f) / nb;
            f.axpy(-coeff, b, Complex64::new(1.0, 0.0));
        }
    }
    f
}

/// A user's dominant beam indices, strongest first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BeamSupport {
    pub user_id: usize,
    /// Top-min(N_b, N) beam indices ordered by |h_{b,i}| descending,
    /// magnitude ties broken toward the lower index.
    pub indices: Vec<usize>,
}

impl BeamSupport {
    /// Number of shared dominant beams with another user.
    pub fn overlap(&self, other: &BeamSupport) -> usize {
        self.indices
            .iter()
            .filter(|i| other.indices.contains(i))
            .count()
    }
}

/// Extracts the top-N_b beam indices of a beamspace vector.
pub fn dominant_beams(user_id: usize, h_b: &DVector<Complex64>, n_b: usize) -> BeamSupport {
    let mut order: Vec<usize> = (0..h_b.len()).collect();
    order.sort_by(|&a, &b| h_b[b].norm_sqr().total_cmp(&h_b[a].norm_sqr()).then(a.cmp(&b)));
    order.truncate(n_b.min(h_b.len()));
    BeamSupport {
        user_id,
        indices: order,
    }
}

/// Gathers the listed columns into a new matrix (scheduling order kept).
pub fn gather_columns(h: &DMatrix<Complex64>, ids: &[usize]) -> DMatrix<Complex64> {
    let cols: Vec<_> = ids.iter().map(|&i| h.column(i)).collect();
    DMatrix::from_columns(&cols)
}

/// |fᴴh| / (‖f‖·‖h‖), defined as 0 when either vector is zero.
pub(crate) fn normalized_correlation(f: &DVector<Complex64>, h: &DVector<Complex64>) -> f64 {
    let nf = f.norm();
    let nh = h.norm();
    if nf <= f64::MIN_POSITIVE || nh <= f64::MIN_POSITIVE {
        0.0
    } else {
        f.dotc(h).norm() / (nf * nh)
    }
}
