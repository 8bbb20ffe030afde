//! Baseline schedulers: semi-orthogonal user selection (SUS), dominant-beam
//! aggregation scheduling (mBAS, a reconstruction — see `params`), and
//! uniformly random selection.

use super::{
    dominant_beams, gram_schmidt_component, normalized_correlation, Algorithm, BeamSupport,
    ScheduleResult, ScheduleStep,
};
use crate::config::SystemConfig;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

/// Classic semi-orthogonal user selection: each step schedules the candidate
/// with the largest channel component orthogonal to the scheduled span, then
/// keeps only candidates nearly orthogonal to that component.
pub fn schedule_sus(h_b_all: &DMatrix<Complex64>, cfg: &SystemConfig) -> ScheduleResult {
    let mut result =
        ScheduleResult::new(Algorithm::Sus, format!("eps={}", cfg.sus_eps));

    let columns: Vec<DVector<Complex64>> =
        (0..h_b_all.ncols()).map(|k| h_b_all.column(k).clone_owned()).collect();
    let mut candidates: Vec<usize> = Vec::with_capacity(columns.len());
    for (k, col) in columns.iter().enumerate() {
        if col.norm_squared() > 0.0 {
            candidates.push(k);
        } else {
            result
                .diagnostics
                .push(format!("user {k}: zero beamspace channel, excluded"));
        }
    }

    let mut f_basis: Vec<DVector<Complex64>> = Vec::new();
    while result.scheduled.len() < cfg.scheduled && !candidates.is_empty() {
        let (mut best, mut best_norm, mut best_f) =
            (candidates[0], f64::NEG_INFINITY, DVector::zeros(h_b_all.nrows()));
        for &k in &candidates {
            let f = gram_schmidt_component(&columns[k], &f_basis);
            let norm = f.norm();
            if norm > best_norm {
                (best, best_norm, best_f) = (k, norm, f);
            }
        }
        result.iterations.push(ScheduleStep {
            candidate_count: candidates.len(),
            selected: best,
            metric: best_norm,
        });
        result.scheduled.push(best);
        if best_norm <= 1e-8 * columns[best].norm() {
            result.diagnostics.push(format!(
                "user {best}: channel already in the scheduled span; correlation filter skipped"
            ));
        }
        candidates
            .retain(|&k| k != best && normalized_correlation(&best_f, &columns[k]) < cfg.sus_eps);
        f_basis.push(best_f);
    }
    result
}

/// Dominant-beam aggregation scheduling: greedy by beamspace channel energy,
/// keeping only candidates that share at most N_OL dominant beams with the
/// latest selection. Reconstructed baseline — quantization-unaware by design.
pub fn schedule_mbas(
    h_b_all: &DMatrix<Complex64>,
    path_counts: &[usize],
    cfg: &SystemConfig,
) -> ScheduleResult {
    let n = h_b_all.nrows();
    let params = format!(
        "n_ol={} n_b={} (baseline-approximate reconstruction)",
        cfg.css_n_ol,
        cfg.css_n_b.map_or("L_k".to_string(), |v| v.to_string()),
    );
    let mut result = ScheduleResult::new(Algorithm::Mbas, params);

    let columns: Vec<DVector<Complex64>> =
        (0..h_b_all.ncols()).map(|k| h_b_all.column(k).clone_owned()).collect();
    let supports: Vec<BeamSupport> = columns
        .iter()
        .enumerate()
        .map(|(k, col)| {
            let n_b = cfg.css_n_b.unwrap_or_else(|| path_counts[k].max(1)).min(n);
            dominant_beams(k, col, n_b)
        })
        .collect();
    let energies: Vec<f64> = columns.iter().map(|c| c.norm_squared()).collect();

    let mut candidates: Vec<usize> = Vec::with_capacity(columns.len());
    for (k, &e) in energies.iter().enumerate() {
        if e > 0.0 {
            candidates.push(k);
        } else {
            result
                .diagnostics
                .push(format!("user {k}: zero beamspace channel, excluded"));
        }
    }

    while result.scheduled.len() < cfg.scheduled && !candidates.is_empty() {
        let (mut best, mut best_energy) = (candidates[0], f64::NEG_INFINITY);
        for &k in &candidates {
            if energies[k] > best_energy {
                (best, best_energy) = (k, energies[k]);
            }
        }
        result.iterations.push(ScheduleStep {
            candidate_count: candidates.len(),
            selected: best,
            metric: best_energy,
        });
        result.scheduled.push(best);
        let sup_best = &supports[best];
        candidates.retain(|&k| k != best && sup_best.overlap(&supports[k]) <= cfg.css_n_ol);
    }
    result
}

/// Uniform random choice of `s` of the `k` candidates (all of them when
/// s ≥ k), reported in ascending user order.
pub fn schedule_random<R: Rng + ?Sized>(k: usize, s: usize, rng: &mut R) -> ScheduleResult {
    let mut result = ScheduleResult::new(Algorithm::Random, format!("k={k} s={s}"));
    let mut picks = rand::seq::index::sample(rng, k, s.min(k)).into_vec();
    picks.sort_unstable();
    result.scheduled = picks;
    result
}
