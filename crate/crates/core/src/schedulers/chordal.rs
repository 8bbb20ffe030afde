//! Chordal-distance scheduling on angle-of-arrival subspaces.
//!
//! Each user is represented by the subspace spanned by the steering vectors
//! of its paths that fall inside the analog combiner's beam support. Users
//! are then scheduled to keep successive subspaces far apart in normalized
//! chordal distance, which needs only angle estimates — no instantaneous
//! channel gains.

use super::{gram_schmidt_component, Algorithm, ScheduleResult, ScheduleStep};
use crate::channel::{nearest_grid_index, steering_vector, CombinerBank};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

/// Residual columns with norm below this are treated as linearly dependent
/// and dropped during orthonormalization.
const MGS_TOL: f64 = 1e-8;

/// A user's in-support path set and an orthonormal basis for the subspace
/// its steering vectors span.
#[derive(Clone, Debug)]
pub struct AoaSubspace {
    pub user_id: usize,
    /// Indices of the user's paths whose nearest grid beam is selected.
    pub v_k: Vec<usize>,
    /// Orthonormal basis (antennas × effective rank) of those steering vectors.
    pub q: DMatrix<Complex64>,
}

pub fn aoa_subspace(user_id: usize, aoas: &[f64], bank: &CombinerBank) -> AoaSubspace {
    let m = bank.antennas;
    let v_k: Vec<usize> = (0..aoas.len())
        .filter(|&p| bank.position_of(nearest_grid_index(aoas[p], m)).is_some())
        .collect();
    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(v_k.len());
    for &p in &v_k {
        let residual = gram_schmidt_component(&steering_vector(aoas[p], m), &basis);
        let norm = residual.norm();
        if norm > MGS_TOL {
            basis.push(residual / Complex64::from(norm));
        }
    }
    let q = if basis.is_empty() {
        DMatrix::zeros(m, 0)
    } else {
        DMatrix::from_columns(&basis)
    };
    AoaSubspace { user_id, v_k, q }
}

/// Chordal distance d = √(L_min − ‖Q_aᴴ Q_b‖²_F) between two subspaces,
/// where L_min is the smaller of the two ranks. Ranges over [0, √L_min].
pub fn chordal_distance(q_a: &DMatrix<Complex64>, q_b: &DMatrix<Complex64>) -> Result<f64> {
    let l_min = q_a.ncols().min(q_b.ncols()) as f64;
    let overlap = (q_a.adjoint() * q_b).norm_squared();
    let d_sq = l_min - overlap;
    if d_sq < -1e-10 {
        return Err(Error::Numerical(format!(
            "chordal distance squared fell below zero ({d_sq:.3e})"
        )));
    }
    Ok(d_sq.max(0.0).sqrt())
}

/// Schedules up to `cfg.scheduled` users from angle estimates alone.
///
/// The first user is drawn uniformly among those with the most in-support
/// paths (the supplied `rng` decides the tie). Each later pick first drops —
/// permanently — every candidate whose normalized chordal distance to the
/// most recently scheduled user is not above `cfg.chordal_d_th`, then takes,
/// among candidates with the most in-support paths, the one farthest from
/// that user (lowest id on ties).
pub fn schedule_chordal<R: Rng + ?Sized>(
    aoa_sets: &[Vec<f64>],
    bank: &CombinerBank,
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<ScheduleResult> {
    let mut result = ScheduleResult::new(
        Algorithm::Chordal,
        format!("d_th={} rf_chains={}", cfg.chordal_d_th, bank.rf_chains()),
    );
    let subspaces: Vec<AoaSubspace> = aoa_sets
        .iter()
        .enumerate()
        .map(|(k, aoas)| aoa_subspace(k, aoas, bank))
        .collect();

    let mut candidates: Vec<usize> = (0..subspaces.len())
        .filter(|&k| !subspaces[k].v_k.is_empty())
        .collect();
    let removed = subspaces.len() - candidates.len();
    if removed > 0 {
        result
            .diagnostics
            .push(format!("{removed} user(s) have no path inside the beam support"));
    }
    if candidates.is_empty() {
        result.diagnostics.push("no schedulable users".into());
        return Ok(result);
    }

    // First pick: most in-support paths, uniform among ties.
    let max_v = candidates.iter().map(|&k| subspaces[k].v_k.len()).max().unwrap();
    let ties: Vec<usize> = candidates
        .iter()
        .copied()
        .filter(|&k| subspaces[k].v_k.len() == max_v)
        .collect();
    let first = ties[rng.random_range(0..ties.len())];
    result.iterations.push(ScheduleStep {
        candidate_count: candidates.len(),
        selected: first,
        metric: max_v as f64,
    });
    result.scheduled.push(first);
    candidates.retain(|&k| k != first);

    while result.scheduled.len() < cfg.scheduled && !candidates.is_empty() {
        let prev = &subspaces[*result.scheduled.last().unwrap()];
        // Permanent separation filter against the latest scheduled user.
        let mut survivors = Vec::with_capacity(candidates.len());
        for &k in &candidates {
            let sub = &subspaces[k];
            let l_min = prev.q.ncols().min(sub.q.ncols()) as f64;
            let d = chordal_distance(&prev.q, &sub.q)?;
            if d / l_min.sqrt() > cfg.chordal_d_th {
                survivors.push((k, d));
            }
        }
        if survivors.is_empty() {
            result.diagnostics.push(format!(
                "step {}: every remaining candidate is within d_th of user {}; stopping",
                result.iterations.len() + 1,
                prev.user_id
            ));
            break;
        }
        let max_v = survivors.iter().map(|&(k, _)| subspaces[k].v_k.len()).max().unwrap();
        let (sel, metric) = survivors
            .iter()
            .copied()
            .filter(|&(k, _)| subspaces[k].v_k.len() == max_v)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .unwrap();
        result.iterations.push(ScheduleStep {
            candidate_count: survivors.len(),
            selected: sel,
            metric,
        });
        result.scheduled.push(sel);
        candidates = survivors.into_iter().map(|(k, _)| k).filter(|&k| k != sel).collect();
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_dft_combiner, grid_angle, select_combiner, BeamSelection};
    use crate::numerics::fejer_kernel;
    use crate::rng::derive_rng;
    use rand::Rng;

    fn full_bank(m: usize) -> CombinerBank {
        build_dft_combiner(m)
    }

    #[test]
    fn identical_subspaces_have_zero_distance() {
        let bank = full_bank(16);
        let a = aoa_subspace(0, &[0.3, -0.55], &bank);
        assert!(chordal_distance(&a.q, &a.q).unwrap() < 1e-7);
    }

    #[test]
    fn orthogonal_lines_have_unit_distance() {
        let bank = full_bank(16);
        // Distinct grid angles give exactly orthogonal steering vectors.
        let a = aoa_subspace(0, &[grid_angle(2, 16)], &bank);
        let b = aoa_subspace(1, &[grid_angle(9, 16)], &bank);
        assert!((chordal_distance(&a.q, &b.q).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_path_distance_matches_beam_pattern() {
        // For one-path users, d² = 1 − F²(δ) with δ the angle offset.
        let m = 32;
        let bank = full_bank(m);
        let mut rng = derive_rng(72, &[0]);
        for _ in 0..200 {
            let phi_a: f64 = rng.random_range(-1.0..1.0);
            let phi_b: f64 = rng.random_range(-1.0..1.0);
            let a = aoa_subspace(0, &[phi_a], &bank);
            let b = aoa_subspace(1, &[phi_b], &bank);
            let d = chordal_distance(&a.q, &b.q).unwrap();
            let f = fejer_kernel(phi_a - phi_b, m);
            assert!(
                (d * d - (1.0 - f * f)).abs() < 1e-10,
                "d²={} vs 1−F²={}",
                d * d,
                1.0 - f * f
            );
        }
    }

    #[test]
    fn support_membership_follows_selected_beams() {
        let m = 16;
        let sel = [1usize, 4, 9];
        let bank =
            select_combiner(&full_bank(m), &[], sel.len(), BeamSelection::Fixed(&sel)).unwrap();
        // Paths land nearest to beams 4, 9, and 12; only the first two count.
        let aoas = [grid_angle(4, m) + 0.01, grid_angle(9, m) - 0.02, grid_angle(12, m)];
        let sub = aoa_subspace(3, &aoas, &bank);
        assert_eq!(sub.v_k, vec![0, 1]);
        assert_eq!(sub.q.ncols(), 2);
        assert_eq!(sub.user_id, 3);
    }

    #[test]
    fn users_outside_support_are_dropped() {
        let m = 16;
        let sel = [0usize, 1];
        let bank =
            select_combiner(&full_bank(m), &[], sel.len(), BeamSelection::Fixed(&sel)).unwrap();
        let aoa_sets = vec![vec![grid_angle(8, m)], vec![grid_angle(0, m)]];
        let cfg = SystemConfig { scheduled: 2, ..SystemConfig::default() };
        let mut rng = derive_rng(72, &[1]);
        let res = schedule_chordal(&aoa_sets, &bank, &cfg, &mut rng).unwrap();
        assert_eq!(res.scheduled, vec![1]);
        assert!(res.diagnostics.iter().any(|d| d.contains("no path inside")));
    }

    #[test]
    fn distinct_grid_pool_schedules_pairwise_orthogonal_users() {
        let m = 32;
        let bank = full_bank(m);
        let aoa_sets: Vec<Vec<f64>> = (0..8).map(|k| vec![grid_angle(4 * k, m)]).collect();
        let cfg =
            SystemConfig { scheduled: 5, chordal_d_th: 0.5, ..SystemConfig::default() };
        let mut rng = derive_rng(72, &[2]);
        let res = schedule_chordal(&aoa_sets, &bank, &cfg, &mut rng).unwrap();
        assert_eq!(res.scheduled.len(), 5);
        for (i, &a) in res.scheduled.iter().enumerate() {
            for &b in &res.scheduled[i + 1..] {
                let qa = &aoa_subspace(a, &aoa_sets[a], &bank).q;
                let qb = &aoa_subspace(b, &aoa_sets[b], &bank).q;
                assert!((chordal_distance(qa, qb).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coinciding_users_are_never_scheduled_together() {
        let m = 32;
        let bank = full_bank(m);
        // Users 0 and 1 share an angle; user 2 is far away.
        let aoa_sets =
            vec![vec![grid_angle(3, m)], vec![grid_angle(3, m)], vec![grid_angle(19, m)]];
        let cfg = SystemConfig { scheduled: 3, ..SystemConfig::default() };
        for trial in 0..20u64 {
            let mut rng = derive_rng(72, &[3, trial]);
            let res = schedule_chordal(&aoa_sets, &bank, &cfg, &mut rng).unwrap();
            let twins = res.scheduled.iter().filter(|&&k| k < 2).count();
            assert_eq!(twins, 1, "coinciding users both scheduled: {:?}", res.scheduled);
        }
    }

    #[test]
    fn separation_filter_matches_beam_pattern_threshold() {
        // With single-path users the filter keeps exactly those whose beam
        // pattern value against the scheduled user satisfies F < √(1−d_th²).
        let m = 32;
        let bank = full_bank(m);
        let mut rng = derive_rng(72, &[4]);
        let anchor = 0.28_f64;
        // Two coinciding paths give the anchor the largest raw path count
        // (so it is picked first, no tie) while its basis stays rank one —
        // exactly the case where path count and effective rank differ.
        let mut aoa_sets = vec![vec![anchor, anchor]];
        for _ in 0..30 {
            aoa_sets.push(vec![rng.random_range(-1.0..1.0)]);
        }
        let cfg =
            SystemConfig { scheduled: 2, chordal_d_th: 0.8, ..SystemConfig::default() };
        let mut r = derive_rng(72, &[5]);
        let res = schedule_chordal(&aoa_sets, &bank, &cfg, &mut r).unwrap();
        assert_eq!(res.scheduled[0], 0);
        let f_cut = (1.0 - cfg.chordal_d_th * cfg.chordal_d_th).sqrt();
        let survivors: Vec<usize> = (1..aoa_sets.len())
            .filter(|&k| fejer_kernel(aoa_sets[k][0] - anchor, m) < f_cut)
            .collect();
        assert_eq!(res.iterations[1].candidate_count, survivors.len());
        assert!(survivors.contains(&res.scheduled[1]));
    }

    #[test]
    fn distance_is_symmetric_and_bounded() {
        let bank = full_bank(24);
        let mut rng = derive_rng(72, &[6]);
        for _ in 0..100 {
            let la = rng.random_range(1..=3);
            let lb = rng.random_range(1..=3);
            let aoas_a: Vec<f64> = (0..la).map(|_| rng.random_range(-1.0..1.0)).collect();
            let aoas_b: Vec<f64> = (0..lb).map(|_| rng.random_range(-1.0..1.0)).collect();
            let a = aoa_subspace(0, &aoas_a, &bank);
            let b = aoa_subspace(1, &aoas_b, &bank);
            let d_ab = chordal_distance(&a.q, &b.q).unwrap();
            let d_ba = chordal_distance(&b.q, &a.q).unwrap();
            assert!((d_ab - d_ba).abs() < 1e-12);
            let l_min = a.q.ncols().min(b.q.ncols()) as f64;
            assert!(d_ab >= 0.0 && d_ab <= l_min.sqrt() + 1e-12);
        }
    }
}
