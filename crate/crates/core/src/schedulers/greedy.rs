//! Greedy max-sum-rate scheduling: each step adds the candidate whose
//! inclusion yields the largest zero-forcing sum rate.

use super::{gather_columns, Algorithm, ScheduleResult, ScheduleStep};
use crate::config::SystemConfig;
use crate::quantization::aqnm_params;
use crate::rates::sum_rate;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn schedule_greedy(h_b_all: &DMatrix<Complex64>, cfg: &SystemConfig) -> ScheduleResult {
    let model = aqnm_params(cfg.bits).expect("validated config has bits >= 1");
    let rho = cfg.snr();
    let mut result = ScheduleResult::new(
        Algorithm::Greedy,
        format!("alpha={:.6} rho={:.4}", model.alpha, rho),
    );

    let mut candidates: Vec<usize> = (0..h_b_all.ncols()).collect();
    while result.scheduled.len() < cfg.scheduled && !candidates.is_empty() {
        let mut best: Option<(usize, f64)> = None;
        let mut skipped = 0usize;
        for &k in &candidates {
            let ids: Vec<usize> = result.scheduled.iter().copied().chain([k]).collect();
            match sum_rate(&gather_columns(h_b_all, &ids), rho, model.alpha) {
                Ok(breakdown) => {
                    if best.is_none_or(|(_, b)| breakdown.sum > b) {
                        best = Some((k, breakdown.sum));
                    }
                }
                Err(_) => skipped += 1, // near-singular with this candidate
            }
        }
        if skipped > 0 {
            result.diagnostics.push(format!(
                "step {}: skipped {skipped} candidate(s) with singular scheduled sets",
                result.iterations.len() + 1
            ));
        }
        let Some((sel, metric)) = best else {
            result.diagnostics.push(format!(
                "step {}: no schedulable candidate remains; stopping early",
                result.iterations.len() + 1
            ));
            break;
        };
        result.iterations.push(ScheduleStep {
            candidate_count: candidates.len(),
            selected: sel,
            metric,
        });
        result.scheduled.push(sel);
        candidates.retain(|&k| k != sel);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AdcBits;
    use crate::quantization::aqnm_params;
    use crate::rates::single_user_rate;
    use crate::rng::{complex_gaussian, derive_rng};
    use crate::schedulers::schedule_random;
    use nalgebra::DVector;

    fn cfg(s: usize) -> SystemConfig {
        SystemConfig {
            antennas: 8,
            rf_chains: 8,
            candidates: 10,
            scheduled: s,
            bits: AdcBits::Finite(3),
            ..SystemConfig::default()
        }
    }

    #[test]
    fn single_slot_picks_best_single_user() {
        let mut rng = derive_rng(71, &[0]);
        let c = cfg(1);
        let alpha = aqnm_params(c.bits).unwrap().alpha;
        for _ in 0..10 {
            let h = DMatrix::from_fn(8, 6, |_, _| complex_gaussian(&mut rng));
            let res = schedule_greedy(&h, &c);
            let rates: Vec<f64> = (0..6)
                .map(|k| single_user_rate(&h.column(k).clone_owned(), c.snr(), alpha).unwrap())
                .collect();
            let best = (0..6)
                .max_by(|&a, &b| rates[a].partial_cmp(&rates[b]).unwrap())
                .unwrap();
            assert_eq!(res.scheduled, vec![best]);
        }
    }

    #[test]
    fn matches_exhaustive_pairs_when_first_pick_is_in_optimum() {
        let mut rng = derive_rng(71, &[1]);
        let c = cfg(2);
        let alpha = aqnm_params(c.bits).unwrap().alpha;
        let mut checked = 0;
        for _ in 0..30 {
            let h = DMatrix::from_fn(8, 3, |_, _| complex_gaussian(&mut rng));
            let res = schedule_greedy(&h, &c);
            let greedy_sum = res.iterations.last().unwrap().metric;
            // exhaustive search over all pairs
            let mut best_pair = (vec![0, 1], f64::NEG_INFINITY);
            for a in 0..3 {
                for b in (a + 1)..3 {
                    let s = sum_rate(&gather_columns(&h, &[a, b]), c.snr(), alpha)
                        .unwrap()
                        .sum;
                    if s > best_pair.1 {
                        best_pair = (vec![a, b], s);
                    }
                }
            }
            if best_pair.0.contains(&res.scheduled[0]) {
                checked += 1;
                assert!((greedy_sum - best_pair.1).abs() < 1e-12);
            }
        }
        assert!(checked > 0, "oracle never applicable");
    }

    #[test]
    fn beats_random_scheduling_on_paired_instances() {
        let mut rng = derive_rng(71, &[2]);
        let c = cfg(3);
        let alpha = aqnm_params(c.bits).unwrap().alpha;
        let (mut greedy_sum, mut random_sum) = (0.0, 0.0);
        for trial in 0..100u64 {
            let h = DMatrix::from_fn(8, 10, |_, _| complex_gaussian(&mut rng));
            let g = schedule_greedy(&h, &c);
            greedy_sum += sum_rate(&gather_columns(&h, &g.scheduled), c.snr(), alpha)
                .unwrap()
                .sum;
            let mut rrng = derive_rng(71, &[3, trial]);
            let r = schedule_random(10, 3, &mut rrng);
            random_sum += sum_rate(&gather_columns(&h, &r.scheduled), c.snr(), alpha)
                .map(|b| b.sum)
                .unwrap_or(0.0);
        }
        assert!(
            greedy_sum > random_sum,
            "greedy {greedy_sum} vs random {random_sum}"
        );
    }

    #[test]
    fn skips_singular_candidates() {
        let mut rng = derive_rng(71, &[4]);
        let a = DVector::from_fn(8, |_, _| complex_gaussian(&mut rng));
        let b = DVector::from_fn(8, |_, _| complex_gaussian(&mut rng));
        // candidate 1 duplicates candidate 0: after scheduling one of
        // them, the other can never join
        let h = DMatrix::from_columns(&[a.clone(), a.clone(), b]);
        let res = schedule_greedy(&h, &cfg(3));
        assert_eq!(res.scheduled.len(), 2);
        assert!(res.diagnostics.iter().any(|d| d.contains("skipped")));
        let twins = res.scheduled.iter().filter(|&&k| k < 2).count();
        assert_eq!(twins, 1);
    }
}
