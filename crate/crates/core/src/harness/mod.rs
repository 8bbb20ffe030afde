//! Seeded Monte Carlo experiment loops: paired algorithm comparisons at a
//! single operating point, parameter sweeps, and closed-form-vs-simulation
//! validation tables.

pub mod report;

use crate::channel::{
    beamspace_project, build_dft_combiner, draw_user_channel, select_combiner, CombinerBank,
    UserChannel,
};
use crate::config::{AdcBits, CombinerPolicy, Scenario, SystemConfig};
use crate::error::{Error, Result};
use crate::quantization::aqnm_params;
use crate::rates::sum_rate;
use crate::rng::{derive_rng, purpose};
use crate::schedulers::{
    gather_columns, schedule_chordal, schedule_css, schedule_greedy, schedule_mbas,
    schedule_random, schedule_sus, Algorithm,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::time::Instant;

/// Per-algorithm aggregate at one axis point.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmStats {
    pub algorithm: Algorithm,
    /// Mean sum rate over the valid trials, bits/s/Hz.
    pub mean_sum_rate: f64,
    /// Sample standard deviation / √(valid trials); 0 with fewer than two.
    pub std_err: f64,
    /// Trials that produced a rate.
    pub trials: usize,
    /// Trials excluded because scheduling or rating failed numerically.
    pub invalid_trials: usize,
}

/// One swept value and the paired per-algorithm statistics at it.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisPoint {
    pub axis_value: f64,
    pub stats: Vec<AlgorithmStats>,
}

/// Results of an experiment: one or more axis points, every algorithm
/// evaluated on identical channel realizations within each trial.
#[derive(Clone, Debug)]
pub struct RateReport {
    /// Name of the swept quantity ("snr_db", "bits", "rf_chains", ...).
    pub axis: String,
    pub points: Vec<AxisPoint>,
    /// Base configuration the run started from.
    pub config: SystemConfig,
    /// Requested trials per point.
    pub trials: usize,
    pub wall_time_secs: f64,
}

/// Runs every algorithm on `trials` common channel draws at the config's
/// operating point. A trial whose scheduling or rate evaluation fails
/// numerically is excluded from that algorithm's mean and counted in
/// `invalid_trials`; the other algorithms still use the trial.
pub fn run_experiment(
    cfg: &SystemConfig,
    algorithms: &[Algorithm],
    trials: usize,
) -> Result<RateReport> {
    let started = Instant::now();
    let stats = run_point(cfg, algorithms, trials)?;
    Ok(RateReport {
        axis: "snr_db".into(),
        points: vec![AxisPoint { axis_value: cfg.snr_db, stats }],
        config: cfg.clone(),
        trials,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// The quantities `sweep` can vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    SnrDb,
    Bits,
    RfChains,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::Bits => "bits",
            SweepAxis::RfChains => "rf_chains",
        }
    }
}

/// One `run_experiment` per axis value. Point i runs under seed
/// `base_seed + i` so points are independent yet reproducible; within a
/// point all algorithms stay paired.
pub fn sweep(
    cfg: &SystemConfig,
    axis: SweepAxis,
    values: &[f64],
    algorithms: &[Algorithm],
    trials: usize,
) -> Result<RateReport> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one axis value".into()));
    }
    let started = Instant::now();
    let mut points = Vec::with_capacity(values.len());
    for (i, &value) in values.iter().enumerate() {
        let mut point_cfg = cfg.clone();
        match axis {
            SweepAxis::SnrDb => {
                if !value.is_finite() {
                    return Err(Error::Config(format!("snr_db value {value} is not finite")));
                }
                point_cfg.snr_db = value;
            }
            SweepAxis::Bits => {
                point_cfg.bits = AdcBits::Finite(integral_value(value, "bits")? as u32);
            }
            SweepAxis::RfChains => {
                point_cfg.rf_chains = integral_value(value, "rf_chains")? as usize;
            }
        }
        point_cfg.seed = cfg.seed.wrapping_add(i as u64);
        let stats = run_point(&point_cfg, algorithms, trials)?;
        points.push(AxisPoint { axis_value: value, stats });
    }
    Ok(RateReport {
        axis: axis.name().into(),
        points,
        config: cfg.clone(),
        trials,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Scheduler knobs exposed to grid search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchedulerParam {
    CssEps,
    CssNOl,
    ChordalDTh,
}

impl SchedulerParam {
    pub fn name(self) -> &'static str {
        match self {
            SchedulerParam::CssEps => "css_eps",
            SchedulerParam::CssNOl => "css_n_ol",
            SchedulerParam::ChordalDTh => "chordal_d_th",
        }
    }

    /// The algorithm the knob belongs to (the default sweep subject).
    pub fn algorithm(self) -> Algorithm {
        match self {
            SchedulerParam::CssEps | SchedulerParam::CssNOl => Algorithm::Css,
            SchedulerParam::ChordalDTh => Algorithm::Chordal,
        }
    }
}

/// Grid search over one scheduler parameter; same seeding scheme as
/// `sweep`. Used for tuning ε, N_OL, and d_th.
pub fn sweep_scheduler_param(
    cfg: &SystemConfig,
    param: SchedulerParam,
    values: &[f64],
    algorithms: &[Algorithm],
    trials: usize,
) -> Result<RateReport> {
    if values.is_empty() {
        return Err(Error::Config("parameter sweep needs at least one value".into()));
    }
    let started = Instant::now();
    let mut points = Vec::with_capacity(values.len());
    for (i, &value) in values.iter().enumerate() {
        let mut point_cfg = cfg.clone();
        match param {
            SchedulerParam::CssEps => point_cfg.css_eps = value,
            SchedulerParam::CssNOl => point_cfg.css_n_ol = integral_value(value, "css_n_ol")? as usize,
            SchedulerParam::ChordalDTh => point_cfg.chordal_d_th = value,
        }
        point_cfg.seed = cfg.seed.wrapping_add(i as u64);
        let stats = run_point(&point_cfg, algorithms, trials)?;
        points.push(AxisPoint { axis_value: value, stats });
    }
    Ok(RateReport {
        axis: param.name().into(),
        points,
        config: cfg.clone(),
        trials,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

fn integral_value(value: f64, what: &str) -> Result<u64> {
    if value.fract() != 0.0 || value < 1.0 || value > u32::MAX as f64 {
        return Err(Error::Config(format!(
            "{what} sweep values must be positive integers, got {value}"
        )));
    }
    Ok(value as u64)
}

/// One scenario/resolution row of the closed-form validation table.
#[derive(Clone, Debug)]
pub struct ValidationRow {
    pub scenario: Scenario,
    pub bits: AdcBits,
    /// Linear SNR the row was evaluated at.
    pub rho: f64,
    pub closed_form: f64,
    pub mc_mean: f64,
    pub mc_std_err: f64,
    /// (mc_mean − closed_form) / closed_form.
    pub rel_gap: f64,
    pub trials: usize,
    pub invalid_trials: usize,
}

/// Closed-form vs Monte Carlo comparison across scenarios and resolutions.
#[derive(Clone, Debug)]
pub struct ValidationTable {
    pub rows: Vec<ValidationRow>,
    /// The forced single-path, N = M configuration the rows ran under.
    pub config: SystemConfig,
    pub wall_time_secs: f64,
}

/// Compares the closed forms against subspace-distance-scheduled Monte
/// Carlo in the setting the analysis assumes: one path per user and a full
/// square combiner. Trials that schedule fewer than S users are excluded
/// (the closed forms model exactly-S sums) and counted invalid.
pub fn validate_closed_forms(
    base: &SystemConfig,
    bits_list: &[AdcBits],
    trials: usize,
) -> Result<ValidationTable> {
    let started = Instant::now();
    let mut forced = base.clone();
    forced.rf_chains = forced.antennas;
    forced.combiner = CombinerPolicy::FullDft;
    // drive the path-count draw to its floor of one path
    forced.mean_paths = 1e-12;
    forced.validate()?;
    if trials == 0 {
        return Err(Error::Config("validation needs trials >= 1".into()));
    }

    let mut rows = Vec::new();
    for scenario in [Scenario::Aligned, Scenario::Arbitrary] {
        for &bits in bits_list {
            let mut cfg = forced.clone();
            cfg.scenario = scenario;
            cfg.bits = bits;
            rows.push(validation_row(&cfg, trials)?);
        }
    }
    Ok(ValidationTable {
        rows,
        config: forced,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

fn validation_row(cfg: &SystemConfig, trials: usize) -> Result<ValidationRow> {
    let model = aqnm_params(cfg.bits)?;
    let rho = cfg.snr();
    let closed = match cfg.scenario {
        Scenario::Aligned => {
            crate::analysis::ergodic_rate_aligned(cfg.scheduled, cfg.antennas, rho, model.alpha)?
        }
        Scenario::Arbitrary => {
            crate::analysis::ergodic_rate_leakage_lb(cfg.scheduled, cfg.antennas, rho, model.alpha)?
        }
    };

    let bank = build_dft_combiner(cfg.antennas);
    let outcomes: Vec<Option<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<Option<f64>> {
            let users = draw_users(cfg, trial)?;
            let h_b = beamspace_project(&bank, &users).h_b;
            let aoas: Vec<Vec<f64>> = users.iter().map(|u| u.aoa_spatial.clone()).collect();
            let mut rng = derive_rng(cfg.seed, &[purpose::CHORDAL_INIT, trial]);
            let Ok(sched) = schedule_chordal(&aoas, &bank, cfg, &mut rng) else {
                return Ok(None);
            };
            if sched.scheduled.len() < cfg.scheduled {
                return Ok(None);
            }
            match sum_rate(&gather_columns(&h_b, &sched.scheduled), rho, model.alpha) {
                Ok(b) => Ok(Some(b.sum)),
                Err(Error::Singular { .. }) | Err(Error::Numerical(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let (mean, std_err, valid) = aggregate(&outcomes);
    Ok(ValidationRow {
        scenario: cfg.scenario,
        bits: cfg.bits,
        rho,
        closed_form: closed.total,
        mc_mean: mean,
        mc_std_err: std_err,
        rel_gap: (mean - closed.total) / closed.total,
        trials: valid,
        invalid_trials: trials - valid,
    })
}

/// Draws the trial's candidate pool; user u's stream is keyed by
/// (seed, CHANNEL, trial, u), so the pool is identical for every consumer.
fn draw_users(cfg: &SystemConfig, trial: u64) -> Result<Vec<UserChannel>> {
    (0..cfg.candidates as u64)
        .map(|u| {
            let mut rng = derive_rng(cfg.seed, &[purpose::CHANNEL, trial, u]);
            draw_user_channel(cfg, cfg.scenario, &mut rng)
        })
        .collect()
}

fn run_point(cfg: &SystemConfig, algorithms: &[Algorithm], trials: usize) -> Result<Vec<AlgorithmStats>> {
    cfg.validate()?;
    if trials == 0 {
        return Err(Error::Config("experiment needs trials >= 1".into()));
    }
    if algorithms.is_empty() {
        return Err(Error::Config("experiment needs at least one algorithm".into()));
    }
    let model = aqnm_params(cfg.bits)?;
    let full_bank = build_dft_combiner(cfg.antennas);

    let per_trial: Vec<Vec<Option<f64>>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| run_trial(cfg, algorithms, &full_bank, model.alpha, trial))
        .collect::<Result<_>>()?;

    Ok(algorithms
        .iter()
        .enumerate()
        .map(|(i, &algorithm)| {
            let outcomes: Vec<Option<f64>> = per_trial.iter().map(|t| t[i]).collect();
            let (mean_sum_rate, std_err, valid) = aggregate(&outcomes);
            AlgorithmStats {
                algorithm,
                mean_sum_rate,
                std_err,
                trials: valid,
                invalid_trials: trials - valid,
            }
        })
        .collect())
}

fn run_trial(
    cfg: &SystemConfig,
    algorithms: &[Algorithm],
    full_bank: &CombinerBank,
    alpha: f64,
    trial: u64,
) -> Result<Vec<Option<f64>>> {
    let users = draw_users(cfg, trial)?;
    let bank = select_combiner(full_bank, &users, cfg.rf_chains, cfg.beam_selection())?;
    let h_b = beamspace_project(&bank, &users).h_b;
    let path_counts: Vec<usize> = users.iter().map(|u| u.aoa_spatial.len()).collect();
    let aoas: Vec<Vec<f64>> = users.iter().map(|u| u.aoa_spatial.clone()).collect();
    let rho = cfg.snr();
    let pool_hash = matrix_hash(&h_b);

    let rates = algorithms
        .iter()
        .map(|&alg| {
            let scheduled = match alg {
                Algorithm::Css => schedule_css(&h_b, &path_counts, cfg).scheduled,
                Algorithm::Greedy => schedule_greedy(&h_b, cfg).scheduled,
                Algorithm::Chordal => {
                    let mut rng = derive_rng(cfg.seed, &[purpose::CHORDAL_INIT, trial]);
                    match schedule_chordal(&aoas, &bank, cfg, &mut rng) {
                        Ok(res) => res.scheduled,
                        Err(_) => return None,
                    }
                }
                Algorithm::Sus => schedule_sus(&h_b, cfg).scheduled,
                Algorithm::Mbas => schedule_mbas(&h_b, &path_counts, cfg).scheduled,
                Algorithm::Random => {
                    let mut rng = derive_rng(cfg.seed, &[purpose::RANDOM_SCHED, trial]);
                    schedule_random(cfg.candidates, cfg.scheduled, &mut rng).scheduled
                }
            };
            if scheduled.is_empty() {
                return Some(0.0); // scheduling nobody carries zero rate
            }
            sum_rate(&gather_columns(&h_b, &scheduled), rho, alpha).ok().map(|b| b.sum)
        })
        .collect();

    // paired design: the pool every algorithm consumed must be untouched
    debug_assert_eq!(pool_hash, matrix_hash(&h_b), "channel pool mutated mid-trial");
    Ok(rates)
}

fn aggregate(outcomes: &[Option<f64>]) -> (f64, f64, usize) {
    let values: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, 0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std_err = if n < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    (mean, std_err, n)
}

/// FNV-1a over the exact bit patterns of the matrix entries.
fn matrix_hash(h: &DMatrix<Complex64>) -> u64 {
    let mut s: u64 = 0xcbf2_9ce4_8422_2325;
    for v in h.iter() {
        for bits in [v.re.to_bits(), v.im.to_bits()] {
            s ^= bits;
            s = s.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk_cfg() -> SystemConfig {
        SystemConfig {
            antennas: 32,
            rf_chains: 16,
            candidates: 50,
            scheduled: 4,
            snr_db: 6.0,
            bits: AdcBits::Finite(3),
            ..SystemConfig::default()
        }
    }

    #[test]
    fn single_trial_reports_are_bit_identical() {
        let cfg = desk_cfg();
        let algs = [Algorithm::Css, Algorithm::Random];
        let a = run_experiment(&cfg, &algs, 1).unwrap();
        let b = run_experiment(&cfg, &algs, 1).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.points[0].stats[0].trials, 1);
        assert_eq!(a.points[0].stats[0].std_err, 0.0);
    }

    #[test]
    fn greedy_beats_random_within_paired_error() {
        let cfg = desk_cfg();
        let report = run_experiment(&cfg, &[Algorithm::Random, Algorithm::Greedy], 500).unwrap();
        let [random, greedy] = &report.points[0].stats[..] else {
            panic!("two algorithms expected")
        };
        assert_eq!(random.algorithm, Algorithm::Random);
        let combined = (random.std_err.powi(2) + greedy.std_err.powi(2)).sqrt();
        assert!(
            greedy.mean_sum_rate >= random.mean_sum_rate - 2.0 * combined,
            "greedy {} vs random {} (combined se {})",
            greedy.mean_sum_rate,
            random.mean_sum_rate,
            combined
        );
        // at this operating point greedy should in fact lead comfortably
        assert!(greedy.mean_sum_rate > random.mean_sum_rate);
    }

    #[test]
    fn twelve_bit_quantization_is_practically_ideal() {
        let mut fine = desk_cfg();
        fine.bits = AdcBits::Finite(12);
        let mut ideal = desk_cfg();
        ideal.bits = AdcBits::Infinite;
        let algs = [Algorithm::Css];
        let a = run_experiment(&fine, &algs, 200).unwrap().points[0].stats[0].mean_sum_rate;
        let b = run_experiment(&ideal, &algs, 200).unwrap().points[0].stats[0].mean_sum_rate;
        assert!((a - b).abs() / b < 5e-3, "12-bit {a} vs ideal {b}");
    }

    #[test]
    fn snr_sweep_curves_are_monotone_within_noise() {
        let cfg = desk_cfg();
        let report = sweep(
            &cfg,
            SweepAxis::SnrDb,
            &[-10.0, 0.0, 10.0, 20.0],
            &[Algorithm::Css, Algorithm::Greedy, Algorithm::Random],
            120,
        )
        .unwrap();
        assert_eq!(report.axis, "snr_db");
        for a in 0..3 {
            for w in report.points.windows(2) {
                let (lo, hi) = (&w[0].stats[a], &w[1].stats[a]);
                let slack = 2.0 * (lo.std_err.powi(2) + hi.std_err.powi(2)).sqrt();
                assert!(
                    hi.mean_sum_rate >= lo.mean_sum_rate - slack,
                    "{} decreased from {} to {}",
                    lo.algorithm,
                    lo.mean_sum_rate,
                    hi.mean_sum_rate
                );
            }
        }
    }

    #[test]
    fn bits_sweep_closes_the_css_sus_gap() {
        let cfg = desk_cfg();
        let report = sweep(
            &cfg,
            SweepAxis::Bits,
            &(1..=10).map(f64::from).collect::<Vec<_>>(),
            &[Algorithm::Css, Algorithm::Sus],
            150,
        )
        .unwrap();
        let gap = |p: &AxisPoint| (p.stats[0].mean_sum_rate - p.stats[1].mean_sum_rate).abs();
        let first = gap(&report.points[0]);
        let last = gap(report.points.last().unwrap());
        assert!(last < first, "gap grew from {first} to {last}");
    }

    #[test]
    fn rf_chain_sweep_reaches_the_square_combiner() {
        let cfg = desk_cfg();
        let report = sweep(
            &cfg,
            SweepAxis::RfChains,
            &[8.0, 16.0, 32.0],
            &[Algorithm::Css],
            40,
        )
        .unwrap();
        assert_eq!(report.points.len(), 3);
        for p in &report.points {
            assert!(p.stats[0].trials > 0);
        }
    }

    #[test]
    fn sweep_rejects_fractional_integer_axes() {
        let cfg = desk_cfg();
        assert!(sweep(&cfg, SweepAxis::Bits, &[2.5], &[Algorithm::Css], 5).is_err());
        assert!(sweep(&cfg, SweepAxis::RfChains, &[0.0], &[Algorithm::Css], 5).is_err());
    }

    #[test]
    fn scheduler_param_sweep_runs_the_owning_algorithm() {
        let cfg = desk_cfg();
        let report = sweep_scheduler_param(
            &cfg,
            SchedulerParam::ChordalDTh,
            &[0.5, 0.8],
            &[SchedulerParam::ChordalDTh.algorithm()],
            30,
        )
        .unwrap();
        assert_eq!(report.axis, "chordal_d_th");
        assert_eq!(report.points.len(), 2);
        assert!(report.points.iter().all(|p| p.stats[0].trials > 0));
    }

    #[test]
    fn validation_rows_cover_both_scenarios() {
        let mut cfg = desk_cfg();
        cfg.antennas = 32;
        cfg.candidates = 30;
        cfg.scheduled = 3;
        cfg.snr_db = 0.0;
        let table =
            validate_closed_forms(&cfg, &[AdcBits::Finite(3), AdcBits::Infinite], 300).unwrap();
        assert_eq!(table.rows.len(), 4);
        assert_eq!(table.config.rf_chains, table.config.antennas);
        for row in &table.rows {
            assert!(row.trials > 0, "{row:?}");
            assert!(row.closed_form > 0.0);
            assert!(row.mc_mean.is_finite());
        }
        // ideal-ADC rows: scenarios agree with each other within noise
        let ideal: Vec<&ValidationRow> =
            table.rows.iter().filter(|r| r.bits == AdcBits::Infinite).collect();
        let se = (ideal[0].mc_std_err.powi(2) + ideal[1].mc_std_err.powi(2)).sqrt();
        assert!(
            (ideal[0].mc_mean - ideal[1].mc_mean).abs() <= 2.0 * se + 0.02 * ideal[0].mc_mean,
            "aligned {} vs arbitrary {} (se {se})",
            ideal[0].mc_mean,
            ideal[1].mc_mean
        );
    }
}
