//! Closed-form ergodic sum rates for single-path users under N = M
//! beamspace combining: the exact expression for grid-aligned arrivals and
//! an approximate lower bound for arbitrary arrivals with beam leakage.
//! Both split into an ideal-ADC component plus a quantization-induced term.

use crate::error::{Error, Result};
use crate::numerics::{exp_scaled_gamma0, fejer_moments, FejerMoments};
use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::sync::{Mutex, OnceLock};

/// Ideal-ADC / quantization split of an ergodic rate value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateComponents {
    /// Rate with infinite-resolution ADCs (α = 1), bits/s/Hz.
    pub r_inf: f64,
    /// Signed rate change due to quantization (≤ 0 in practice).
    pub r_loss: f64,
}

/// A closed-form ergodic sum rate together with the inputs it was
/// evaluated at. When `components` is present, total = r_inf + r_loss.
#[derive(Clone, Copy, Debug)]
pub struct ErgodicRateResult {
    /// Ergodic sum rate, bits/s/Hz.
    pub total: f64,
    pub components: Option<RateComponents>,
    /// Scheduled user count S the value scales with.
    pub scheduled: usize,
    /// Antenna count M (equal to the RF-chain count in this analysis).
    pub antennas: usize,
    /// Linear SNR.
    pub rho: f64,
    /// Quantization gain α = 1 − β.
    pub alpha: f64,
}

/// e^x·Γ(0,x), the building block of both closed forms.
fn exp_gamma(x: f64) -> Result<f64> {
    exp_scaled_gamma0(x)
}

fn check_inputs(s: usize, m: usize, rho: f64, alpha: f64) -> Result<()> {
    if s == 0 {
        return Err(Error::Domain("scheduled user count must be >= 1".into()));
    }
    if m == 0 {
        return Err(Error::Domain("antenna count must be >= 1".into()));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!("snr must be positive and finite, got {rho}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    Ok(())
}

/// Ergodic sum rate when every user has one path exactly on a combiner
/// grid angle: S/ln2 · [e^{1/(ρM)}Γ(0,1/(ρM)) − e^{1/(ρ(1−α)M)}Γ(0,1/(ρ(1−α)M))].
/// Exact (not a bound); linear in S. α = 1 zeroes the loss term.
pub fn ergodic_rate_aligned(s: usize, m: usize, rho: f64, alpha: f64) -> Result<ErgodicRateResult> {
    check_inputs(s, m, rho, alpha)?;
    let scale = s as f64 / LN_2;
    let mf = m as f64;
    let r_inf = scale * exp_gamma(1.0 / (rho * mf))?;
    let r_loss = if alpha >= 1.0 {
        0.0
    } else {
        -scale * exp_gamma(1.0 / (rho * (1.0 - alpha) * mf))?
    };
    Ok(ErgodicRateResult {
        total: r_inf + r_loss,
        components: Some(RateComponents { r_inf, r_loss }),
        scheduled: s,
        antennas: m,
        rho,
        alpha,
    })
}

/// Approximate ergodic sum-rate lower bound when single-path arrivals fall
/// anywhere off the combiner grid, so energy leaks across beams. Uses the
/// beam-pattern moments 𝓕₁ = ∫₀¹F⁴ dδ and 𝓕₂ = (∫₀¹F² dδ)²:
///
///   S/ln2 · [e^{x_a}Γ(0,x_a) − e^{x_b}Γ(0,x_b)],
///   x_a = (1 + ρ(1−α)(S−1)M²𝓕₂) / (ραM + ρ(1−α)M²𝓕₁),
///   x_b = (1 + ρ(1−α)(S−1)M²𝓕₂) / (ρ(1−α)M²𝓕₁).
///
/// At α = 1 the bound collapses to the ideal-ADC rate, which is returned
/// directly. The `r_loss` component is the difference from that limit.
pub fn ergodic_rate_leakage_lb(
    s: usize,
    m: usize,
    rho: f64,
    alpha: f64,
) -> Result<ErgodicRateResult> {
    check_inputs(s, m, rho, alpha)?;
    let scale = s as f64 / LN_2;
    let mf = m as f64;
    let r_inf = scale * exp_gamma(1.0 / (rho * mf))?;
    let total = if alpha >= 1.0 {
        r_inf
    } else {
        let FejerMoments { f1, f2, .. } = cached_moments(m)?;
        let m2 = mf * mf;
        let num = 1.0 + rho * (1.0 - alpha) * (s - 1) as f64 * m2 * f2;
        let x_a = num / (rho * alpha * mf + rho * (1.0 - alpha) * m2 * f1);
        let x_b = num / (rho * (1.0 - alpha) * m2 * f1);
        scale * (exp_gamma(x_a)? - exp_gamma(x_b)?)
    };
    Ok(ErgodicRateResult {
        total,
        components: Some(RateComponents { r_inf, r_loss: total - r_inf }),
        scheduled: s,
        antennas: m,
        rho,
        alpha,
    })
}

/// Beam-pattern moments per antenna count, computed once and reused.
/// Concurrent first use may fill the entry twice with identical values.
fn cached_moments(m: usize) -> Result<FejerMoments> {
    static CACHE: OnceLock<Mutex<HashMap<usize, FejerMoments>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&m) {
        return Ok(*v);
    }
    let v = fejer_moments(m, (10 * m).max(2048))?;
    cache.lock().unwrap().insert(m, v);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{fejer_kernel, lloyd_max_beta};
    use crate::rng::derive_rng;
    use rand::Rng;
    use rand_distr::{Distribution, Exp};

    // Independently tabulated E₁(x) = Γ(0,x) reference values.
    const E1_01: f64 = 1.82292395841939059;
    const E1_2: f64 = 4.89005107080611248e-02;

    #[test]
    fn ideal_adc_matches_tabulated_gamma() {
        // S=5, ρM = 10 ⇒ argument 0.1 hits the frozen table entry.
        let r = ergodic_rate_aligned(5, 8, 1.25, 1.0).unwrap();
        let expected = 5.0 / LN_2 * 0.1_f64.exp() * E1_01;
        assert!((r.total - expected).abs() < 1e-12 * expected);
        let c = r.components.unwrap();
        assert_eq!(c.r_loss, 0.0);
        assert_eq!(c.r_inf, r.total);
    }

    #[test]
    fn aligned_rate_matches_tabulated_two_term_form() {
        // ρM = 10 and ρ(1−α)M = 0.5 pin both arguments to table entries.
        let r = ergodic_rate_aligned(3, 10, 1.0, 0.95).unwrap();
        let expected = 3.0 / LN_2 * (0.1_f64.exp() * E1_01 - 2.0_f64.exp() * E1_2);
        assert!((r.total - expected).abs() < 1e-12 * expected.abs());
        let c = r.components.unwrap();
        assert!(c.r_loss < 0.0);
        assert!(r.total < c.r_inf);
    }

    #[test]
    fn aligned_rate_is_linear_in_user_count() {
        let one = ergodic_rate_aligned(3, 32, 2.5, 0.9).unwrap().total;
        let two = ergodic_rate_aligned(6, 32, 2.5, 0.9).unwrap().total;
        assert!((two - 2.0 * one).abs() < 1e-13 * two);
    }

    #[test]
    fn leakage_bound_converges_to_ideal_as_bits_grow() {
        let (s, m, rho) = (12, 128, 1.0);
        let ideal = ergodic_rate_leakage_lb(s, m, rho, 1.0).unwrap();
        assert_eq!(ideal.total, ideal.components.unwrap().r_inf);
        let mut prev_gap = f64::INFINITY;
        for b in 1..=10 {
            let alpha = 1.0 - lloyd_max_beta(Some(b)).unwrap();
            let r = ergodic_rate_leakage_lb(s, m, rho, alpha).unwrap();
            let gap = (r.total - ideal.total).abs();
            assert!(gap < prev_gap, "gap did not shrink at {b} bits");
            prev_gap = gap;
        }
        assert!(prev_gap < 0.05 * ideal.total);
    }

    #[test]
    fn single_user_bound_drops_interference_term() {
        let (m, rho, alpha) = (64usize, 2.0, 0.9);
        let got = ergodic_rate_leakage_lb(1, m, rho, alpha).unwrap().total;
        // hand-simplified S=1 form: the (S−1) interference factor vanishes
        let FejerMoments { f1, .. } = fejer_moments(m, 10 * m).unwrap();
        let m2 = (m * m) as f64;
        let x_a = 1.0 / (rho * alpha * m as f64 + rho * (1.0 - alpha) * m2 * f1);
        let x_b = 1.0 / (rho * (1.0 - alpha) * m2 * f1);
        let expected = (exp_scaled_gamma0(x_a).unwrap() - exp_scaled_gamma0(x_b).unwrap()) / LN_2;
        assert!((got - expected).abs() <= 1e-14 * expected.abs());
    }

    #[test]
    fn decomposition_identity_holds() {
        let mut rng = derive_rng(81, &[0]);
        for _ in 0..100 {
            let s = rng.random_range(1..20usize);
            let m = [8usize, 16, 32, 64][rng.random_range(0..4)];
            let rho = 10f64.powf(rng.random_range(-1.0..1.5));
            let alpha = rng.random_range(0.5..1.0);
            for r in [
                ergodic_rate_aligned(s, m, rho, alpha).unwrap(),
                ergodic_rate_leakage_lb(s, m, rho, alpha).unwrap(),
            ] {
                let c = r.components.unwrap();
                assert!((r.total - (c.r_inf + c.r_loss)).abs() <= 1e-12 * r.total.abs().max(1.0));
            }
        }
    }

    #[test]
    fn closed_forms_increase_with_snr_and_alpha() {
        let evaluate = |rho: f64, alpha: f64| {
            (
                ergodic_rate_aligned(4, 32, rho, alpha).unwrap().total,
                ergodic_rate_leakage_lb(4, 32, rho, alpha).unwrap().total,
            )
        };
        let mut prev = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for rho in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let cur = evaluate(rho, 0.9);
            assert!(cur.0 > prev.0 && cur.1 > prev.1, "not increasing in snr at {rho}");
            prev = cur;
        }
        prev = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for alpha in [0.6, 0.7, 0.8, 0.9, 0.96, 0.999] {
            let cur = evaluate(2.0, alpha);
            assert!(cur.0 > prev.0 && cur.1 > prev.1, "not increasing in alpha at {alpha}");
            prev = cur;
        }
    }

    #[test]
    fn gain_average_reproduces_aligned_per_user_rate() {
        // Per-user Monte Carlo over the channel gain: with a single aligned
        // path, ‖h_b‖²/M is a unit-rate exponential, and the instantaneous
        // rate is log₂(1 + αρ/((1−α)ρ + 1/(M·|g|²))).
        let (m, rho) = (64usize, 1.0);
        let alpha = 1.0 - lloyd_max_beta(Some(3)).unwrap();
        let closed = ergodic_rate_aligned(1, m, rho, alpha).unwrap().total;
        let exp = Exp::new(1.0).unwrap();
        let mut rng = derive_rng(81, &[1]);
        let draws = 1_000_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let g2: f64 = exp.sample(&mut rng);
            let denom = (1.0 - alpha) * rho + 1.0 / (m as f64 * g2);
            acc += (1.0 + alpha * rho / denom).log2();
        }
        let mc = acc / draws as f64;
        assert!(
            (mc - closed).abs() < 5e-3 * closed,
            "monte carlo {mc} vs closed form {closed}"
        );
    }

    #[test]
    fn beam_pattern_moment_sampling_matches_quadrature() {
        let m = 8usize;
        let q = fejer_moments(m, 10 * m).unwrap();
        let mut rng = derive_rng(81, &[2]);
        let draws = 2_000_000;
        let (mut sum2, mut sum4) = (0.0, 0.0);
        for _ in 0..draws {
            let f = fejer_kernel(rng.random_range(0.0..1.0), m);
            sum2 += f * f;
            sum4 += f * f * f * f;
        }
        let (m2, m4) = (sum2 / draws as f64, sum4 / draws as f64);
        assert!((m2 - q.m1).abs() < 0.01 * q.m1, "E[F²] {m2} vs {}", q.m1);
        assert!((m4 - q.f1).abs() < 0.01 * q.f1, "E[F⁴] {m4} vs {}", q.f1);
        assert!((m2 * m2 - q.f2).abs() < 0.02 * q.f2, "E[F²]² {} vs {}", m2 * m2, q.f2);
    }
}
