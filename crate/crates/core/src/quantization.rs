//! Additive quantization noise model (AQNM) for low-resolution ADCs, plus
//! a true nonlinear per-branch quantizer used to validate the linear model.

use crate::config::AdcBits;
use crate::error::{Error, Result};
use crate::numerics::{lloyd_max_beta, lloyd_max_codebook};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::SQRT_2;

/// Linearized ADC model: the quantizer output is α·y + q with q zero-mean
/// and covariance given by `quant_noise_cov`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantizerModel {
    pub bits: AdcBits,
    /// Normalized MSE distortion β ∈ [0, 1).
    pub beta: f64,
    /// Signal retention factor α = 1 − β ∈ (0, 1].
    pub alpha: f64,
}

/// AQNM parameters for the given ADC resolution.
pub fn aqnm_params(bits: AdcBits) -> Result<QuantizerModel> {
    let beta = lloyd_max_beta(bits.bits())?;
    Ok(QuantizerModel {
        bits,
        beta,
        alpha: 1.0 - beta,
    })
}

/// Diagonal of the quantization-noise covariance
/// R_qq = α(1−α)·diag(ρ·H_b·H_bᴴ + I_N) for the scheduled beamspace
/// matrix (N×S). Entry i is α(1−α)·(ρ‖row i‖² + 1).
pub fn quant_noise_cov(h_b_sched: &DMatrix<Complex64>, rho: f64, alpha: f64) -> Vec<f64> {
    debug_assert!(rho > 0.0 && alpha > 0.0 && alpha <= 1.0);
    let c = alpha * (1.0 - alpha);
    (0..h_b_sched.nrows())
        .map(|i| c * (rho * h_b_sched.row(i).norm_squared() + 1.0))
        .collect()
}

/// Model standard deviation per receive branch: σ_i = √(ρ‖row i‖² + 1).
pub fn branch_scales(h_b_sched: &DMatrix<Complex64>, rho: f64) -> Vec<f64> {
    (0..h_b_sched.nrows())
        .map(|i| (rho * h_b_sched.row(i).norm_squared() + 1.0).sqrt())
        .collect()
}

/// Element-wise Lloyd-Max quantization of real and imaginary parts, each
/// scaled to its per-dimension standard deviation σ_i/√2 (ideal AGC).
/// `scales` holds the per-branch complex standard deviations σ_i.
pub fn simulate_quantize(
    y: &DVector<Complex64>,
    bits: u32,
    scales: &[f64],
) -> Result<DVector<Complex64>> {
    if scales.len() != y.len() {
        return Err(Error::Domain(format!(
            "{} scales for {} branches",
            scales.len(),
            y.len()
        )));
    }
    if let Some(bad) = y.iter().find(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite input sample {bad}")));
    }
    if let Some(&bad) = scales.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
        return Err(Error::Domain(format!("branch scale must be positive, got {bad}")));
    }
    let cb = lloyd_max_codebook(bits)?;
    let mut out = DVector::zeros(y.len());
    for i in 0..y.len() {
        let s = scales[i] / SQRT_2; // per real dimension
        out[i] = Complex64::new(
            s * cb.quantize(y[i].re / s),
            s * cb.quantize(y[i].im / s),
        );
    }
    Ok(out)
}
