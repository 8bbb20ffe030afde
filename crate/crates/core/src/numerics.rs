//! Special functions and quantizer-design numerics: the exponential
//! integral Γ(0,z), the normalized array-response kernel F(δ, M) and its
//! moments, and Lloyd-Max scalar quantizer design for Gaussian inputs.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};
use std::sync::{Arc, Mutex, OnceLock};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Γ(0,z) = ∫_z^∞ e⁻ᵗ/t dt (equals E₁(z)) for z > 0.
///
/// Series for z < 1, continued fraction for z ≥ 1; relative error is
/// below 1e-10 across [1e-8, 700]. When e⁻ᶻ underflows the result is 0.
pub fn exp_integral_gamma0(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("gamma0 requires z > 0, got {z}")));
    }
    if z < 1.0 {
        Ok(gamma0_series(z))
    } else {
        // e^{-z} * [e^z Γ(0,z)]; underflows cleanly to 0 for huge z
        Ok((-z).exp() * scaled_cf(z))
    }
}

/// e^z·Γ(0,z), computed without ever forming e^z·e⁻ᶻ, so it stays finite
/// for arguments far beyond the overflow range of exp (needed when the
/// quantization distortion β is tiny and 1/(ρβM) is huge).
pub fn exp_scaled_gamma0(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("gamma0 requires z > 0, got {z}")));
    }
    if z < 1.0 {
        Ok(z.exp() * gamma0_series(z))
    } else {
        Ok(scaled_cf(z))
    }
}

/// Power series Γ(0,z) = −γ − ln z + Σ_{k≥1} (−1)^{k+1} z^k/(k·k!), z < 1.
fn gamma0_series(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0; // z^k / k!
    for k in 1..=60 {
        term *= z / k as f64;
        let contrib = if k % 2 == 1 { term } else { -term } / k as f64;
        sum += contrib;
        if contrib.abs() < 1e-17 * (1.0 + sum.abs()) {
            break;
        }
    }
    -EULER_GAMMA - z.ln() + sum
}

/// Modified Lentz evaluation of e^z·Γ(0,z) = 1/(z+1− 1²/(z+3− 2²/(z+5−…))).
fn scaled_cf(z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0;
    let mut f = if b.abs() < TINY { TINY } else { b };
    let mut c = f;
    let mut d = 0.0;
    for k in 1..=500u64 {
        let a = -((k * k) as f64);
        b += 2.0;
        d = b + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-15 {
            break;
        }
    }
    1.0 / f
}

/// Magnitude of the inner product of two unit-norm ULA steering vectors
/// whose spatial angles differ by `delta`:
/// F(δ,M) = |sin(Mπδ/2)| / (M·|sin(πδ/2)|), with F = 1 at the removable
/// singularities δ ∈ {0, ±2, …}. Even in δ, period 2, range [0, 1].
pub fn fejer_kernel(delta: f64, m: usize) -> f64 {
    let mf = m as f64;
    // Reduce to [-1, 1] first: makes the period exact in floating point
    // and keeps both sin arguments well away from huge-argument loss.
    let d = delta - 2.0 * (delta / 2.0).round();
    if d == 0.0 {
        return 1.0;
    }
    let half = PI * d / 2.0;
    let den = mf * half.sin().abs();
    if den < 1e-9 {
        // |δ| ≲ 1e-9/M: F = 1 - O((Mδ)²) ≈ 1 to well below 1e-12
        return 1.0;
    }
    ((mf * half).sin().abs() / den).min(1.0)
}

/// Moments of F(δ,M) over the half-period δ ∈ [0,1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FejerMoments {
    /// ∫₀¹ F²(δ,M) dδ
    pub m1: f64,
    /// ∫₀¹ F⁴(δ,M) dδ
    pub f1: f64,
    /// (∫₀¹ F²(δ,M) dδ)² = m1²
    pub f2: f64,
}

/// Computes the kernel moments by composite Simpson quadrature, doubling
/// the grid until both integrals move by ≤ 1e-8. `grid_points` must
/// resolve the main lobe: at least 10·M points.
pub fn fejer_moments(m: usize, grid_points: usize) -> Result<FejerMoments> {
    if m == 0 {
        return Err(Error::Domain("antenna count must be >= 1".into()));
    }
    if grid_points < 10 * m {
        return Err(Error::Resolution(format!(
            "{grid_points} grid points cannot resolve the 2/{m} main lobe; need >= {}",
            10 * m
        )));
    }
    // F² and F⁴ are smooth (the squares remove the |sin| kinks), so
    // Simpson converges at O(h⁴) and the doubling test is reliable.
    let simpson = |n: usize, pow4: bool| -> f64 {
        let h = 1.0 / n as f64;
        let f = |x: f64| {
            let v = fejer_kernel(x, m);
            let v2 = v * v;
            if pow4 {
                v2 * v2
            } else {
                v2
            }
        };
        let mut acc = f(0.0) + f(1.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / 3.0
    };

    let mut n = grid_points.next_multiple_of(2);
    let (mut m1, mut f1) = (simpson(n, false), simpson(n, true));
    for _ in 0..24 {
        n *= 2;
        let (m1n, f1n) = (simpson(n, false), simpson(n, true));
        let done = (m1n - m1).abs() <= 1e-8 && (f1n - f1).abs() <= 1e-8;
        m1 = m1n;
        f1 = f1n;
        if done {
            return Ok(FejerMoments { m1, f1, f2: m1 * m1 });
        }
    }
    Err(Error::Resolution(format!(
        "kernel moments did not converge to 1e-8 for M={m}"
    )))
}

/// A Lloyd-Max scalar quantizer for the standard (unit-variance) Gaussian.
#[derive(Clone, Debug)]
pub struct LloydCodebook {
    /// Reconstruction levels, ascending.
    pub levels: Vec<f64>,
    /// Decision thresholds between adjacent levels (length levels-1).
    pub thresholds: Vec<f64>,
    /// Normalized mean-squared distortion E[(x − Q(x))²] for x ~ N(0,1).
    pub beta: f64,
}

impl LloydCodebook {
    /// Nearest-level quantization of a standard-normal-scaled sample.
    pub fn quantize(&self, x: f64) -> f64 {
        let idx = self.thresholds.partition_point(|&t| t < x);
        self.levels[idx]
    }
}

fn gauss_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

fn gauss_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / SQRT_2)
}

/// x·φ(x) with the tail convention (±∞)·φ(±∞) = 0.
fn x_pdf(x: f64) -> f64 {
    if x.is_finite() {
        x * gauss_pdf(x)
    } else {
        0.0
    }
}

/// Designs the MMSE scalar quantizer with 2^b levels for a unit-variance
/// Gaussian by Lloyd iteration (centroid / nearest-neighbor fixed point).
pub fn lloyd_max_codebook(bits: u32) -> Result<Arc<LloydCodebook>> {
    if bits == 0 {
        return Err(Error::Domain("quantizer resolution must be >= 1 bit".into()));
    }
    if bits > 16 {
        return Err(Error::Domain(format!(
            "codebook with 2^{bits} levels is not supported (b <= 16)"
        )));
    }

    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<LloydCodebook>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(cb) = cache.lock().unwrap().get(&bits) {
        return Ok(cb.clone());
    }

    let n = 1usize << bits;
    let mut levels: Vec<f64> = (0..n)
        .map(|i| -4.0 + 8.0 * (i as f64 + 0.5) / n as f64)
        .collect();

    let cell_bounds = |levels: &[f64], i: usize| -> (f64, f64) {
        let lo = if i == 0 {
            f64::NEG_INFINITY
        } else {
            0.5 * (levels[i - 1] + levels[i])
        };
        let hi = if i == n - 1 {
            f64::INFINITY
        } else {
            0.5 * (levels[i] + levels[i + 1])
        };
        (lo, hi)
    };

    for _ in 0..50_000 {
        let mut max_move = 0.0f64;
        let snapshot = levels.clone();
        for i in 0..n {
            let (lo, hi) = cell_bounds(&snapshot, i);
            let p = gauss_cdf(hi) - gauss_cdf(lo);
            if p > 0.0 {
                // conditional mean of the cell: (φ(lo) − φ(hi)) / p
                let c = (gauss_pdf(lo) - gauss_pdf(hi)) / p;
                max_move = max_move.max((c - levels[i]).abs());
                levels[i] = c;
            }
        }
        if max_move < 1e-12 {
            break;
        }
    }

    // Exact per-cell distortion: ∫(x−c)²φ = (p + lo·φ(lo) − hi·φ(hi))
    //                                        − 2c(φ(lo) − φ(hi)) + c²p
    let mut beta = 0.0;
    for i in 0..n {
        let (lo, hi) = cell_bounds(&levels, i);
        let p = gauss_cdf(hi) - gauss_cdf(lo);
        let m1 = gauss_pdf(lo) - gauss_pdf(hi);
        let s2 = p + x_pdf(lo) - x_pdf(hi);
        let c = levels[i];
        beta += s2 - 2.0 * c * m1 + c * c * p;
    }

    let thresholds: Vec<f64> = (1..n).map(|i| 0.5 * (levels[i - 1] + levels[i])).collect();
    let cb = Arc::new(LloydCodebook {
        levels,
        thresholds,
        beta,
    });
    cache.lock().unwrap().insert(bits, cb.clone());
    Ok(cb)
}

/// Normalized MMSE distortion β of a b-bit scalar quantizer for a
/// unit-variance Gaussian. `None` means infinite resolution (β = 0).
/// Lloyd iteration for b ≤ 5; the high-rate closed form
/// β = (π√3/2)·2⁻²ᵇ for b > 5.
pub fn lloyd_max_beta(bits: Option<u32>) -> Result<f64> {
    match bits {
        None => Ok(0.0),
        Some(0) => Err(Error::Domain("quantizer resolution must be >= 1 bit".into())),
        Some(b) if b <= 5 => Ok(lloyd_max_codebook(b)?.beta),
        Some(b) => Ok(PI * 3f64.sqrt() / 2.0 * (-2.0 * b as f64).exp2()),
    }
}
