//! Zero-forcing combining and the per-user / sum rate expressions under
//! the additive quantization noise model.

use crate::error::{Error, Result};
use crate::quantization::quant_noise_cov;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Condition-number ceiling above which a scheduled set is treated as
/// numerically singular (scheduling explores near-collinear candidates).
pub const COND_LIMIT: f64 = 1e10;

/// Per-user rates, their sum, and the per-user linear SINRs for one
/// scheduled set. User ids are the column indices of the scheduled matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RateBreakdown {
    pub per_user: Vec<(usize, f64)>,
    pub sum: f64,
    pub sinr: Vec<f64>,
}

/// Zero-forcing combiner W = H_b(H_bᴴH_b)⁻¹ via thin QR (no explicit
/// inverse): W = Q·R⁻ᴴ, so WᴴH_b = I_S.
///
/// A condition number above `COND_LIMIT` (from the singular values of R)
/// is reported as a singularity error naming the most collinear column
/// pair.
pub fn zf_combiner(h_b_sched: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let (n, s) = h_b_sched.shape();
    if s == 0 || s > n {
        return Err(Error::Domain(format!(
            "need 1 <= S <= N columns to zero-force, got {s} of dimension {n}"
        )));
    }
    let qr = h_b_sched.clone().qr();
    let r = qr.r();
    let sv = r.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(cond <= COND_LIMIT) {
        let (col_a, col_b) = most_collinear_pair(h_b_sched);
        return Err(Error::Singular { col_a, col_b, cond });
    }
    let rhs = DMatrix::<Complex64>::identity(s, s);
    let x = r
        .adjoint()
        .solve_lower_triangular(&rhs)
        .ok_or_else(|| Error::Numerical("triangular solve failed after conditioning check".into()))?;
    Ok(qr.q() * x)
}

/// The column pair with the largest normalized inner product (degenerate
/// zero-norm columns rank as fully collinear).
fn most_collinear_pair(h: &DMatrix<Complex64>) -> (usize, usize) {
    let s = h.ncols();
    if s < 2 {
        return (0, 0);
    }
    let (mut best, mut pair) = (-1.0f64, (0usize, 1usize));
    for i in 0..s {
        for j in (i + 1)..s {
            let ni = h.column(i).norm();
            let nj = h.column(j).norm();
            let corr = if ni <= f64::MIN_POSITIVE || nj <= f64::MIN_POSITIVE {
                1.0
            } else {
                h.column(i).dotc(&h.column(j)).norm() / (ni * nj)
            };
            if corr > best {
                best = corr;
                pair = (i, j);
            }
        }
    }
    pair
}

fn rate_from_sinr(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

fn user_sinr(
    w: &DMatrix<Complex64>,
    rqq: &[f64],
    k: usize,
    rho: f64,
    alpha: f64,
) -> f64 {
    let wk = w.column(k);
    let quant: f64 = wk.iter().zip(rqq).map(|(v, r)| r * v.norm_sqr()).sum();
    let a2 = alpha * alpha;
    a2 * rho / (quant + a2 * wk.norm_squared())
}

/// Achievable rate of scheduled user `k` (column index) under ZF
/// combining: log₂(1 + α²ρ / (w_kᴴR_qq w_k + α²‖w_k‖²)).
pub fn user_rate(h_b_sched: &DMatrix<Complex64>, k: usize, rho: f64, alpha: f64) -> Result<f64> {
    let w = zf_combiner(h_b_sched)?;
    let rqq = quant_noise_cov(h_b_sched, rho, alpha);
    Ok(rate_from_sinr(user_sinr(&w, &rqq, k, rho, alpha)))
}

/// Rates of every user in the scheduled set, computed from one shared
/// combiner factorization.
pub fn sum_rate(h_b_sched: &DMatrix<Complex64>, rho: f64, alpha: f64) -> Result<RateBreakdown> {
    let w = zf_combiner(h_b_sched)?;
    let rqq = quant_noise_cov(h_b_sched, rho, alpha);
    let mut per_user = Vec::with_capacity(h_b_sched.ncols());
    let mut sinr = Vec::with_capacity(h_b_sched.ncols());
    let mut sum = 0.0;
    for k in 0..h_b_sched.ncols() {
        let s = user_sinr(&w, &rqq, k, rho, alpha);
        let r = rate_from_sinr(s);
        per_user.push((k, r));
        sinr.push(s);
        sum += r;
    }
    Ok(RateBreakdown { per_user, sum, sinr })
}

/// Rate of a lone scheduled user:
/// log₂(1 + αρ‖h_b‖⁴ / (ρ(1−α)Σᵢ|h_{b,i}|⁴ + ‖h_b‖²)).
pub fn single_user_rate(h_b: &DVector<Complex64>, rho: f64, alpha: f64) -> Result<f64> {
    let gamma = h_b.norm_squared();
    if gamma <= 0.0 {
        return Err(Error::Domain("single-user rate of a zero channel".into()));
    }
    let quartic: f64 = h_b.iter().map(|v| v.norm_sqr() * v.norm_sqr()).sum();
    let sinr = alpha * rho * gamma * gamma / (rho * (1.0 - alpha) * quartic + gamma);
    Ok(rate_from_sinr(sinr))
}

/// Best single-user rate at beamspace gain γ spread equally over L beams:
/// log₂(1 + αρ / (ρ(1−α)/L + 1/γ)).
pub fn single_user_max_rate(gamma: f64, l: usize, rho: f64, alpha: f64) -> f64 {
    debug_assert!(gamma > 0.0 && l >= 1);
    rate_from_sinr(alpha * rho / (rho * (1.0 - alpha) / l as f64 + 1.0 / gamma))
}

/// High-SNR ceiling of the single-user rate: log₂(1 + αL/(1−α)).
/// Infinite (by design) at α = 1, where no quantization ceiling exists.
pub fn single_user_rate_limit(l: usize, alpha: f64) -> f64 {
    rate_from_sinr(alpha * l as f64 / (1.0 - alpha))
}

/// Interference-blind SINR surrogate for candidate ranking:
/// αρ‖h_{b,k}‖⁴ / ((1−α)·h_{b,k}ᴴ D h_{b,k}) with
/// D = diag(ρH_bH_bᴴ + (1/(1−α))I_N) over the union of the scheduled set
/// and the candidate. Falls back to the unquantized ρ‖h_{b,k}‖² at α = 1.
pub fn approx_sinr(h_b_union: &DMatrix<Complex64>, k: usize, rho: f64, alpha: f64) -> f64 {
    let hk = h_b_union.column(k);
    let gamma = hk.norm_squared();
    if gamma <= 0.0 {
        return 0.0;
    }
    if alpha >= 1.0 {
        return rho * gamma;
    }
    let beta = 1.0 - alpha;
    let mut denom = 0.0;
    for i in 0..h_b_union.nrows() {
        let d_ii = rho * h_b_union.row(i).norm_squared() + 1.0 / beta;
        denom += d_ii * hk[i].norm_sqr();
    }
    alpha * rho * gamma * gamma / (beta * denom)
}
