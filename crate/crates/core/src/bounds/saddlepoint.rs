//! Cumulant generating function of weighted complex noncentral chi-square sums
//! and saddlepoint tail approximations.
//!
//! `Y = Σ X_n / s_n` with `X_n` complex noncentral chi-square (one complex
//! degree of freedom, noncentrality `ξ_n`), whose MGF is
//! `exp(tξ/(1-t)) / (1-t)`.

use crate::error::{invalid, Error, Result};
use crate::special::ln_q_scaled;

/// `K`, `K'` and `K''` at `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgfEval {
    pub t: f64,
    pub k: f64,
    pub k1: f64,
    pub k2: f64,
}

/// Saddlepoint approximation of a log tail probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddlepointTail {
    pub log_p: f64,
    pub t_hat: f64,
    pub k2: f64,
}

fn domain_bound(sigma_sq: &[f64]) -> f64 {
    sigma_sq.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn cgf(t: f64, sigma_sq: &[f64], xi: &[f64]) -> Result<CgfEval> {
    let bound = domain_bound(sigma_sq);
    if !(t < bound) {
        return Err(Error::DomainViolation { t, bound });
    }
    Ok(cgf_unchecked(t, sigma_sq, xi))
}

fn cgf_unchecked(t: f64, sigma_sq: &[f64], xi: &[f64]) -> CgfEval {
    let (mut k, mut k1, mut k2) = (0.0, 0.0, 0.0);
    for (&s, &x) in sigma_sq.iter().zip(xi) {
        let r = 1.0 - t / s;
        let d = s - t;
        k += x * t / d - (-t / s).ln_1p();
        k1 += (1.0 + x / r) / d;
        k2 += (1.0 + 2.0 * x / r) / (d * d);
    }
    CgfEval { t, k, k1, k2 }
}

fn derivatives(t: f64, sigma_sq: &[f64], xi: &[f64]) -> (f64, f64) {
    let (mut k1, mut k2) = (0.0, 0.0);
    for (&s, &x) in sigma_sq.iter().zip(xi) {
        let d = s - t;
        let r = d / s;
        k1 += (1.0 + x / r) / d;
        k2 += (1.0 + 2.0 * x / r) / (d * d);
    }
    (k1, k2)
}

/// Mean of `Y`, `Σ (1 + ξ_n) / s_n`.
pub fn mean(sigma_sq: &[f64], xi: &[f64]) -> f64 {
    sigma_sq.iter().zip(xi).map(|(s, x)| (1.0 + x) / s).sum()
}

fn combine(e: &CgfEval) -> f64 {
    // ln Q(w) + w²/2 with w = |t|√K'' absorbs the t²K''/2 term exactly
    let w = e.t.abs() * e.k2.sqrt();
    ln_q_scaled(w) + e.k - e.t * e.k1
}

/// `ln P[Y ≤ a]` for `0 < a ≤ E[Y]`.
pub fn saddlepoint_log_cdf(sigma_sq: &[f64], xi: &[f64], a: f64) -> Result<f64> {
    saddlepoint_lower(sigma_sq, xi, a).map(|r| r.log_p)
}

/// Lower-tail approximation with its saddlepoint diagnostics.
pub fn saddlepoint_lower(sigma_sq: &[f64], xi: &[f64], a: f64) -> Result<SaddlepointTail> {
    if sigma_sq.is_empty() || sigma_sq.len() != xi.len() {
        return Err(invalid("sigma_sq", "needs one scale per noncentrality, at least one"));
    }
    if !(a > 0.0) {
        return Err(Error::NoRoot { level: a, reason: "K' is positive on its whole domain" });
    }
    let m = mean(sigma_sq, xi);
    if a > m * (1.0 + 1e-14) {
        return Err(invalid("a", format!("level {a} exceeds the mean {m}; the lower-tail form needs a ≤ E[Y]")));
    }
    let t = solve_lower(sigma_sq, xi, a, m);
    let e = cgf_unchecked(t, sigma_sq, xi);
    Ok(SaddlepointTail { log_p: combine(&e), t_hat: t, k2: e.k2 })
}

fn solve_lower(sigma_sq: &[f64], xi: &[f64], a: f64, m: f64) -> f64 {
    if a >= m {
        return 0.0;
    }
    // K'(t) < Σ(1+ξ)/|t| for t < 0, so K'(lo) < a
    let mut lo = -sigma_sq.iter().zip(xi).map(|(_, x)| 1.0 + x).sum::<f64>() / a;
    let mut hi = 0.0;
    let mut t = 0.0;
    let tol = 1e-10 * a;
    for _ in 0..200 {
        let (k1, k2) = derivatives(t, sigma_sq, xi);
        let f = k1 - a;
        if f.abs() <= tol {
            return t;
        }
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let newton = t - f / k2;
        t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 1e-15 * hi.abs().max(lo.abs()) {
            return t;
        }
    }
    t
}

/// `ln P[Y ≥ a]` for `a ≥ E[Y]` (saddlepoint `t̂ ∈ [0, min s)`).
pub fn saddlepoint_log_sf(sigma_sq: &[f64], xi: &[f64], a: f64) -> Result<SaddlepointTail> {
    if sigma_sq.is_empty() || sigma_sq.len() != xi.len() {
        return Err(invalid("sigma_sq", "needs one scale per noncentrality, at least one"));
    }
    let m = mean(sigma_sq, xi);
    if a < m * (1.0 - 1e-14) {
        return Err(invalid("a", format!("level {a} is below the mean {m}; the upper-tail form needs a ≥ E[Y]")));
    }
    let bound = domain_bound(sigma_sq);
    let (mut lo, mut hi) = (0.0, bound);
    let mut t = 0.0;
    let tol = 1e-10 * a;
    for _ in 0..400 {
        let (k1, k2) = derivatives(t, sigma_sq, xi);
        let f = k1 - a;
        if f.abs() <= tol {
            break;
        }
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let newton = t - f / k2;
        t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 1e-16 * bound {
            break;
        }
    }
    let e = cgf_unchecked(t, sigma_sq, xi);
    Ok(SaddlepointTail { log_p: combine(&e), t_hat: t, k2: e.k2 })
}

/// `ln P[Y ≤ a]` for any `a > 0`: the lower-tail form below the mean and
/// `ln(1 - P[Y > a])` above it.
pub fn log_cdf_any(sigma_sq: &[f64], xi: &[f64], a: f64) -> Result<f64> {
    if a <= mean(sigma_sq, xi) {
        saddlepoint_log_cdf(sigma_sq, xi, a)
    } else {
        let up = saddlepoint_log_sf(sigma_sq, xi, a)?;
        Ok((-up.log_p.exp()).ln_1p())
    }
}

/// Upper-tail level: the `t̂ ≥ 0` at which the saddlepoint `ln P[Y ≥ K'(t̂)]`
/// equals `log_p`, and the corresponding level `K'(t̂)`. The approximation is
/// monotone in `t̂`, so this is a bracketed bisection.
pub fn upper_tail_level(sigma_sq: &[f64], xi: &[f64], log_p: f64) -> Option<(f64, f64)> {
    if !(log_p < 0.5f64.ln()) {
        return None;
    }
    let g = |t: f64| combine(&cgf_unchecked(t, sigma_sq, xi));
    let bound = domain_bound(sigma_sq);
    let (mut lo, mut hi) = (0.0, bound);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > log_p {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-15 * hi {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    let value = g(t);
    if !value.is_finite() || (value - log_p).abs() > 1e-6 * log_p.abs().max(1.0) {
        return None;
    }
    Some((t, derivatives(t, sigma_sq, xi).0))
}
