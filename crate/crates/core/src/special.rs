//! Gaussian tail functions and a few scalar helpers.
//!
//! `ln_q` stays finite far into the tail (the saddlepoint expressions feed it
//! arguments well beyond the point where `Q` underflows).

use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{PI, SQRT_2};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const TAIL_SWITCH: f64 = 5.0;

/// Normalized sinc, `sin(pi x) / (pi x)`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - (PI * x).powi(2) / 6.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// Gaussian tail probability `Q(x) = P[Z > x]`.
pub fn q(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Mills ratio `Q(x) / phi(x)` for `x >= TAIL_SWITCH`, by backward evaluation
/// of its continued fraction.
fn mills_ratio(x: f64) -> f64 {
    let mut t = x;
    for k in (1..=80).rev() {
        t = x + k as f64 / t;
    }
    1.0 / t
}

/// `ln Q(x)`, accurate in the far upper tail.
pub fn ln_q(x: f64) -> f64 {
    if x < TAIL_SWITCH {
        q(x).ln()
    } else {
        -0.5 * x * x - LN_SQRT_2PI + mills_ratio(x).ln()
    }
}

/// `ln Q(x) + x^2 / 2`, the combination that appears in saddlepoint formulas.
pub fn ln_q_scaled(x: f64) -> f64 {
    if x < TAIL_SWITCH {
        q(x).ln() + 0.5 * x * x
    } else {
        -LN_SQRT_2PI + mills_ratio(x).ln()
    }
}

/// Hazard `phi(x) / Q(x)`.
fn hazard(x: f64) -> f64 {
    if x < TAIL_SWITCH {
        normal_pdf(x) / q(x)
    } else {
        1.0 / mills_ratio(x)
    }
}

/// Inverse Gaussian tail, `Q^{-1}(p)` for `p` in (0, 1).
///
/// Starts from the inverse complementary error function and polishes with
/// Newton steps on `ln Q(x) - ln p`.
pub fn q_inv(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "q_inv needs p in (0, 1), got {p}");
    if p > 0.5 {
        return -q_inv(1.0 - p);
    }
    if p == 0.5 {
        return 0.0;
    }
    let target = p.ln();
    let mut x = SQRT_2 * erfc_inv(2.0 * p);
    for _ in 0..6 {
        let f = ln_q(x) - target;
        let step = f / hazard(x);
        x += step;
        if step.abs() <= 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// Jacobian logarithm `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `dB -> linear` power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
