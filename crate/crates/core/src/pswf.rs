//! Prolate spheroidal eigenproblem and the PSWF rate benchmarks.
//!
//! All computations use the canonical scaling `W = 1/2`, `T_x = Omega`, so the
//! kernel `2W sinc(2W(t - s))` reduces to `sinc(t - s)` on `[-Omega/2, Omega/2]`.
//! The Nystrom matrix is split by parity: for symmetric Gauss-Legendre nodes the
//! even and odd eigenfunctions decouple into two half-size symmetric problems.

use crate::bounds::{na_rate_from, RateVariant};
use crate::error::{invalid, Error, Result};
use crate::quad::gauss_legendre;
use crate::special::sinc;
use nalgebra::{DMatrix, SymmetricEigen};
use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

const EIGENVALUE_FLOOR: f64 = 1e-300;
/// Channels receiving less than this fraction of the total energy are dropped.
const INACTIVE_FRACTION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Discretized PSWF system for one TBP.
#[derive(Debug, Clone)]
pub struct PswfBasis {
    pub omega: f64,
    /// `mu_0 > mu_1 > ...`, clipped to `[1e-300, 1]`.
    pub eigenvalues: Vec<f64>,
    pub parities: Vec<Parity>,
    /// Gauss-Legendre nodes on `[-Omega/2, Omega/2]`, ascending.
    pub quad_nodes: Vec<f64>,
    pub quad_weights: Vec<f64>,
    /// Truncated, unit-energy eigenfunctions sampled at `quad_nodes`.
    pub eigenfunctions: Option<Vec<Vec<f64>>>,
}

/// Minimum quadrature size accepted by [`solve_basis`].
pub fn required_quad_points(omega: f64, num_modes: usize) -> usize {
    let q = (4.0 * omega).ceil() as usize;
    q.max(2 * num_modes + 32)
}

/// Nystrom solve of the sinc-kernel eigenproblem on `[-Omega/2, Omega/2]`.
pub fn solve_basis(omega: f64, num_modes: usize, quad_points: usize) -> Result<PswfBasis> {
    solve_inner(omega, num_modes, quad_points, true)
}

fn solve_inner(omega: f64, num_modes: usize, quad_points: usize, vectors: bool) -> Result<PswfBasis> {
    if !(omega > 0.0) {
        return Err(invalid("omega", format!("must be positive, got {omega}")));
    }
    if num_modes == 0 {
        return Err(invalid("num_modes", "must be at least 1"));
    }
    let required = required_quad_points(omega, num_modes);
    if quad_points < required {
        return Err(invalid(
            "quad_points",
            format!("{quad_points} is below the minimum {required} for omega = {omega}"),
        ));
    }
    let n = quad_points + quad_points % 2;
    let half = n / 2;
    let (x, w) = gauss_legendre(n);
    let scale = 0.5 * omega;
    let nodes: Vec<f64> = x.iter().map(|xi| scale * xi).collect();
    let weights: Vec<f64> = w.iter().map(|wi| scale * wi).collect();
    // positive half, nodes[half..]
    let pos: Vec<f64> = nodes[half..].to_vec();
    let pw: Vec<f64> = weights[half..].to_vec();
    let sw: Vec<f64> = pw.iter().map(|v| v.sqrt()).collect();

    let build = |sign: f64| {
        DMatrix::from_fn(half, half, |i, j| {
            sw[i] * (sinc(pos[i] - pos[j]) + sign * sinc(pos[i] + pos[j])) * sw[j]
        })
    };

    let mut modes: Vec<(f64, Parity, Option<Vec<f64>>)> = Vec::with_capacity(n);
    for (parity, sign) in [(Parity::Even, 1.0), (Parity::Odd, -1.0)] {
        let m = build(sign);
        if vectors {
            let eig = SymmetricEigen::new(m);
            for k in 0..half {
                let v = eig.eigenvectors.column(k);
                // phi(x_j) = v_j / sqrt(2 w_j) on the positive half, extended by parity
                let mut phi = vec![0.0; n];
                let sign_fix = if v.iter().map(|a| a.abs()).fold(0.0, f64::max) > 0.0 {
                    // make phi positive near the origin on its first non-trivial sample
                    let j0 = (0..half).find(|&j| v[j].abs() > 1e-8).unwrap_or(0);
                    v[j0].signum()
                } else {
                    1.0
                };
                for j in 0..half {
                    let val = sign_fix * v[j] / (2.0 * pw[j]).sqrt();
                    phi[half + j] = val;
                    phi[half - 1 - j] = sign * val;
                }
                modes.push((eig.eigenvalues[k], parity, Some(phi)));
            }
        } else {
            let ev = m.symmetric_eigenvalues();
            modes.extend(ev.iter().map(|&e| (e, parity, None)));
        }
    }
    let trace: f64 = modes.iter().map(|m| m.0).sum();
    if (trace - omega).abs() > 1e-4 * omega {
        return Err(Error::InsufficientQuadrature { trace, expected: omega });
    }
    modes.sort_by(|a, b| b.0.total_cmp(&a.0));
    modes.truncate(num_modes.min(n));

    let eigenvalues = modes.iter().map(|m| m.0.clamp(EIGENVALUE_FLOOR, 1.0)).collect();
    let parities = modes.iter().map(|m| m.1).collect();
    let eigenfunctions = if vectors {
        Some(modes.into_iter().map(|m| m.2.unwrap_or_default()).collect())
    } else {
        None
    };
    Ok(PswfBasis { omega, eigenvalues, parities, quad_nodes: nodes, quad_weights: weights, eigenfunctions })
}

impl PswfBasis {
    /// Nystrom interpolation of eigenfunction `k` at canonical time `t`
    /// (zero outside the interval).
    pub fn eval(&self, k: usize, t: f64) -> f64 {
        if t.abs() > 0.5 * self.omega {
            return 0.0;
        }
        let phi = &self.eigenfunctions.as_ref().expect("basis solved without eigenfunctions")[k];
        let mu = self.eigenvalues[k];
        let s: f64 = self
            .quad_nodes
            .iter()
            .zip(&self.quad_weights)
            .zip(phi)
            .map(|((&x, &w), &p)| w * sinc(t - x) * p)
            .sum();
        s / mu
    }
}

type CacheKey = (u64, usize);

/// Eigenvalue cache keyed by `(Omega, quad_points)`.
#[derive(Default)]
pub struct PswfCache {
    inner: RwLock<HashMap<CacheKey, Arc<Vec<f64>>>>,
}

impl PswfCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Descending eigenvalues for the default mode count `ceil(Omega) + 20`.
    pub fn eigenvalues(&self, omega: f64) -> Result<Arc<Vec<f64>>> {
        let modes = default_modes(omega);
        let quad = required_quad_points(omega, modes);
        let key = (omega.to_bits(), quad);
        if let Some(v) = self.inner.read().expect("cache poisoned").get(&key) {
            return Ok(Arc::clone(v));
        }
        let basis = solve_inner(omega, modes, quad, false)?;
        let v = Arc::new(basis.eigenvalues);
        self.inner.write().expect("cache poisoned").insert(key, Arc::clone(&v));
        Ok(v)
    }
}

/// Process-wide cache used by the convenience functions below.
pub fn global_cache() -> &'static PswfCache {
    static CACHE: OnceLock<PswfCache> = OnceLock::new();
    CACHE.get_or_init(PswfCache::new)
}

pub fn default_modes(omega: f64) -> usize {
    omega.ceil() as usize + 20
}

/// Largest `N` with `(1/N) sum_{n<N} (1 - mu_n) <= eps_W` for the given
/// descending eigenvalues.
pub fn dimensions_from_eigenvalues(eigenvalues: &[f64], eps_w: f64) -> usize {
    let mut acc = 0.0;
    let mut best = 0;
    for (k, &mu) in eigenvalues.iter().enumerate() {
        acc += 1.0 - mu;
        if acc / (k + 1) as f64 <= eps_w {
            best = k + 1;
        } else {
            break;
        }
    }
    best
}

/// Maximum number of signaling dimensions `N*` and the loss `eta = Omega - N*`.
pub fn max_dimensions(omega: f64, eps_w: f64) -> Result<(usize, f64)> {
    check_eps(eps_w)?;
    let mu = global_cache().eigenvalues(omega)?;
    let n = dimensions_from_eigenvalues(&mu, eps_w);
    Ok((n, omega - n as f64))
}

fn check_eps(eps_w: f64) -> Result<()> {
    if eps_w > 0.0 && eps_w < 1.0 {
        Ok(())
    } else {
        Err(invalid("eps_W", format!("must lie in (0, 1), got {eps_w}")))
    }
}

/// Normal-approximation rate of uniform-power PSWF signaling.
pub fn uniform_benchmark(omega: f64, eps_w: f64, rho: f64, pe: f64) -> Result<f64> {
    check_eps(eps_w)?;
    let mu = global_cache().eigenvalues(omega)?;
    uniform_from_eigenvalues(&mu, omega, eps_w, rho, pe)
}

pub fn uniform_from_eigenvalues(mu: &[f64], omega: f64, eps_w: f64, rho: f64, pe: f64) -> Result<f64> {
    let n = dimensions_from_eigenvalues(mu, eps_w);
    if n == 0 {
        return Ok(0.0);
    }
    let sigma_sq = vec![n as f64 / (rho * omega); n];
    na_rate_from(&sigma_sq, omega, pe, RateVariant::Complex)
}

/// Solution of the coupled power/OOB waterfilling problem.
#[derive(Debug, Clone)]
pub struct WaterfillSolution {
    /// Per-mode powers normalized to `N_0 = 1`.
    pub powers: Vec<f64>,
    pub theta1: f64,
    pub theta2: f64,
    /// Relative residuals of the power and OOB equalities.
    pub power_residual: f64,
    pub oob_residual: f64,
}

/// Waterfilling over PSWF modes: `P_n = max(0, S / (theta1 (1 - mu_n) + theta2) - 1)`
/// with `S = P T_x / N_0 = rho * Omega`.
pub fn waterfill(mu: &[f64], total: f64, eps_w: f64) -> Result<WaterfillSolution> {
    check_eps(eps_w)?;
    let leak: Vec<f64> = mu.iter().map(|m| 1.0 - m).collect();
    let alloc = |t1: f64, t2: f64| -> Vec<f64> {
        leak.iter().map(|l| (total / (t1 * l + t2) - 1.0).max(0.0)).collect()
    };
    let sums = |p: &[f64]| -> (f64, f64) {
        let pw: f64 = p.iter().sum();
        let oob: f64 = p.iter().zip(&leak).map(|(a, l)| a * l).sum();
        (pw, oob)
    };
    let residuals = |t1: f64, t2: f64| {
        let (pw, oob) = sums(&alloc(t1, t2));
        ((pw - total) / total, (oob - eps_w * total) / total)
    };

    // theta2 solving the power equality for fixed theta1 (sum of powers
    // decreases in theta2).
    let solve_t2 = |t1: f64| -> f64 {
        let f = |t2: f64| sums(&alloc(t1, t2)).0 - total;
        let mut lo = 1e-300f64;
        let mut hi = total.max(1.0);
        while f(hi) > 0.0 {
            hi *= 2.0;
        }
        // lo must give too much power; shrink towards zero in log space
        let mut probe = hi;
        while f(probe) <= 0.0 && probe > 1e-300 {
            probe *= 0.5;
        }
        lo = lo.max(probe);
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi / lo - 1.0 < 1e-15 {
                break;
            }
        }
        0.5 * (lo + hi)
    };

    // OOB constraint inactive: plain waterfilling on the power constraint.
    let t2_free = solve_t2(0.0);
    let (_, oob_free) = sums(&alloc(0.0, t2_free));
    if oob_free <= eps_w * total * (1.0 + 1e-12) {
        let (rp, ro) = residuals(0.0, t2_free);
        return Ok(WaterfillSolution { powers: alloc(0.0, t2_free), theta1: 0.0, theta2: t2_free, power_residual: rp, oob_residual: ro.min(0.0) });
    }

    let oob_at = |t1: f64| {
        let t2 = solve_t2(t1);
        (sums(&alloc(t1, t2)).1 - eps_w * total, t2)
    };

    // Damped Newton on both residuals, starting from a bracketed guess.
    let mut t1 = total;
    let (mut g, _) = oob_at(t1);
    let mut lo = 0.0f64;
    let mut hi = f64::INFINITY;
    while g > 0.0 {
        lo = t1;
        t1 *= 4.0;
        g = oob_at(t1).0;
        if t1 > 1e300 {
            return Err(Error::NoFeasibleMultipliers { eps: eps_w });
        }
    }
    hi = hi.min(t1);
    if let Some((a, b)) = newton_multipliers(&residuals, t1, solve_t2(t1)) {
        let (rp, ro) = residuals(a, b);
        if a > 0.0 && b > 0.0 && rp.abs() < 1e-10 && ro.abs() < 1e-10 {
            return Ok(WaterfillSolution { powers: alloc(a, b), theta1: a, theta2: b, power_residual: rp, oob_residual: ro });
        }
    }
    // Fallback: nested bisection in log(theta1).
    if lo == 0.0 {
        lo = hi;
        while oob_at(lo).0 <= 0.0 {
            lo *= 0.25;
            if lo < 1e-300 {
                return Err(Error::NoFeasibleMultipliers { eps: eps_w });
            }
        }
    }
    for _ in 0..300 {
        let mid = (lo * hi).sqrt();
        if oob_at(mid).0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-14 {
            break;
        }
    }
    let t1 = (lo * hi).sqrt();
    let t2 = solve_t2(t1);
    let (rp, ro) = residuals(t1, t2);
    if rp.abs() > 1e-8 || ro.abs() > 1e-8 {
        return Err(Error::NoFeasibleMultipliers { eps: eps_w });
    }
    Ok(WaterfillSolution { powers: alloc(t1, t2), theta1: t1, theta2: t2, power_residual: rp, oob_residual: ro })
}

fn newton_multipliers(res: &impl Fn(f64, f64) -> (f64, f64), t1: f64, t2: f64) -> Option<(f64, f64)> {
    // Work in log coordinates so both multipliers stay positive.
    let mut u = [t1.ln(), t2.ln()];
    let eval = |u: [f64; 2]| {
        let r = res(u[0].exp(), u[1].exp());
        [r.0, r.1]
    };
    let mut r = eval(u);
    for _ in 0..60 {
        let norm = r[0].hypot(r[1]);
        if norm < 1e-13 {
            return Some((u[0].exp(), u[1].exp()));
        }
        let h = 1e-7;
        let r0 = eval([u[0] + h, u[1]]);
        let r1 = eval([u[0], u[1] + h]);
        let j = [[(r0[0] - r[0]) / h, (r1[0] - r[0]) / h], [(r0[1] - r[1]) / h, (r1[1] - r[1]) / h]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 || !det.is_finite() {
            return None;
        }
        let d0 = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let d1 = (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        let mut step = 1.0;
        loop {
            let cand = [u[0] - step * d0, u[1] - step * d1];
            let rc = eval(cand);
            if rc[0].hypot(rc[1]) < norm || step < 1e-6 {
                u = cand;
                r = rc;
                break;
            }
            step *= 0.5;
        }
    }
    (r[0].hypot(r[1]) < 1e-10).then(|| (u[0].exp(), u[1].exp()))
}

/// Normal-approximation rate of PSWF signaling with waterfilled mode powers.
pub fn waterfill_benchmark(omega: f64, eps_w: f64, rho: f64, pe: f64) -> Result<f64> {
    check_eps(eps_w)?;
    let mu = global_cache().eigenvalues(omega)?;
    waterfill_from_eigenvalues(&mu, omega, eps_w, rho, pe)
}

pub fn waterfill_from_eigenvalues(mu: &[f64], omega: f64, eps_w: f64, rho: f64, pe: f64) -> Result<f64> {
    let total = rho * omega;
    let sol = waterfill(mu, total, eps_w)?;
    let sigma_sq: Vec<f64> = sol
        .powers
        .iter()
        .filter(|&&p| p > INACTIVE_FRACTION * total)
        .map(|p| 1.0 / p)
        .collect();
    if sigma_sq.is_empty() {
        return Ok(0.0);
    }
    na_rate_from(&sigma_sq, omega, pe, RateVariant::Complex)
}
