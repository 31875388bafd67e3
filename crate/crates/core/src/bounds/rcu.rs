use super::saddlepoint::log_cdf_any;
use super::{BoundResult, Diagnostics, Method};
use crate::channel::ChannelModel;
use crate::error::{invalid, Result};
use crate::rng::stream;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::LN_2;

pub const DEFAULT_RCU_SAMPLES: usize = 1_000_000;
const CHUNK: usize = 4096;
const RATE_GRID: f64 = 1e-4;

/// Monte Carlo draws of the per-realization pairwise-error log-probability
/// `ln P[Σ V_n(ỹ_n)/σ_n² ≤ μ(x̃, ỹ)]`.
///
/// These do not depend on the rate, so one sampler answers BLER queries at
/// any `R` and the rate search is cheap.
#[derive(Debug, Clone)]
pub struct RcuSampler {
    pub omega: f64,
    pub seed: u64,
    log_g: Vec<f64>,
}

impl RcuSampler {
    pub fn new(noise_vars: &[f64], omega: f64, samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(invalid("samples", "at least one draw is required"));
        }
        if noise_vars.is_empty() {
            return Err(invalid("sigma_sq", "at least one channel is required"));
        }
        let chunks = samples.div_ceil(CHUNK);
        let parts: Vec<Result<Vec<f64>>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let count = CHUNK.min(samples - c * CHUNK);
                draw_chunk(noise_vars, count, seed, c as u64)
            })
            .collect();
        let mut log_g = Vec::with_capacity(samples);
        for p in parts {
            log_g.extend(p?);
        }
        Ok(RcuSampler { omega, seed, log_g })
    }

    pub fn samples(&self) -> usize {
        self.log_g.len()
    }

    /// Per-draw log pairwise-error probabilities.
    pub fn log_pairwise(&self) -> &[f64] {
        &self.log_g
    }

    /// RCU BLER estimate at rate `r` (bps/Hz) and its standard error.
    pub fn bler(&self, r: f64) -> (f64, f64) {
        let x = self.omega * r * LN_2;
        // ln(2^{ΩR} - 1)
        let log_m = if x <= 0.0 { f64::NEG_INFINITY } else { x + (-(-x).exp_m1()).ln() };
        let n = self.log_g.len() as f64;
        let (mut s, mut s2) = (0.0, 0.0);
        for &l in &self.log_g {
            let v = (log_m + l).min(0.0).exp();
            s += v;
            s2 += v * v;
        }
        let mean = s / n;
        let var = if n > 1.0 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        (mean, (var / n).sqrt())
    }

    /// Largest rate on the `1e-4` grid whose BLER estimate is at most `pe`.
    pub fn rate(&self, pe: f64) -> f64 {
        let ok = |k: u64| self.bler(k as f64 * RATE_GRID).0 <= pe;
        let mut hi: u64 = 10_000;
        while ok(hi) {
            hi *= 2;
        }
        let mut lo = 0;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo as f64 * RATE_GRID
    }
}

fn draw_chunk(noise_vars: &[f64], count: usize, seed: u64, index: u64) -> Result<Vec<f64>> {
    let mut rng = stream(seed, index);
    let mut xi = vec![0.0; noise_vars.len()];
    let mut out = Vec::with_capacity(count);
    let half = 0.5f64.sqrt();
    for _ in 0..count {
        let mut mu = 0.0;
        for (k, &s) in noise_vars.iter().enumerate() {
            let g: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
            let (xr, xim) = (g[0] * half, g[1] * half);
            let sd = (0.5 * s).sqrt();
            let (zr, zi) = (g[2] * sd, g[3] * sd);
            mu += (zr * zr + zi * zi) / s;
            xi[k] = (xr + zr).powi(2) + (xim + zi).powi(2);
        }
        out.push(if mu > 0.0 { log_cdf_any(noise_vars, &xi, mu)? } else { f64::NEG_INFINITY });
    }
    Ok(out)
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 100_000 {
        return Err(invalid("samples", format!("at least 1e5 draws are required, got {samples}")));
    }
    Ok(())
}

/// RCU upper bound on the BLER at rate `r`.
pub fn rcu_bler(ch: &ChannelModel, r: f64, samples: usize, seed: u64) -> Result<BoundResult> {
    check_samples(samples)?;
    let sampler = RcuSampler::new(&ch.noise_vars, ch.omega, samples, seed)?;
    let (bler, se) = sampler.bler(r);
    Ok(BoundResult {
        method: Method::Rcu,
        rate_bps_hz: Some(r),
        bler: Some(bler),
        diagnostics: Diagnostics { rcu_samples: Some(samples), seed: Some(seed), std_error: Some(se), ..Default::default() },
    })
}

/// RCU lower bound on the rate at BLER `pe`.
pub fn rcu_rate(ch: &ChannelModel, pe: f64, samples: usize, seed: u64) -> Result<BoundResult> {
    check_samples(samples)?;
    if !(pe > 0.0 && pe < 1.0) {
        return Err(invalid("Pe", format!("must lie in (0, 1), got {pe}")));
    }
    let sampler = RcuSampler::new(&ch.noise_vars, ch.omega, samples, seed)?;
    let r = sampler.rate(pe);
    let (_, se) = sampler.bler(r);
    Ok(BoundResult {
        method: Method::Rcu,
        rate_bps_hz: Some(r),
        bler: Some(pe),
        diagnostics: Diagnostics { rcu_samples: Some(samples), seed: Some(seed), std_error: Some(se), ..Default::default() },
    })
}
