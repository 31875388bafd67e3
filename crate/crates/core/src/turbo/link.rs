use super::codes::{rsc_decode, rsc_encode, urc_decode, urc_encode};
use super::equalizer::map_equalize;
use super::interleaver::{s_random_interleaver, Interleaver};
use super::{qpsk_map, LlrRole, LlrVector};
use crate::bounds::na_bler_from;
use crate::bounds::RateVariant;
use crate::channel::{diagonalize, gram_taps, toeplitz};
use crate::error::{invalid, Result};
use crate::pulse::{make_rrc_default, Pulse};
use crate::rng::{derive_seed, stream};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Frame, code and receiver schedule of the turbo link.
#[derive(Debug, Clone, PartialEq)]
pub struct CodingConfig {
    pub info_bits: usize,
    pub equalizer_memory: usize,
    pub i_in: usize,
    pub i_out: usize,
    /// Stop once the information-bit decisions survive a full outer
    /// iteration unchanged.
    pub early_stop: bool,
    pub beta: f64,
    /// Pulse TBP `2 W T_p`.
    pub c: f64,
    pub tau: f64,
    pub omega: f64,
    pub w: f64,
    pub interleaver_seed: u64,
}

impl Default for CodingConfig {
    fn default() -> Self {
        CodingConfig {
            info_bits: 128,
            equalizer_memory: 3,
            i_in: 5,
            i_out: 100,
            early_stop: false,
            beta: 1.0,
            c: 8.57,
            tau: 0.4859,
            omega: 132.0,
            w: 0.5,
            interleaver_seed: 0x5eed,
        }
    }
}

impl CodingConfig {
    /// QPSK symbols per frame (rate-1/2 code, two bits per symbol).
    pub fn symbols(&self) -> usize {
        self.info_bits
    }

    /// Spectral efficiency `K / Ω` in bps/Hz.
    pub fn rate(&self) -> f64 {
        self.info_bits as f64 / self.omega
    }

    pub fn validate(&self) -> Result<()> {
        if self.info_bits < 4 {
            return Err(invalid("info_bits", "at least 4 bits are required"));
        }
        if self.equalizer_memory > super::MAX_MEMORY {
            return Err(crate::Error::MemoryTooLarge(self.equalizer_memory));
        }
        if self.i_in == 0 || self.i_out == 0 {
            return Err(invalid("schedule", "I_in and I_out must be positive"));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(invalid("tau", format!("must lie in (0, 1], got {}", self.tau)));
        }
        Ok(())
    }
}

/// Matched-filter FTN channel `y = √(ρΩ/N) H x + z`, `cov(z) = H`.
#[derive(Debug, Clone)]
pub struct FtnChannel {
    pub n: usize,
    pub omega: f64,
    pub taps: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    h: DMatrix<f64>,
    coloring: DMatrix<f64>,
}

impl FtnChannel {
    pub fn new(p: &Pulse, tau: f64, omega: f64, n: usize) -> Result<Self> {
        let taps = gram_taps(p, tau, n);
        let h = toeplitz(&taps);
        let (eigenvalues, u) = diagonalize(&h)?;
        let sqrt_l = DVector::from_iterator(n, eigenvalues.iter().map(|l| l.sqrt()));
        let coloring = u * DMatrix::from_diagonal(&sqrt_l);
        Ok(FtnChannel { n, omega, taps, eigenvalues, h, coloring })
    }

    /// Signal amplitude `√(ρΩ/N)`.
    pub fn amplitude(&self, rho: f64) -> f64 {
        (rho * self.omega / self.n as f64).sqrt()
    }

    /// Noise variances `σ_n² = 1/(ρ (Ω/N) λ_n)` of the parallel model.
    pub fn noise_vars(&self, rho: f64) -> Vec<f64> {
        let g = rho * self.omega / self.n as f64;
        self.eigenvalues.iter().map(|l| 1.0 / (g * l)).collect()
    }

    pub fn noiseless(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n).map(|i| (0..self.n).map(|j| x[j] * self.h[(i, j)]).sum()).collect()
    }

    /// Colored noise `z = U Λ^{1/2} w`, `w ~ CN(0, I)`.
    pub fn noise<R: Rng>(&self, rng: &mut R) -> Vec<Complex64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let w: Vec<Complex64> = (0..self.n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(s * re, s * im)
            })
            .collect();
        (0..self.n).map(|i| (0..self.n).map(|j| w[j] * self.coloring[(i, j)]).sum()).collect()
    }

    pub fn transmit<R: Rng>(&self, x: &[Complex64], rho: f64, rng: &mut R) -> Vec<Complex64> {
        let a = self.amplitude(rho);
        let z = self.noise(rng);
        self.noiseless(x).iter().zip(z).map(|(s, z)| s * a + z).collect()
    }
}

/// One channel use with a freshly built channel.
pub fn ftn_transmit(symbols: &[Complex64], p: &Pulse, tau: f64, rho: f64, omega: f64, seed: u64) -> Result<Vec<Complex64>> {
    let ch = FtnChannel::new(p, tau, omega, symbols.len())?;
    Ok(ch.transmit(symbols, rho, &mut stream(seed, 0)))
}

/// Encoder, channel and interleavers for one configuration.
#[derive(Debug, Clone)]
pub struct TurboLink {
    pub config: CodingConfig,
    pub channel: FtnChannel,
    pub pi1: Interleaver,
    pub pi2: Interleaver,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub bits: Vec<u8>,
    /// Outer iterations run.
    pub iterations: usize,
}

impl TurboLink {
    pub fn new(config: CodingConfig) -> Result<Self> {
        config.validate()?;
        let p = make_rrc_default(config.beta, config.w, config.c)?;
        Self::with_pulse(config, &p)
    }

    pub fn with_pulse(config: CodingConfig, p: &Pulse) -> Result<Self> {
        config.validate()?;
        let n = config.symbols();
        let channel = FtnChannel::new(p, config.tau, config.omega, n)?;
        let l = 2 * config.info_bits;
        let pi1 = s_random_interleaver(l, derive_seed(config.interleaver_seed, 1));
        let pi2 = s_random_interleaver(l, derive_seed(config.interleaver_seed, 2));
        Ok(TurboLink { config, channel, pi1, pi2 })
    }

    /// RSC → π1 → URC → π2 → QPSK.
    pub fn encode(&self, bits: &[u8]) -> Vec<Complex64> {
        let v = self.pi1.apply(&rsc_encode(bits));
        let w = self.pi2.apply(&urc_encode(&v));
        qpsk_map(&w)
    }

    pub fn receive(&self, y: &[Complex64], rho: f64) -> Result<Decoded> {
        three_stage_receive(y, self, rho)
    }

    /// Simulates one frame; returns whether it was decoded in error and the
    /// outer iterations used.
    pub fn simulate_block(&self, rho: f64, seed: u64, block: u64) -> Result<(bool, usize)> {
        let mut rng = stream(seed, block);
        let bits: Vec<u8> = (0..self.config.info_bits).map(|_| rng.random_range(0..2u8)).collect();
        let y = self.channel.transmit(&self.encode(&bits), rho, &mut rng);
        let d = self.receive(&y, rho)?;
        Ok((d.bits != bits, d.iterations))
    }
}

/// Iterative receiver: the equalizer and URC decoder exchange extrinsic
/// information `I_in` times per outer iteration, then the URC and RSC
/// decoders exchange theirs once. Decisions come from the final RSC pass.
pub fn three_stage_receive(y: &[Complex64], link: &TurboLink, rho: f64) -> Result<Decoded> {
    let cfg = &link.config;
    let ch = &link.channel;
    let a = ch.amplitude(rho);
    let yn: Vec<Complex64> = y.iter().map(|v| v / a).collect();
    let mem = cfg.equalizer_memory.min(ch.taps.len() - 1);
    let taps = &ch.taps[..=mem];
    let nu = 1.0 / (a * a);
    let l = 2 * cfg.info_bits;

    let mut la_eq = LlrVector::zeros(l);
    let mut la_urc_in = vec![0.0; l];
    let mut decisions: Option<Vec<u8>> = None;
    let mut iterations = 0;
    for _ in 0..cfg.i_out {
        iterations += 1;
        let mut urc = None;
        for _ in 0..cfg.i_in {
            let e = map_equalize(&yn, taps, nu, &la_eq)?;
            let d = urc_decode(&la_urc_in, &link.pi2.invert(&e.values));
            la_eq = LlrVector::new(link.pi2.apply(&d.output.values), LlrRole::APriori);
            urc = Some(d);
        }
        let urc = urc.expect("I_in is positive");
        let r = rsc_decode(&link.pi1.invert(&urc.input.values));
        la_urc_in = link.pi1.apply(&r.output.values);
        let hard: Vec<u8> = r.app.iter().map(|&v| u8::from(v < 0.0)).collect();
        let stable = decisions.as_ref() == Some(&hard);
        decisions = Some(hard);
        if cfg.early_stop && stable {
            break;
        }
    }
    Ok(Decoded { bits: decisions.expect("I_out is positive"), iterations })
}

/// Per-SNR Monte Carlo record.
#[derive(Debug, Clone, PartialEq)]
pub struct BlerPoint {
    pub snr_db: f64,
    pub blocks: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_iterations: f64,
}

/// Wilson score interval for `k` successes out of `n` at normal quantile `z`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let den = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / den;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / den;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// BLER at each SNR (dB, `ρ = 10^{dB/10}`); block `b` of point `i` uses the
/// stream `(derive_seed(seed, i), b)`.
pub fn bler_sweep(link: &TurboLink, snr_db: &[f64], blocks: u64, seed: u64) -> Result<Vec<BlerPoint>> {
    snr_db
        .iter()
        .enumerate()
        .map(|(i, &db)| {
            let rho = crate::special::db_to_linear(db);
            let point_seed = derive_seed(seed, i as u64);
            let (errors, iters) = (0..blocks)
                .into_par_iter()
                .map(|b| link.simulate_block(rho, point_seed, b).map(|(e, it)| (u64::from(e), it as u64)))
                .try_reduce(|| (0, 0), |x, y| Ok((x.0 + y.0, x.1 + y.1)))?;
            let (ci_low, ci_high) = wilson_interval(errors, blocks, 1.96);
            Ok(BlerPoint {
                snr_db: db,
                blocks,
                block_errors: errors,
                bler: errors as f64 / blocks.max(1) as f64,
                ci_low,
                ci_high,
                mean_iterations: iters as f64 / blocks.max(1) as f64,
            })
        })
        .collect()
}

/// SNR (dB) at which the normal-approximation minimum BLER at `rate`
/// reaches `target`, by bisection on `[lo, hi]` dB.
pub fn na_crossing_db(channel: &FtnChannel, rate: f64, target: f64, lo: f64, hi: f64) -> Result<f64> {
    let f = |db: f64| -> Result<f64> {
        let s = channel.noise_vars(crate::special::db_to_linear(db));
        Ok(na_bler_from(&s, channel.omega, rate, RateVariant::Complex)?.ln() - target.ln())
    };
    let (mut a, mut b) = (lo, hi);
    if f(a)? < 0.0 || f(b)? > 0.0 {
        return Err(invalid("snr range", format!("BLER target {target} not bracketed by [{lo}, {hi}] dB")));
    }
    while b - a > 1e-6 {
        let m = 0.5 * (a + b);
        if f(m)? > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// First SNR at which the simulated BLER drops to `target`, interpolating
/// `log BLER` linearly between neighbouring points.
pub fn bler_crossing_db(points: &[BlerPoint], target: f64) -> Option<f64> {
    for w in points.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        if p.bler > target && q.bler <= target {
            if q.bler == 0.0 {
                return Some(q.snr_db);
            }
            let t = (p.bler.ln() - target.ln()) / (p.bler.ln() - q.bler.ln());
            return Some(p.snr_db + t * (q.snr_db - p.snr_db));
        }
    }
    None
}
