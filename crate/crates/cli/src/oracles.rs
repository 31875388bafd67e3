//! Independent reference computations used by `selftest` and the acceptance
//! checks.

use ftn_tbp::rng::stream;
use ftn_tbp::turbo::qpsk_map;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Extrinsic bit LLRs by enumerating all `4^N` QPSK sequences under the
/// metric `(2/ν)Re{xᴴy} - (1/ν)xᴴHx + priors`, `H` banded Toeplitz in `taps`.
pub fn brute_force_map(y: &[Complex64], taps: &[f64], nu: f64, la: &[f64]) -> Vec<f64> {
    let n = y.len();
    let h = |i: usize, j: usize| taps.get(i.abs_diff(j)).copied().unwrap_or(0.0);
    let mut num = vec![Vec::new(); 2 * n];
    let mut den = vec![Vec::new(); 2 * n];
    for code in 0..(1usize << (2 * n)) {
        let bits: Vec<u8> = (0..2 * n).map(|k| ((code >> k) & 1) as u8).collect();
        let x = qpsk_map(&bits);
        let corr: f64 = (0..n).map(|i| (x[i].conj() * y[i]).re).sum();
        let quad: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| h(i, j) * (x[i].conj() * x[j]).re).sum();
        let prior: f64 = bits.iter().zip(la).map(|(&b, &l)| if b == 0 { 0.5 * l } else { -0.5 * l }).sum();
        let m = 2.0 * corr / nu - quad / nu + prior;
        for k in 0..2 * n {
            if bits[k] == 0 { num[k].push(m) } else { den[k].push(m) }
        }
    }
    (0..2 * n).map(|k| log_sum_exp(&num[k]) - log_sum_exp(&den[k]) - la[k]).collect()
}

/// Random banded ISI observation with `N` symbols, plus random priors.
pub fn random_isi_case(n: usize, taps: &[f64], noise_sd: f64, seed: u64) -> (Vec<Complex64>, Vec<f64>) {
    let mut rng = stream(seed, 0);
    let bits: Vec<u8> = (0..2 * n).map(|_| rng.random_range(0..2u8)).collect();
    let x = qpsk_map(&bits);
    let y = (0..n)
        .map(|i| {
            let isi: Complex64 = (0..n).map(|j| x[j] * taps.get(i.abs_diff(j)).copied().unwrap_or(0.0)).sum();
            let z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * noise_sd;
            isi + z
        })
        .collect();
    let la = (0..2 * n).map(|_| rng.random_range(-2.0..2.0)).collect();
    (y, la)
}

/// Draw of `Σ |√ξ_n + w_n|² / s_n`, `w_n ~ CN(0, 1)`.
fn chi_sum<R: Rng>(rng: &mut R, s: &[f64], xi: &[f64]) -> f64 {
    let h = 0.5f64.sqrt();
    s.iter()
        .zip(xi)
        .map(|(s, x)| {
            let a: f64 = rng.sample::<f64, _>(StandardNormal) * h;
            let b: f64 = rng.sample::<f64, _>(StandardNormal) * h;
            ((x.sqrt() + a).powi(2) + b * b) / s
        })
        .sum()
}

/// Sampled `P[Σ |√ξ_n + w_n|²/s_n ≤ a]` with its hit count; chunks of 1e6
/// draws run in parallel with per-chunk streams.
pub fn mc_cdf(s: &[f64], xi: &[f64], a: f64, draws: u64, seed: u64) -> (f64, u64) {
    const CHUNK: u64 = 1_000_000;
    let hits: u64 = (0..draws.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c);
            let count = CHUNK.min(draws - c * CHUNK);
            (0..count).filter(|_| chi_sum(&mut rng, s, xi) <= a).count() as u64
        })
        .sum();
    (hits as f64 / draws as f64, hits)
}
