//! Fast invariant suite behind the `selftest` subcommand.

use crate::config::{ExperimentConfig, ExperimentId, RawConfig};
use crate::oracles::{brute_force_map, mc_cdf, random_isi_case};
use crate::runner::{run, RunOptions, CHECKPOINT_INTERVAL};
use ftn_tbp::bounds::{na_bler_from, na_rate_from, saddlepoint_log_cdf, RateVariant, RcuSampler};
use ftn_tbp::channel::{build_gram, diagonalize, eigenvalues, make_channel, symbol_count, ChannelModel};
use ftn_tbp::design::tau_star_for;
use ftn_tbp::pswf::solve_basis;
use ftn_tbp::pulse::{make_rrc_default, make_sinc};
use ftn_tbp::special::{q, q_inv};
use ftn_tbp::turbo::{has_spread, map_equalize, s_random_interleaver, CodingConfig, LlrRole, LlrVector, TurboLink};
use nalgebra::{DMatrix, DVector};
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lib<T>(r: ftn_tbp::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn gram_trace(inject_fault: bool) -> Outcome {
    let p = lib(make_rrc_default(1.0, 0.5, 8.57))?;
    let mut lam = lib(eigenvalues(&build_gram(&p, 0.4859, 128)))?;
    if inject_fault {
        lam[0] += 0.5;
    }
    let trace: f64 = lam.iter().sum();
    ensure((trace - 128.0).abs() <= 1e-6 * 128.0, format!("sum of 128 eigenvalues = {trace:.12}"))
}

fn eigen_reconstruction() -> Outcome {
    let p = lib(make_rrc_default(0.5, 0.5, 10.52))?;
    let h = build_gram(&p, 0.5, 64);
    let (lam, u) = lib(diagonalize(&h))?;
    let recon = (&u * DMatrix::from_diagonal(&DVector::from_vec(lam)) * u.transpose() - &h).amax();
    let orth = (u.transpose() * &u - DMatrix::<f64>::identity(64, 64)).amax();
    ensure(recon <= 1e-8 && orth <= 1e-9, format!("reconstruction {recon:.1e}, orthogonality {orth:.1e}"))
}

fn total_snr() -> Outcome {
    let p = lib(make_rrc_default(1.0, 0.5, 8.57))?;
    let ch = lib(make_channel(&p, 132.0, 1000.0, 0.4859))?;
    let total: f64 = ch.snrs().iter().sum();
    let rel = (total / (1000.0 * 132.0) - 1.0).abs();
    ensure(rel <= 1e-6, format!("sum of channel SNRs / (rho Omega) - 1 = {rel:.1e}"))
}

fn sinc_identity() -> Outcome {
    let p = lib(make_sinc(0.5))?;
    let dev = (build_gram(&p, 1.0, 16) - DMatrix::<f64>::identity(16, 16)).amax();
    ensure(dev <= 1e-9, format!("max |H - I| = {dev:.1e}"))
}

fn na_round_trip() -> Outcome {
    let sigma: Vec<f64> = (1..=40).map(|k| 0.01 * k as f64).collect();
    let mut worst: f64 = 0.0;
    for pe in [1e-1, 1e-3, 1e-5] {
        let r = lib(na_rate_from(&sigma, 50.0, pe, RateVariant::Complex))?;
        let back = lib(na_bler_from(&sigma, 50.0, r, RateVariant::Complex))?;
        worst = worst.max((back - pe).abs());
    }
    ensure(worst <= 1e-12, format!("max |Pe - na_bler(na_rate(Pe))| = {worst:.1e}"))
}

fn q_round_trip() -> Outcome {
    let worst = [1e-9, 1e-6, 1e-3, 0.1, 0.5, 0.9].iter().map(|&p| (q(q_inv(p)) / p - 1.0).abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-12, format!("max relative error {worst:.1e}"))
}

fn saddlepoint_vs_sampling() -> Outcome {
    let s = [0.5, 1.0, 2.0, 4.0];
    let xi: Vec<f64> = s.iter().map(|v| 1.0 + v).collect();
    let mean: f64 = s.iter().zip(&xi).map(|(s, x)| (1.0 + x) / s).sum();
    let a = 0.6 * mean;
    let sp = lib(saddlepoint_log_cdf(&s, &xi, a))?;
    let (p, _) = mc_cdf(&s, &xi, a, 2_000_000, 17);
    let gap = sp - p.ln();
    ensure(gap.abs() <= 0.15, format!("saddlepoint {sp:.4} vs sampled {:.4} nats", p.ln()))
}

fn interleaver_spread() -> Outcome {
    let il = s_random_interleaver(256, 0x5eed);
    let mut sorted = il.perm.clone();
    sorted.sort_unstable();
    let perm = sorted == (0..256).collect::<Vec<_>>();
    ensure(perm && il.spread == 11 && has_spread(&il.perm, 11), format!("l = 256, S = {}", il.spread))
}

fn map_vs_brute_force() -> Outcome {
    let mut worst: f64 = 0.0;
    for (k, taps) in [vec![1.0, 0.45], vec![1.0, 0.5, -0.15]].iter().enumerate() {
        let (y, la) = random_isi_case(4, taps, 0.4, 31 + k as u64);
        let ours = lib(map_equalize(&y, taps, 0.8, &LlrVector::new(la.clone(), LlrRole::APriori)))?;
        let oracle = brute_force_map(&y, taps, 0.8, &la);
        worst = ours.values.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    ensure(worst <= 1e-6, format!("N = 4, L = 1..2: max LLR gap {worst:.1e}"))
}

fn noiseless_link() -> Outcome {
    let link = lib(TurboLink::new(CodingConfig { i_out: 10, early_stop: true, ..CodingConfig::default() }))?;
    let errors = (0..4).map(|b| link.simulate_block(1e6, 3, b).map(|r| u32::from(r.0))).sum::<ftn_tbp::Result<u32>>();
    let errors = lib(errors)?;
    ensure(errors == 0, format!("{errors} of 4 frames wrong at 60 dB"))
}

fn tau_star_design() -> Outcome {
    let t = lib(tau_star_for(132.0, 8.57, 1.0, 1e-4))?;
    let n1 = lib(symbol_count(132.0, 8.57, 1.0, 1.0))?;
    let nt = lib(symbol_count(132.0, 8.57, t, 1.0))?;
    ensure((t - 0.4859).abs() <= 5e-4 && n1 == 62 && nt == 128, format!("tau* = {t:.4}, N = {n1} / {nt}"))
}

fn pswf_trace() -> Outcome {
    let b = lib(solve_basis(10.0, 92, 216))?;
    let trace: f64 = b.eigenvalues.iter().sum();
    let bounded = b.eigenvalues.iter().all(|&m| m > 0.0 && m <= 1.0);
    ensure((trace - 10.0).abs() < 1e-3 && bounded, format!("sum of concentrations at Omega = 10: {trace:.6}"))
}

fn sampler_determinism() -> Outcome {
    let sigma = [0.2, 0.5, 1.0, 3.0];
    let draw = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("pool");
        pool.install(|| RcuSampler::new(&sigma, 4.0, 300_000, 11).map(|s| s.log_pairwise().to_vec()))
    };
    let (a, b) = (lib(draw(1))?, lib(draw(3))?);
    let same = a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits());
    ensure(same, "RCU draws with 1 and 3 threads".into())
}

fn artifact_determinism() -> Outcome {
    let base = std::env::temp_dir().join(format!("ftn-tbp-selftest-{}", std::process::id()));
    let raw = RawConfig {
        experiment: Some(ExperimentId::Custom),
        omega: Some(vec![30.0, 60.0]),
        rho_db: Some(vec![10.0]),
        tau: Some(vec![0.6, 1.0]),
        beta: Some(vec![1.0]),
        c: Some(vec![8.57]),
        ..Default::default()
    };
    let mut bytes = Vec::new();
    for (k, workers) in [1, 3].into_iter().enumerate() {
        let mut cfg = ExperimentConfig::resolve(raw.clone()).map_err(|e| e.to_string())?;
        cfg.workers = workers;
        let opts = RunOptions { out_dir: base.join(k.to_string()), resume: false, checkpoint_interval: CHECKPOINT_INTERVAL };
        let art = run(&cfg, &opts).map_err(|e| e.to_string())?;
        bytes.push(std::fs::read(art.csv).map_err(|e| e.to_string())?);
    }
    let _ = std::fs::remove_dir_all(&base);
    ensure(bytes[0] == bytes[1] && !bytes[0].is_empty(), format!("custom CSV, 1 vs 3 workers, {} bytes", bytes[0].len()))
}

fn flat_channel_capacity() -> Outcome {
    let ch = ChannelModel::flat(100.0, 10.0, 100);
    let c = ftn_tbp::bounds::c_na(&ch.noise_vars, ch.omega);
    let want = 11f64.log2();
    ensure((c - want).abs() <= 1e-12, format!("C_NA = {c:.12} vs log2(11)"))
}

/// Runs every check; `inject_fault` corrupts one Gram eigenvalue before the
/// trace check.
pub fn run_checks(inject_fault: bool) -> Vec<Check> {
    let checks: Vec<(&'static str, Box<dyn Fn() -> Outcome>)> = vec![
        ("gram-trace", Box::new(move || gram_trace(inject_fault))),
        ("eigen-reconstruction", Box::new(eigen_reconstruction)),
        ("total-snr", Box::new(total_snr)),
        ("sinc-nyquist-identity", Box::new(sinc_identity)),
        ("na-round-trip", Box::new(na_round_trip)),
        ("q-inverse", Box::new(q_round_trip)),
        ("flat-channel-capacity", Box::new(flat_channel_capacity)),
        ("saddlepoint-vs-sampling", Box::new(saddlepoint_vs_sampling)),
        ("pswf-trace", Box::new(pswf_trace)),
        ("tau-star", Box::new(tau_star_design)),
        ("interleaver-spread", Box::new(interleaver_spread)),
        ("map-vs-brute-force", Box::new(map_vs_brute_force)),
        ("noiseless-link", Box::new(noiseless_link)),
        ("sampler-determinism", Box::new(sampler_determinism)),
        ("artifact-determinism", Box::new(artifact_determinism)),
    ];
    checks
        .into_iter()
        .map(|(name, f)| {
            let t = Instant::now();
            let (passed, detail) = match f() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            Check { name, passed, detail, seconds: t.elapsed().as_secs_f64() }
        })
        .collect()
}
