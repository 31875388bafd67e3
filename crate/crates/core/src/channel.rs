//! FTN Gram matrix, its eigen-decomposition and the resulting parallel channel.

use crate::error::{invalid, Error, Result};
use crate::pulse::{autocorrelation_at, Pulse};
use crate::quad::integrate_adaptive;
use nalgebra::{DMatrix, SymmetricEigen};

/// Diagonalized FTN channel: `N` parallel Gaussian channels with
/// `σ_n² = (ρ (Ω/N) λ_n)⁻¹`.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    pub omega: f64,
    pub rho: f64,
    pub n: usize,
    pub tau: f64,
    /// Descending Gram eigenvalues.
    pub eigenvalues: Vec<f64>,
    pub noise_vars: Vec<f64>,
    /// Columns ordered like `eigenvalues`.
    pub eigvectors: Option<DMatrix<f64>>,
    /// Autocorrelation taps `h_0 .. h_{N-1}`.
    pub taps: Vec<f64>,
}

impl ChannelModel {
    /// Channel model from explicit Gram eigenvalues.
    pub fn from_eigenvalues(omega: f64, rho: f64, tau: f64, eigenvalues: Vec<f64>) -> Self {
        let n = eigenvalues.len();
        let noise_vars = eigenvalues.iter().map(|l| 1.0 / (rho * omega / n as f64 * l)).collect();
        ChannelModel { omega, rho, n, tau, eigenvalues, noise_vars, eigvectors: None, taps: Vec::new() }
    }

    /// `N` orthogonal channels sharing the power equally.
    pub fn flat(omega: f64, rho: f64, n: usize) -> Self {
        Self::from_eigenvalues(omega, rho, 1.0, vec![1.0; n])
    }

    /// Per-channel SNR `1/σ_n²`.
    pub fn snrs(&self) -> Vec<f64> {
        self.noise_vars.iter().map(|s| 1.0 / s).collect()
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau <= 1.0 {
        Ok(())
    } else {
        Err(invalid("tau", format!("must lie in (0, 1], got {tau}")))
    }
}

/// Symbols fitting in a TBP `Ω` with an RRC-type pulse of TBP `c`:
/// `floor((Ω - c)/(τ(1+β)) + 1)`.
pub fn symbol_count(omega: f64, c: f64, tau: f64, beta: f64) -> Result<usize> {
    if omega <= c {
        return Err(Error::PulseExceedsWindow { omega, c });
    }
    check_tau(tau)?;
    // tolerance for windows that fit an exact number of steps
    Ok(((omega - c) / (tau * (1.0 + beta)) + 1.0 + 1e-9).floor() as usize)
}

/// Symbol count for any time-limited pulse: `floor((T_x - T_p)/(τT) + 1)` with
/// `T_x = Ω/(2W)`.
pub fn symbol_count_for_pulse(p: &Pulse, omega: f64, tau: f64) -> Result<usize> {
    let tp = p.width.ok_or(Error::NeedsBlocklength)?;
    let c = 2.0 * p.bandwidth * tp;
    if omega <= c {
        return Err(Error::PulseExceedsWindow { omega, c });
    }
    check_tau(tau)?;
    let tx = omega / (2.0 * p.bandwidth);
    Ok(((tx - tp) / (tau * p.symbol_time) + 1.0 + 1e-9).floor() as usize)
}

/// Autocorrelation taps `h_0 .. h_{n-1}` at spacing `τT`.
pub fn gram_taps(p: &Pulse, tau: f64, n: usize) -> Vec<f64> {
    let step = tau * p.symbol_time;
    let mut taps = Vec::with_capacity(n);
    for k in 0..n {
        let d = k as f64 * step;
        if p.width.is_some_and(|tp| d >= tp) {
            taps.resize(n, 0.0);
            break;
        }
        taps.push(autocorrelation_at(p, d));
    }
    taps
}

/// Symmetric Toeplitz matrix `H[i][j] = h_{|i-j|}`.
pub fn toeplitz(taps: &[f64]) -> DMatrix<f64> {
    let n = taps.len();
    DMatrix::from_fn(n, n, |i, j| taps[i.abs_diff(j)])
}

pub fn build_gram(p: &Pulse, tau: f64, n: usize) -> DMatrix<f64> {
    toeplitz(&gram_taps(p, tau, n))
}

/// Eigen-decomposition `H = U Λ Uᵀ` with descending eigenvalues, checked for
/// orthogonality and reconstruction.
pub fn diagonalize(h: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = h.nrows();
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let u = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    check_positive(&values)?;

    let gram = u.transpose() * &u;
    let orth = (gram - DMatrix::<f64>::identity(n, n)).amax();
    if orth > 1e-9 {
        return Err(Error::EigenCheck(format!("eigenvectors deviate from orthonormal by {orth:e}")));
    }
    let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(values.clone()));
    let recon = (&u * lam * u.transpose() - h).amax();
    if recon > 1e-8 {
        return Err(Error::EigenCheck(format!("reconstruction error {recon:e}")));
    }
    Ok((values, u))
}

/// Descending eigenvalues only.
pub fn eigenvalues(h: &DMatrix<f64>) -> Result<Vec<f64>> {
    let mut v: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    check_positive(&v)?;
    Ok(v)
}

fn check_positive(values: &[f64]) -> Result<()> {
    let min = values.last().copied().unwrap_or(1.0);
    if !(min > 1e-12) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok(())
}

fn check_trace(values: &[f64], taps: &[f64]) -> Result<()> {
    let n = values.len() as f64;
    let expect = n * taps[0];
    let trace: f64 = values.iter().sum();
    if (trace - expect).abs() > 1e-6 * n {
        return Err(Error::EigenCheck(format!("eigenvalue sum {trace} differs from trace {expect}")));
    }
    Ok(())
}

/// Folded-spectrum approximation of the Gram eigenvalues, descending.
pub fn folded_spectrum_eigs(p: &Pulse, tau: f64, n: usize) -> Vec<f64> {
    let folded = FoldedSpectrum::new(p, tau);
    let step = tau * p.symbol_time;
    let mut out: Vec<f64> = (0..n).map(|k| folded.eval(k as f64 / (n as f64 * step)) / step).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// `Σ_k |p̂(f - k/(τT))|²`.
///
/// Time-limited pulses use the equivalent autocorrelation (Poisson) form
/// `τT (h_0 + 2 Σ_m h_m cos(2π f m τT))`; band-limited pulses sum the shifted
/// energy spectra directly.
pub struct FoldedSpectrum<'a> {
    pulse: &'a Pulse,
    step: f64,
    taps: Option<Vec<f64>>,
}

impl<'a> FoldedSpectrum<'a> {
    pub fn new(pulse: &'a Pulse, tau: f64) -> Self {
        let step = tau * pulse.symbol_time;
        let taps = pulse.width.map(|tp| {
            let lags = (tp / step).ceil() as usize + 1;
            gram_taps(pulse, tau, lags)
        });
        FoldedSpectrum { pulse, step, taps }
    }

    pub fn eval(&self, f: f64) -> f64 {
        match &self.taps {
            Some(taps) => {
                let w = 2.0 * std::f64::consts::PI * f * self.step;
                let s: f64 = taps[1..].iter().enumerate().map(|(m, h)| h * (w * (m + 1) as f64).cos()).sum();
                self.step * (taps[0] + 2.0 * s)
            }
            None => {
                let edge = self.pulse.band_edge().expect("band-limited pulses report a band edge");
                let period = 1.0 / self.step;
                let kmax = ((edge + f.abs()) / period).ceil() as i64 + 1;
                (-kmax..=kmax)
                    .map(|k| self.pulse.energy_spectrum(f - k as f64 * period))
                    .filter(|v| v.sqrt() >= 1e-8)
                    .sum()
            }
        }
    }
}

/// Channel model for a time-limited pulse: symbol count, Gram matrix,
/// eigenvalues and noise variances.
pub fn make_channel(p: &Pulse, omega: f64, rho: f64, tau: f64) -> Result<ChannelModel> {
    let n = symbol_count_for_pulse(p, omega, tau)?;
    make_channel_with_n(p, omega, rho, tau, n, false)
}

/// Channel model with an explicit symbol count (required for band-limited
/// pulses), optionally keeping the eigenvectors.
pub fn make_channel_with_n(p: &Pulse, omega: f64, rho: f64, tau: f64, n: usize, vectors: bool) -> Result<ChannelModel> {
    check_tau(tau)?;
    if n == 0 {
        return Err(invalid("N", "at least one symbol is required"));
    }
    if !(rho > 0.0) {
        return Err(invalid("rho", format!("SNR must be positive, got {rho}")));
    }
    let taps = gram_taps(p, tau, n);
    let h = toeplitz(&taps);
    let (values, u) = if vectors {
        let (v, u) = diagonalize(&h)?;
        (v, Some(u))
    } else {
        (eigenvalues(&h)?, None)
    };
    check_trace(&values, &taps)?;
    let mut ch = ChannelModel::from_eigenvalues(omega, rho, tau, values);
    ch.eigvectors = u;
    ch.taps = taps;
    Ok(ch)
}

/// Largest `N` whose block of `N` pulses spaced `τT` keeps at most `eps_t` of
/// its energy outside an interval of length `t_x` centered on the block.
pub fn ooi_max_blocklength(p: &Pulse, tau: f64, t_x: f64, eps_t: f64) -> Result<usize> {
    check_tau(tau)?;
    if !(eps_t > 0.0 && eps_t < 1.0) {
        return Err(invalid("eps_T", format!("must lie in (0, 1), got {eps_t}")));
    }
    let step = tau * p.symbol_time;
    let cap = (t_x / step).floor() as usize + 1;
    let energy_in = |a: f64, b: f64| integrate_adaptive(|t| p.eval(t).powi(2), a, b, 1e-10);
    let mut best = 0;
    for n in 1..=cap {
        let mid = 0.5 * (n - 1) as f64 * step;
        let (a, b) = (mid - 0.5 * t_x, mid + 0.5 * t_x);
        let inside: f64 = (0..n).map(|k| energy_in(a - k as f64 * step, b - k as f64 * step)).sum();
        if 1.0 - inside / n as f64 <= eps_t {
            best = n;
        } else {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{make_rrc_default, make_sinc};

    #[test]
    fn symbol_counts_from_design_example() {
        assert_eq!(symbol_count(132.0, 8.57, 1.0, 1.0).unwrap(), 62);
        assert_eq!(symbol_count(132.0, 8.57, 0.4859, 1.0).unwrap(), 128);
        assert_eq!(symbol_count(8.57 + 0.3 * 1.5, 8.57, 0.3, 0.5).unwrap(), 2);
        assert!(matches!(symbol_count(5.0, 8.0, 1.0, 0.5), Err(Error::PulseExceedsWindow { .. })));
    }

    #[test]
    fn pulse_count_agrees_with_rrc_formula() {
        let p = make_rrc_default(1.0, 0.5, 8.57).unwrap();
        for tau in [1.0, 0.7, 0.4859] {
            assert_eq!(symbol_count_for_pulse(&p, 132.0, tau).unwrap(), symbol_count(132.0, 8.57, tau, 1.0).unwrap());
        }
    }

    #[test]
    fn tridiagonal_spectrum() {
        let h1 = 0.3;
        let (v, _) = diagonalize(&toeplitz(&[1.0, h1, 0.0])).unwrap();
        let mut expect: Vec<f64> = (1..=3).map(|k| 1.0 + 2.0 * h1 * (k as f64 * std::f64::consts::PI / 4.0).cos()).collect();
        expect.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in v.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_gram_is_rejected() {
        let h = toeplitz(&[1.0, 1.0]);
        assert!(matches!(diagonalize(&h), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn sinc_at_nyquist_is_identity() {
        let p = make_sinc(0.5).unwrap();
        let ch = make_channel_with_n(&p, 16.0, 10.0, 1.0, 16, true).unwrap();
        assert!(ch.eigenvalues.iter().all(|l| (l - 1.0).abs() < 1e-9));
        for s in ch.snrs() {
            assert!((s / 10.0 - 1.0).abs() < 1e-9);
        }
        assert!(folded_spectrum_eigs(&p, 1.0, 8).iter().all(|l| (l - 1.0).abs() < 1e-12));
    }
}
