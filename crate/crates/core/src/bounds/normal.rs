use crate::channel::ChannelModel;
use crate::error::{invalid, Result};
use crate::special::{q, q_inv};
use std::f64::consts::LOG2_E;

/// Complex channel (the default) or the real-valued halving rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateVariant {
    #[default]
    Complex,
    Real,
}

impl RateVariant {
    fn factor(self) -> f64 {
        match self {
            RateVariant::Complex => 1.0,
            RateVariant::Real => 0.5,
        }
    }
}

/// Per-channel mean and variance (nats) of the mismatched information density.
pub fn moments_mismatched(sigma_sq: f64) -> (f64, f64) {
    let snr = 1.0 / sigma_sq;
    (snr.ln_1p(), 1.0 - (1.0 + snr).powi(-2))
}

/// `C_NA = (1/Ω) Σ log₂(1 + 1/σ_n²)`.
pub fn c_na(noise_vars: &[f64], omega: f64) -> f64 {
    noise_vars.iter().map(|s| (1.0 / s).ln_1p()).sum::<f64>() * LOG2_E / omega
}

/// `V_NA = (1/Ω) Σ (1 - (1 + 1/σ_n²)⁻²)`.
pub fn v_na(noise_vars: &[f64], omega: f64) -> f64 {
    noise_vars.iter().map(|&s| moments_mismatched(s).1).sum::<f64>() / omega
}

fn terms(noise_vars: &[f64], omega: f64, variant: RateVariant) -> (f64, f64, f64) {
    let f = variant.factor();
    let c = f * c_na(noise_vars, omega);
    let spread = (f * v_na(noise_vars, omega) / omega).sqrt() * LOG2_E;
    (c, spread, omega.log2() / (2.0 * omega))
}

fn check_pe(pe: f64) -> Result<()> {
    if pe > 0.0 && pe < 1.0 {
        Ok(())
    } else {
        Err(invalid("Pe", format!("must lie in (0, 1), got {pe}")))
    }
}

/// Normal approximation of the maximal rate from explicit noise variances.
pub fn na_rate_from(noise_vars: &[f64], omega: f64, pe: f64, variant: RateVariant) -> Result<f64> {
    check_pe(pe)?;
    let (c, spread, corr) = terms(noise_vars, omega, variant);
    Ok(c - spread * q_inv(pe) + corr)
}

/// BLER predicted by the normal approximation at rate `r`.
pub fn na_bler_from(noise_vars: &[f64], omega: f64, r: f64, variant: RateVariant) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid("R", format!("rate must be positive, got {r}")));
    }
    let (c, spread, corr) = terms(noise_vars, omega, variant);
    let margin = c - r + corr;
    if spread == 0.0 {
        return Ok(if margin > 0.0 { 0.0 } else if margin == 0.0 { 0.5 } else { 1.0 });
    }
    Ok(q(margin / spread))
}

pub fn na_rate(ch: &ChannelModel, pe: f64) -> Result<f64> {
    na_rate_from(&ch.noise_vars, ch.omega, pe, RateVariant::Complex)
}

pub fn na_bler(ch: &ChannelModel, r: f64) -> Result<f64> {
    na_bler_from(&ch.noise_vars, ch.omega, r, RateVariant::Complex)
}
