use super::saddlepoint::{log_cdf_any, saddlepoint_lower, upper_tail_level};
use super::{BoundResult, Diagnostics, Method};
use crate::channel::ChannelModel;
use crate::error::{invalid, Error, Result};
use std::f64::consts::LN_2;

/// Meta-converse upper bound on the rate at BLER `pe`, from explicit noise
/// variances.
///
/// The threshold solves `P[Σ V_n/(1+σ_n²) > Nλ] = Pe` with
/// `V_n ~ X²(1, σ_n²)` through the upper-tail saddlepoint; the rate is
/// `-(1/Ω) log₂ P[Σ U_n/σ_n² < Nλ]` with `U_n ~ X²(1, 1+σ_n²)`.
pub fn mc_bound_from(noise_vars: &[f64], omega: f64, pe: f64) -> Result<BoundResult> {
    if !(pe > 0.0 && pe < 0.5) {
        return Err(invalid("Pe", format!("must lie in (0, 0.5), got {pe}")));
    }
    if noise_vars.is_empty() {
        return Err(invalid("sigma_sq", "at least one channel is required"));
    }
    let s_v: Vec<f64> = noise_vars.iter().map(|s| 1.0 + s).collect();
    let (_, level) = upper_tail_level(&s_v, noise_vars, pe.ln()).ok_or(Error::ThresholdNotFound { pe })?;

    let xi_u = s_v;
    let log_p = log_cdf_any(noise_vars, &xi_u, level)?;
    let t_hat = saddlepoint_lower(noise_vars, &xi_u, level).map(|r| r.t_hat).ok();
    Ok(BoundResult {
        method: Method::Mc,
        rate_bps_hz: Some(-log_p / (omega * LN_2)),
        bler: Some(pe),
        diagnostics: Diagnostics {
            t_hat,
            lambda_threshold: Some(level / noise_vars.len() as f64),
            ..Default::default()
        },
    })
}

pub fn mc_bound(ch: &ChannelModel, pe: f64) -> Result<BoundResult> {
    mc_bound_from(&ch.noise_vars, ch.omega, pe)
}

pub fn mc_rate(ch: &ChannelModel, pe: f64) -> Result<f64> {
    Ok(mc_bound(ch, pe)?.rate_bps_hz.expect("rate is the query target"))
}
