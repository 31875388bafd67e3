//! FTN system design: the dimension-filling acceleration factor, rate gains
//! over Nyquist signaling, and constrained Fourier-series pulse design.

use crate::bounds::{c_na, na_rate};
use crate::channel::{make_channel, make_channel_with_n};
use crate::error::{invalid, Error, Result};
use crate::optim::multistart;
use crate::pswf::max_dimensions;
use crate::pulse::{fs_autocorrelation, make_fs_pulse, normalize_fs, oob_energy, Pulse};
use rayon::prelude::*;

/// `τ* = ((Ω - c)/(Ω - η - 1)) / (1 + β)`: the largest acceleration factor
/// that fits `N* = Ω - η` symbols in the window.
pub fn tau_star(omega: f64, c: f64, eta: f64, beta: f64) -> Result<f64> {
    if !(omega > c && omega > eta + 1.0) {
        return Err(invalid("omega", format!("Ω = {omega} must exceed both c = {c} and η + 1 = {}", eta + 1.0)));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidRollOff(beta));
    }
    Ok((omega - c) / (omega - eta - 1.0) / (1.0 + beta))
}

/// `τ*` with `η` taken from the PSWF dimension count at `(Ω, ε_W)`.
pub fn tau_star_for(omega: f64, c: f64, beta: f64, eps_w: f64) -> Result<f64> {
    let (_, eta) = max_dimensions(omega, eps_w)?;
    tau_star(omega, c, eta, beta)
}

/// Percentage gain of the normal-approximation rate at `tau` over `τ = 1`.
pub fn percent_gain(p: &Pulse, omega: f64, rho: f64, pe: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(invalid("tau", format!("must lie in (0, 1], got {tau}")));
    }
    let base = na_rate(&make_channel(p, omega, rho, 1.0)?, pe)?;
    let r = na_rate(&make_channel(p, omega, rho, tau)?, pe)?;
    Ok(100.0 * (r - base) / base)
}

/// Inputs of the Fourier-series pulse design problem.
#[derive(Debug, Clone, PartialEq)]
pub struct FsDesignSpec {
    pub omega: f64,
    pub eps_w: f64,
    pub rho: f64,
    /// Bound on `max_n |h_n|` at the Nyquist rate.
    pub k0: f64,
    pub w: f64,
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: u64,
}

impl FsDesignSpec {
    pub fn new(omega: f64, eps_w: f64, rho: f64, k0: f64, w: f64) -> Self {
        FsDesignSpec { omega, eps_w, rho, k0, w, restarts: 20, seed: 1, max_iters: 4000 }
    }

    /// Published design point: `ε_W = 1e-4`, 20 dB, `K_0 = 0.1`, `W = 0.5`.
    pub fn table_one(omega: f64) -> Self {
        Self::new(omega, 1e-4, 100.0, 0.1, 0.5)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) {
            return Err(invalid("omega", "must be positive"));
        }
        if !(self.eps_w > 0.0 && self.eps_w <= 1.0) {
            return Err(invalid("eps_W", format!("must lie in (0, 1], got {}", self.eps_w)));
        }
        if !(self.rho > 0.0) {
            return Err(invalid("rho", "must be positive"));
        }
        if !(self.k0 > 0.0) {
            return Err(invalid("K_0", "must be positive"));
        }
        if !(self.w > 0.0) {
            return Err(invalid("W", "must be positive"));
        }
        if self.restarts == 0 {
            return Err(invalid("restarts", "at least one run is required"));
        }
        Ok(())
    }

    /// Harmonic count `ceil(W T_p) + 2`.
    pub fn harmonics(&self, tp: f64) -> usize {
        (self.w * tp - 1e-9).ceil() as usize + 2
    }

    /// Pulse widths `T_p ∈ {1, 1.5, …, 20}/(2W)`, capped at `T_x = Ω/(2W)`.
    /// The first point is dropped: it leaves no room for `T ∈ [1/(2W), T_p)`.
    pub fn tp_grid(&self) -> Vec<f64> {
        let tx = self.omega / (2.0 * self.w);
        (3..=40).map(|k| 0.5 * k as f64 / (2.0 * self.w)).take_while(|&tp| tp <= tx + 1e-12).collect()
    }
}

/// An evaluated Fourier-series design.
#[derive(Debug, Clone, PartialEq)]
pub struct FsDesign {
    /// Pulse TBP `2 W T_p`.
    pub c: f64,
    pub tp: f64,
    pub t_sym: f64,
    /// Unit-energy coefficients `c_0, c_1, …`.
    pub coeffs: Vec<f64>,
    pub n: usize,
    pub c_na: f64,
    pub oob: f64,
    pub max_isi: f64,
    pub energy: f64,
}

impl FsDesign {
    pub fn pulse(&self, w: f64) -> Result<Pulse> {
        make_fs_pulse(&self.coeffs, self.tp, self.t_sym, w)
    }

    pub fn feasible(&self, spec: &FsDesignSpec, tol: f64) -> bool {
        (self.energy - 1.0).abs() <= tol
            && (self.oob - spec.eps_w) / spec.eps_w <= tol
            && (self.max_isi - spec.k0) / spec.k0 <= tol
    }

    /// `c,T,c_0,|c_1|,…` with the magnitudes as published.
    pub fn csv_row(&self) -> String {
        let mut fields = vec![format!("{}", self.c), format!("{:.6}", self.t_sym), format!("{:.6}", self.coeffs[0])];
        fields.extend(self.coeffs[1..].iter().map(|v| format!("{:.6}", v.abs())));
        fields.join(",")
    }
}

pub const FS_CSV_HEADER: &str = "c,T,c_0,c_k";

/// Published optimized coefficients at `W = 0.5`: `(c, T, c_0, |c_k|)`.
pub const TABLE_ONE: [(f64, f64, f64, &[f64]); 3] = [
    (4.0, 2.2692, 0.4106, &[0.2017, 0.0063, 0.0002]),
    (6.0, 1.6923, 0.1931, &[0.2202, 0.1271, 0.0079, 0.0004]),
    (10.0, 1.2154, 0.1068, &[0.1136, 0.0934, 0.1245, 0.0846, 0.0047, 0.0005]),
];

/// Raw published coefficients for the row with pulse TBP `c`.
pub fn table_one_row(c: f64) -> Option<(f64, Vec<f64>)> {
    TABLE_ONE.iter().find(|r| (r.0 - c).abs() < 1e-9).map(|&(_, t, c0, ck)| {
        let mut v = vec![c0];
        v.extend_from_slice(ck);
        (t, v)
    })
}

/// Evaluates energy, OOB, Nyquist-rate ISI and `C_NA` of the design
/// `(coeffs, T_p, T)` under `spec`. The coefficients are normalized first;
/// `energy` reports the value before normalization.
pub fn evaluate_fs(spec: &FsDesignSpec, coeffs: &[f64], tp: f64, t_sym: f64) -> Result<FsDesign> {
    let energy = crate::pulse::fs_energy(coeffs, tp);
    if !(energy > 0.0) {
        return Err(invalid("coeffs", "zero pulse energy"));
    }
    let unit = normalize_fs(coeffs, tp);
    let p = make_fs_pulse(&unit, tp, t_sym, spec.w)?;
    let oob = oob_energy(&p, spec.w);
    let lags = (tp / t_sym).floor() as usize;
    let max_isi = (1..=lags).map(|n| fs_autocorrelation(&unit, tp, n as f64 * t_sym).abs()).fold(0.0, f64::max);
    let tx = spec.omega / (2.0 * spec.w);
    if tp > tx + 1e-12 {
        return Err(Error::PulseExceedsWindow { omega: spec.omega, c: 2.0 * spec.w * tp });
    }
    let n = ((tx - tp) / t_sym + 1.0 + 1e-9).floor() as usize;
    let ch = make_channel_with_n(&p, spec.omega, spec.rho, 1.0, n, false)?;
    Ok(FsDesign {
        c: 2.0 * spec.w * tp,
        tp,
        t_sym,
        coeffs: unit,
        n,
        c_na: c_na(&ch.noise_vars, spec.omega),
        oob,
        max_isi,
        energy,
    })
}

const PENALTY: f64 = 1e4;

fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

/// Best design at a single pulse width `T_p`: maximizes `C_NA` over the
/// coefficients and `T ∈ [1/(2W), T_p)` with L1 penalties on the relative
/// OOB and ISI violations.
pub fn optimize_fs_at(spec: &FsDesignSpec, tp: f64) -> Result<FsDesign> {
    spec.validate()?;
    let t_min = 1.0 / (2.0 * spec.w);
    if !(tp > t_min) {
        return Err(invalid("T_p", format!("must exceed 1/(2W) = {t_min}")));
    }
    let m = spec.harmonics(tp);
    let t_of = |u: f64| t_min + (tp - t_min) * logistic(u);
    let objective = |x: &[f64]| -> f64 {
        match evaluate_fs(spec, &x[..m], tp, t_of(x[m])) {
            Ok(d) => {
                let v_oob = (d.oob / spec.eps_w - 1.0).max(0.0);
                let v_isi = (d.max_isi / spec.k0 - 1.0).max(0.0);
                -d.c_na + PENALTY * (v_oob + v_isi)
            }
            Err(_) => f64::INFINITY,
        }
    };
    // triangular spectrum samples across the band, T at mid-range
    let edge = spec.w * tp + 1.0;
    let mut x0: Vec<f64> = (0..m).map(|k| (1.0 - k as f64 / edge).max(0.05)).collect();
    x0.push(0.0);
    let mut spread = vec![0.5; m];
    spread.push(4.0);
    let best = multistart(&objective, &x0, &spread, spec.restarts, spec.seed, spec.max_iters)?;
    let unit = normalize_fs(&best.x[..m], tp);
    let d = evaluate_fs(spec, &unit, tp, t_of(best.x[m]))?;
    if !d.feasible(spec, 1e-6) {
        return Err(Error::Infeasible(format!(
            "T_p = {tp}: OOB {:.6e} (target {:.1e}), max ISI {:.4} (target {}), C_NA {}",
            d.oob, spec.eps_w, d.max_isi, spec.k0, d.c_na
        )));
    }
    Ok(d)
}

/// Best design over the `T_p` grid; infeasible widths are skipped and ties
/// keep the narrower pulse.
pub fn optimize_fs_pulse(spec: &FsDesignSpec) -> Result<FsDesign> {
    spec.validate()?;
    let grid = spec.tp_grid();
    let rows: Vec<Result<FsDesign>> = grid.par_iter().map(|&tp| optimize_fs_at(spec, tp)).collect();
    let mut best: Option<FsDesign> = None;
    let mut last_err = None;
    for r in rows {
        match r {
            Ok(d) => {
                if best.as_ref().is_none_or(|b| d.c_na > b.c_na) {
                    best = Some(d);
                }
            }
            Err(e) => {
                log::debug!("skipping pulse width: {e}");
                last_err = Some(e);
            }
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| Error::Infeasible("empty pulse-width grid".into())))
}
