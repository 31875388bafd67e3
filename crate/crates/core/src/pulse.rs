//! Base pulses: construction, spectra, out-of-band energy and autocorrelation.

use crate::error::{invalid, Error, Result};
use crate::pswf::{required_quad_points, solve_basis, PswfBasis};
use crate::quad::{integrate_adaptive, CompositeRule};
use crate::special::{q_inv, sinc};
use std::f64::consts::{FRAC_1_PI, PI};
use std::sync::Arc;

/// Default number of grid intervals per Nyquist symbol time.
pub const DEFAULT_STEPS_PER_SYMBOL: f64 = 256.0;
/// Upper end of the pulse-width search in [`min_c`] and [`make_gaussian`].
pub const MAX_C: f64 = 200.0;
const C_GRID: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseKind {
    Rrc,
    Gaussian,
    FourierSeries,
    PswfPrincipal,
    Sinc,
}

#[derive(Debug, Clone)]
enum Shape {
    Rrc { beta: f64 },
    Gaussian { sigma: f64 },
    Fs { coeffs: Vec<f64> },
    Pswf { basis: Arc<PswfBasis> },
    Sinc,
}

/// Unit-energy, real, even pulse.
///
/// Time-limited pulses carry samples on `[-T_p/2, T_p/2]`; band-limited pulses
/// (sinc, untruncated RRC) have no width and no samples and are evaluated in
/// closed form.
#[derive(Debug, Clone)]
pub struct Pulse {
    pub kind: PulseKind,
    pub beta: Option<f64>,
    /// Nyquist symbol time `T`.
    pub symbol_time: f64,
    /// Pulse width `T_p`; `None` for band-limited pulses.
    pub width: Option<f64>,
    /// Bandwidth `W` the pulse was designed for.
    pub bandwidth: f64,
    pub samples: Vec<f64>,
    pub grid_step: f64,
    /// Signed Fourier-series coefficients `c_0, c_1, ...`.
    pub fs_coeffs: Option<Vec<f64>>,
    shape: Shape,
    /// Multiplier applied to the raw shape for unit energy.
    scale: f64,
}

/// Sampled `|p̂(f)|²` with the out-of-band fraction.
#[derive(Debug, Clone)]
pub struct SpectralProfile {
    pub frequencies: Vec<f64>,
    pub magnitude_sq: Vec<f64>,
    pub oob_fraction: f64,
}

/// Root-raised-cosine impulse response with unit energy, symbol time `t_sym`.
pub fn rrc_value(t: f64, t_sym: f64, beta: f64) -> f64 {
    let norm = 1.0 / t_sym.sqrt();
    let x = t / t_sym;
    if x.abs() < 1e-10 {
        return norm * (1.0 - beta + 4.0 * beta * FRAC_1_PI);
    }
    if beta > 0.0 && ((4.0 * beta * x).abs() - 1.0).abs() < 1e-9 {
        let a = PI / (4.0 * beta);
        return beta / (2.0 * t_sym).sqrt()
            * ((1.0 + 2.0 * FRAC_1_PI) * a.sin() + (1.0 - 2.0 * FRAC_1_PI) * a.cos());
    }
    let num = (PI * x * (1.0 - beta)).sin() + 4.0 * beta * x * (PI * x * (1.0 + beta)).cos();
    let den = PI * x * (1.0 - (4.0 * beta * x).powi(2));
    norm * num / den
}

/// Raised-cosine spectrum `|p̂(f)|²` of the unit-energy RRC pulse.
pub fn raised_cosine_spectrum(f: f64, t_sym: f64, beta: f64) -> f64 {
    let af = f.abs();
    let f1 = (1.0 - beta) / (2.0 * t_sym);
    let f2 = (1.0 + beta) / (2.0 * t_sym);
    if af <= f1 {
        t_sym
    } else if af >= f2 {
        0.0
    } else {
        0.5 * t_sym * (1.0 + (PI * t_sym / beta * (af - f1)).cos())
    }
}

/// Raised-cosine autocorrelation of the untruncated RRC pulse at lag `d`.
pub fn raised_cosine_autocorrelation(d: f64, t_sym: f64, beta: f64) -> f64 {
    let x = d / t_sym;
    let den = 1.0 - (2.0 * beta * x).powi(2);
    if beta > 0.0 && den.abs() < 1e-10 {
        return 0.25 * PI * sinc(0.5 / beta);
    }
    sinc(x) * (PI * beta * x).cos() / den
}

fn check_grid(grid_step: f64, t_sym: f64) -> Result<()> {
    let max = t_sym / 64.0;
    if !(grid_step > 0.0) || grid_step > max * (1.0 + 1e-12) {
        return Err(Error::GridTooCoarse { step: grid_step, max });
    }
    Ok(())
}

fn check_bandwidth(w: f64) -> Result<()> {
    if w > 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(invalid("W", format!("bandwidth must be positive, got {w}")))
    }
}

impl Pulse {
    fn time_limited(
        kind: PulseKind,
        shape: Shape,
        beta: Option<f64>,
        symbol_time: f64,
        width: f64,
        bandwidth: f64,
        grid_step: f64,
        normalize: bool,
    ) -> Self {
        let mut intervals = (width / grid_step).ceil() as usize;
        intervals += intervals % 2;
        let dt = width / intervals as f64;
        let mut p = Pulse {
            kind,
            beta,
            symbol_time,
            width: Some(width),
            bandwidth,
            samples: Vec::new(),
            grid_step: dt,
            fs_coeffs: match &shape {
                Shape::Fs { coeffs } => Some(coeffs.clone()),
                _ => None,
            },
            shape,
            scale: 1.0,
        };
        let half = intervals / 2;
        let mut samples = vec![0.0; intervals + 1];
        for i in 0..=half {
            let v = p.raw(i as f64 * dt);
            samples[half + i] = v;
            samples[half - i] = v;
        }
        if normalize {
            let e = trapezoid_energy(&samples, dt);
            p.scale = 1.0 / e.sqrt();
            samples.iter_mut().for_each(|s| *s *= p.scale);
        }
        p.samples = samples;
        p
    }

    fn raw(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Rrc { beta } => rrc_value(t, self.symbol_time, *beta),
            Shape::Gaussian { sigma } => (-0.5 * (t / sigma).powi(2)).exp(),
            Shape::Fs { coeffs } => {
                let tp = self.width.expect("FS pulse is time-limited");
                let w = 2.0 * PI / tp;
                coeffs[0]
                    + coeffs[1..]
                        .iter()
                        .enumerate()
                        .map(|(k, c)| 2.0 * c * ((k + 1) as f64 * w * t).cos())
                        .sum::<f64>()
            }
            Shape::Pswf { basis } => {
                let two_w = 2.0 * self.bandwidth;
                two_w.sqrt() * basis.eval(0, two_w * t)
            }
            Shape::Sinc => sinc(t / self.symbol_time) / self.symbol_time.sqrt(),
        }
    }

    /// Pulse amplitude at time `t` (zero outside the support).
    pub fn eval(&self, t: f64) -> f64 {
        match self.width {
            Some(tp) if t.abs() > 0.5 * tp => 0.0,
            _ => self.scale * self.raw(t),
        }
    }

    pub fn is_time_limited(&self) -> bool {
        self.width.is_some()
    }

    /// Pulse TBP `c = 2 W T_p`.
    pub fn tbp(&self) -> Option<f64> {
        self.width.map(|tp| 2.0 * self.bandwidth * tp)
    }

    /// Time of sample `i`.
    pub fn sample_time(&self, i: usize) -> f64 {
        -0.5 * self.width.unwrap_or(0.0) + i as f64 * self.grid_step
    }

    /// Trapezoidal energy of the sample vector.
    pub fn sample_energy(&self) -> f64 {
        trapezoid_energy(&self.samples, self.grid_step)
    }

    /// Fourier transform `p̂(f)` (real since the pulse is real and even).
    pub fn transform(&self, f: f64) -> f64 {
        match &self.shape {
            Shape::Fs { coeffs } => {
                let tp = self.width.expect("FS pulse is time-limited");
                let mut s = coeffs[0] * sinc(f * tp);
                for (k, c) in coeffs[1..].iter().enumerate() {
                    let fk = (k + 1) as f64 / tp;
                    s += c * (sinc((f - fk) * tp) + sinc((f + fk) * tp));
                }
                tp * s
            }
            Shape::Sinc => {
                let t = self.symbol_time;
                let edge = 0.5 / t;
                if f.abs() < edge {
                    t.sqrt()
                } else if f.abs() == edge {
                    (0.5 * t).sqrt()
                } else {
                    0.0
                }
            }
            Shape::Rrc { beta } if self.width.is_none() => {
                raised_cosine_spectrum(f, self.symbol_time, *beta).sqrt()
            }
            _ => {
                // trapezoid over the symmetric grid, folded onto t >= 0
                let half = (self.samples.len() - 1) / 2;
                let dt = self.grid_step;
                let w = 2.0 * PI * f;
                let mut s = 0.5 * self.samples[half];
                for j in 1..=half {
                    let wt = if j == half { 0.5 } else { 1.0 };
                    s += wt * self.samples[half + j] * (w * j as f64 * dt).cos();
                }
                2.0 * dt * s
            }
        }
    }

    /// `|p̂(f)|²`.
    pub fn energy_spectrum(&self, f: f64) -> f64 {
        match &self.shape {
            Shape::Rrc { beta } if self.width.is_none() => raised_cosine_spectrum(f, self.symbol_time, *beta),
            _ => self.transform(f).powi(2),
        }
    }

    /// Frequency beyond which `|p̂|` stays below `1e-8` (band-limited pulses),
    /// or `None` when the spectrum has unbounded support.
    pub fn band_edge(&self) -> Option<f64> {
        match (&self.shape, self.width) {
            (Shape::Sinc, _) => Some(0.5 / self.symbol_time),
            (Shape::Rrc { beta }, None) => Some((1.0 + beta) / (2.0 * self.symbol_time)),
            _ => None,
        }
    }
}

fn trapezoid_energy(samples: &[f64], dt: f64) -> f64 {
    let n = samples.len();
    let s: f64 = samples.iter().map(|v| v * v).sum();
    dt * (s - 0.5 * (samples[0].powi(2) + samples[n - 1].powi(2)))
}

/// Truncated RRC pulse with `T = (1+β)/(2W)` and `T_p = c/(2W)`.
pub fn make_rrc(beta: f64, w: f64, c: f64, grid_step: f64) -> Result<Pulse> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidRollOff(beta));
    }
    check_bandwidth(w)?;
    if !(c >= 1.0) {
        return Err(invalid("c", format!("pulse TBP must be at least 1, got {c}")));
    }
    let t_sym = (1.0 + beta) / (2.0 * w);
    check_grid(grid_step, t_sym)?;
    Ok(Pulse::time_limited(PulseKind::Rrc, Shape::Rrc { beta }, Some(beta), t_sym, c / (2.0 * w), w, grid_step, true))
}

/// Truncated RRC with the default grid `T/256`.
pub fn make_rrc_default(beta: f64, w: f64, c: f64) -> Result<Pulse> {
    let t_sym = (1.0 + beta) / (2.0 * w);
    make_rrc(beta, w, c, t_sym / DEFAULT_STEPS_PER_SYMBOL)
}

/// Untruncated RRC pulse (band-limited to `(1+β)/(2T)`).
pub fn make_rrc_bandlimited(beta: f64, w: f64) -> Result<Pulse> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidRollOff(beta));
    }
    check_bandwidth(w)?;
    let t_sym = (1.0 + beta) / (2.0 * w);
    Ok(Pulse {
        kind: PulseKind::Rrc,
        beta: Some(beta),
        symbol_time: t_sym,
        width: None,
        bandwidth: w,
        samples: Vec::new(),
        grid_step: t_sym / DEFAULT_STEPS_PER_SYMBOL,
        fs_coeffs: None,
        shape: Shape::Rrc { beta },
        scale: 1.0,
    })
}

/// Ideal sinc pulse with `T = 1/(2W)`.
pub fn make_sinc(w: f64) -> Result<Pulse> {
    check_bandwidth(w)?;
    let t_sym = 0.5 / w;
    Ok(Pulse {
        kind: PulseKind::Sinc,
        beta: Some(0.0),
        symbol_time: t_sym,
        width: None,
        bandwidth: w,
        samples: Vec::new(),
        grid_step: t_sym / DEFAULT_STEPS_PER_SYMBOL,
        fs_coeffs: None,
        shape: Shape::Sinc,
        scale: 1.0,
    })
}

/// Gaussian parameter `σ = Q⁻¹(ε/2) / (2√2 π W)` that puts exactly `ε` of the
/// untruncated pulse energy outside `(-W, W)`.
pub fn gaussian_sigma(eps_w: f64, w: f64) -> f64 {
    q_inv(0.5 * eps_w) / (2.0 * std::f64::consts::SQRT_2 * PI * w)
}

/// Truncated Gaussian of width `c/(2W)` and the given `σ`; `T = T_p`.
pub fn make_gaussian_width(sigma: f64, w: f64, c: f64, grid_step: f64) -> Result<Pulse> {
    check_bandwidth(w)?;
    let tp = c / (2.0 * w);
    check_grid(grid_step, tp)?;
    Ok(Pulse::time_limited(PulseKind::Gaussian, Shape::Gaussian { sigma }, None, tp, tp, w, grid_step, true))
}

/// Narrowest truncated Gaussian (widths on a `0.5/(2W)` grid) meeting the OOB target.
///
/// `grid_step` is given relative to `T_p`: each candidate width uses
/// `T_p * grid_step` as its sample spacing, so pass e.g. `1/256`.
pub fn make_gaussian(eps_w: f64, w: f64, grid_step: f64) -> Result<Pulse> {
    check_eps(eps_w)?;
    check_bandwidth(w)?;
    let sigma = gaussian_sigma(eps_w, w);
    let mut k = 1usize;
    loop {
        let c = 0.5 * k as f64;
        if c > MAX_C {
            return Err(Error::NotFound { eps: eps_w, max_c: MAX_C });
        }
        let tp = c / (2.0 * w);
        let p = make_gaussian_width(sigma, w, c, tp * grid_step)?;
        if oob_energy(&p, w) <= eps_w {
            return Ok(p);
        }
        k += 1;
    }
}

fn check_eps(eps_w: f64) -> Result<()> {
    if eps_w > 0.0 && eps_w < 1.0 {
        Ok(())
    } else {
        Err(invalid("eps_W", format!("must lie in (0, 1), got {eps_w}")))
    }
}

/// Fourier-series pulse `c_0 + Σ 2 c_k cos(2πkt/T_p)` on `|t| ≤ T_p/2`.
///
/// Coefficients must already give unit energy `T_p(c_0² + 2Σc_k²) = 1`.
pub fn make_fs_pulse(coeffs: &[f64], tp: f64, t_sym: f64, w: f64) -> Result<Pulse> {
    if coeffs.is_empty() {
        return Err(invalid("coeffs", "at least c_0 is required"));
    }
    check_bandwidth(w)?;
    if !(t_sym > 0.0 && t_sym < tp) {
        return Err(invalid("T", format!("symbol time {t_sym} must lie in (0, T_p = {tp})")));
    }
    let energy = fs_energy(coeffs, tp);
    if (energy - 1.0).abs() > 1e-6 {
        return Err(Error::EnergyMismatch { energy });
    }
    let step = t_sym / DEFAULT_STEPS_PER_SYMBOL;
    Ok(Pulse::time_limited(
        PulseKind::FourierSeries,
        Shape::Fs { coeffs: coeffs.to_vec() },
        None,
        t_sym,
        tp,
        w,
        step,
        false,
    ))
}

/// `T_p (c_0² + 2 Σ c_k²)`.
pub fn fs_energy(coeffs: &[f64], tp: f64) -> f64 {
    tp * (coeffs[0].powi(2) + 2.0 * coeffs[1..].iter().map(|c| c * c).sum::<f64>())
}

/// Scales `coeffs` to unit energy.
pub fn normalize_fs(coeffs: &[f64], tp: f64) -> Vec<f64> {
    let s = fs_energy(coeffs, tp).sqrt();
    coeffs.iter().map(|c| c / s).collect()
}

/// Closed-form autocorrelation of an FS pulse at lag `d ≥ 0`.
pub fn fs_autocorrelation(coeffs: &[f64], tp: f64, d: f64) -> f64 {
    let d = d.abs();
    if d >= tp {
        return 0.0;
    }
    let a = 2.0 * PI / tp;
    let m = coeffs.len();
    let c0 = coeffs[0];
    let sgn = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let mut h = c0 * c0 * (tp - d);
    for k in 1..m {
        let kf = k as f64;
        h -= 4.0 * c0 * coeffs[k] * sgn(k) * (kf * a * d).sin() / (kf * a);
    }
    for k in 1..m {
        let kf = k as f64;
        for r in 1..m {
            let rf = r as f64;
            let g = if k == r {
                (kf * a * d).cos() * (tp - d) - (kf * a * d).sin() / (kf * a)
            } else {
                2.0 * sgn(k + r) * (rf * (rf * a * d).sin() - kf * (kf * a * d).sin()) / ((kf * kf - rf * rf) * a)
            };
            h += 2.0 * coeffs[k] * coeffs[r] * g;
        }
    }
    h
}

/// `|p̂|²` sampled on `f_grid`, with the OOB fraction for the pulse's own `W`.
pub fn spectrum(p: &Pulse, f_grid: &[f64]) -> SpectralProfile {
    SpectralProfile {
        frequencies: f_grid.to_vec(),
        magnitude_sq: f_grid.iter().map(|&f| p.energy_spectrum(f)).collect(),
        oob_fraction: oob_energy(p, p.bandwidth),
    }
}

/// Energy of `p` inside `(-W, W)`.
pub fn inband_energy(p: &Pulse, w: f64) -> f64 {
    match p.band_edge() {
        Some(edge) => {
            let top = w.min(edge);
            if top <= 0.0 {
                return 0.0;
            }
            2.0 * integrate_adaptive(|f| p.energy_spectrum(f), 0.0, top, 1e-12)
        }
        None => {
            let tp = p.width.expect("time-limited");
            let panels = (w * tp).ceil() as usize + 2;
            let rule = CompositeRule::new(0.0, w, panels, 20);
            2.0 * rule.integrate(|f| p.energy_spectrum(f))
        }
    }
}

/// Fraction of the energy outside `(-W, W)`, clamped to `[0, 1]`.
pub fn oob_energy(p: &Pulse, w: f64) -> f64 {
    (1.0 - inband_energy(p, w)).clamp(0.0, 1.0)
}

/// Autocorrelation `h_n = ∫ p(t) p(t - nτT) dt`.
pub fn autocorrelation(p: &Pulse, tau: f64, t_sym: f64, n: i64) -> f64 {
    autocorrelation_at(p, (n as f64 * tau * t_sym).abs())
}

/// Autocorrelation at an arbitrary lag `d`.
pub fn autocorrelation_at(p: &Pulse, d: f64) -> f64 {
    let d = d.abs();
    match (&p.shape, p.width) {
        (Shape::Fs { coeffs }, Some(tp)) => fs_autocorrelation(coeffs, tp, d),
        (Shape::Sinc, _) => sinc(d / p.symbol_time),
        (Shape::Rrc { beta }, None) => raised_cosine_autocorrelation(d, p.symbol_time, *beta),
        (_, Some(tp)) => overlap_integral(p, tp, d),
        (_, None) => unreachable!("band-limited pulses are sinc or RRC"),
    }
}

fn overlap_integral(p: &Pulse, tp: f64, d: f64) -> f64 {
    if d >= tp {
        return 0.0;
    }
    if d == 0.0 {
        return p.sample_energy();
    }
    let dt = p.grid_step;
    let shift = d / dt;
    if (shift - shift.round()).abs() < 1e-9 {
        // lag on the sample grid: pure sample products
        let m = shift.round() as usize;
        let s = &p.samples;
        let n = s.len();
        if m >= n - 1 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in m..n {
            let w = if i == m || i == n - 1 { 0.5 } else { 1.0 };
            acc += w * s[i] * s[i - m];
        }
        return dt * acc;
    }
    let a = -0.5 * tp + d;
    let b = 0.5 * tp;
    let k = ((b - a) / dt).ceil().max(1.0) as usize;
    let h = (b - a) / k as f64;
    let mut acc = 0.0;
    for i in 0..=k {
        let t = if i == k { b } else { a + i as f64 * h };
        let w = if i == 0 || i == k { 0.5 } else { 1.0 };
        acc += w * p.scale * p.raw(t) * p.scale * p.raw(t - d);
    }
    h * acc
}

/// Pulse family for the minimum-width search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseFamily {
    Rrc { beta: f64 },
    Gaussian,
    PswfPrincipal,
}

impl PulseFamily {
    /// Member of the family with pulse TBP `c`; `eps_w` sets the Gaussian `σ`.
    pub fn build(&self, c: f64, eps_w: f64, w: f64) -> Result<Pulse> {
        match *self {
            PulseFamily::Rrc { beta } => make_rrc_default(beta, w, c),
            PulseFamily::Gaussian => {
                let tp = c / (2.0 * w);
                make_gaussian_width(gaussian_sigma(eps_w, w), w, c, tp / DEFAULT_STEPS_PER_SYMBOL)
            }
            PulseFamily::PswfPrincipal => make_pswf_principal(c, w),
        }
    }
}

/// Principal PSWF truncated to `|t| ≤ T_p/2` with `T = T_p = c/(2W)`.
pub fn make_pswf_principal(c: f64, w: f64) -> Result<Pulse> {
    check_bandwidth(w)?;
    if !(c > 0.0) {
        return Err(invalid("c", format!("pulse TBP must be positive, got {c}")));
    }
    let basis = solve_basis(c, 1, required_quad_points(c, 1))?;
    let tp = c / (2.0 * w);
    Ok(Pulse::time_limited(
        PulseKind::PswfPrincipal,
        Shape::Pswf { basis: Arc::new(basis) },
        None,
        tp,
        tp,
        w,
        tp / DEFAULT_STEPS_PER_SYMBOL,
        true,
    ))
}

/// Smallest `c` on the `0.01` grid over `[1, 200]` with OOB at most `eps_w`.
pub fn min_c(family: PulseFamily, eps_w: f64, w: f64) -> Result<f64> {
    check_eps(eps_w)?;
    check_bandwidth(w)?;
    let grid = |i: usize| 1.0 + C_GRID * i as f64;
    let last = ((MAX_C - 1.0) / C_GRID).round() as usize;
    let meets = |i: usize| -> Result<bool> { Ok(oob_energy(&family.build(grid(i), eps_w, w)?, w) <= eps_w) };

    const COARSE: usize = 50;
    const LOOKAHEAD: usize = 500;
    let mut coarse: Vec<(usize, bool)> = Vec::new();
    let mut first_ok: Option<usize> = None;
    let mut i = 0;
    while i <= last {
        let ok = meets(i)?;
        coarse.push((i, ok));
        if ok && first_ok.is_none() {
            first_ok = Some(i);
        }
        if let Some(f) = first_ok {
            if i >= f + LOOKAHEAD {
                break;
            }
        }
        i += COARSE;
    }
    let Some(hi) = first_ok else {
        return Err(Error::NotFound { eps: eps_w, max_c: MAX_C });
    };
    if hi == 0 {
        return Ok(grid(0));
    }
    let changes = coarse.windows(2).filter(|p| p[0].1 != p[1].1).count();
    if changes > 1 {
        log::info!("non-monotone OOB for {family:?}; scanning linearly");
        for j in 0..=hi {
            if meets(j)? {
                return Ok(grid(j));
            }
        }
        return Ok(grid(hi));
    }
    let (mut lo, mut hi) = (hi - COARSE, hi);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if meets(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(grid(hi))
}
