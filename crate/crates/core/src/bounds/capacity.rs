use crate::channel::FoldedSpectrum;
use crate::pulse::Pulse;
use crate::quad::integrate_adaptive;

/// Asymptotic FTN capacity
/// `(1/2W) ∫ log₂(1 + 2Wρ p̂_folded(f)) df` over `|f| < 1/(2τT)`.
pub fn capacity_ftn(p: &Pulse, tau: f64, rho: f64, w: f64) -> f64 {
    let edge = 0.5 / (tau * p.symbol_time);
    let folded = FoldedSpectrum::new(p, tau);
    let integrand = |f: f64| (2.0 * w * rho * folded.eval(f).max(0.0)).ln_1p();
    // even integrand; split at the spectrum's corner frequencies for band-limited pulses
    let mut knots = vec![0.0, edge];
    if let (Some(beta), None) = (p.beta, p.width) {
        let t = p.symbol_time;
        for k in [(1.0 - beta) / (2.0 * t), (1.0 + beta) / (2.0 * t)] {
            for shift in [0.0, 2.0 * edge] {
                let f = (k - shift).abs();
                if f > 0.0 && f < edge {
                    knots.push(f);
                }
            }
        }
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let total: f64 = knots.windows(2).map(|k| integrate_adaptive(integrand, k[0], k[1], 1e-10)).sum();
    2.0 * total * std::f64::consts::LOG2_E / (2.0 * w)
}
