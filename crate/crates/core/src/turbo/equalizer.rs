//! Symbol-by-symbol MAP equalizer on the Ungerboeck trellis.

use super::codes::clip;
use super::{qpsk_symbol, LlrRole, LlrVector};
use crate::error::{Error, Result};
use num_complex::Complex64;

pub const MAX_MEMORY: usize = 8;

/// Extrinsic bit LLRs for QPSK symbols observed through the matched-filter
/// model `y = Hx + z`, `cov(z) = νH`, with `H` banded by `taps = h_0…h_L`.
///
/// The state is the last `L` symbols. The branch metric for `x_n` is
/// `(2/ν) Re{x_n* y_n} - (1/ν)(h_0|x_n|² + 2 Re{x_n* Σ_{l≥1} h_l x_{n-l}})`
/// plus the a-priori term. Bits are ordered `(b_0, b_1)` per symbol: real
/// then imaginary part.
pub fn map_equalize(y: &[Complex64], taps: &[f64], nu: f64, apriori: &LlrVector) -> Result<LlrVector> {
    let n = y.len();
    let mem = taps.len().saturating_sub(1);
    if mem > MAX_MEMORY {
        return Err(Error::MemoryTooLarge(mem));
    }
    if taps.is_empty() || !(nu > 0.0) {
        return Err(crate::error::invalid("taps", "need h_0 and a positive noise scale"));
    }
    if apriori.values.len() != 2 * n {
        return Err(crate::error::invalid("apriori", format!("expected {} LLRs, got {}", 2 * n, apriori.values.len())));
    }
    let la = &apriori.values;
    let states = 1usize << (2 * mem);
    let mask = states - 1;
    let alphabet: [Complex64; 4] = std::array::from_fn(qpsk_symbol);

    // partial[s][m] = Σ_{l=1}^{m} h_l x_{n-l} for the symbols held in state s
    let partial: Vec<Vec<Complex64>> = (0..states)
        .map(|s| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut v = vec![acc];
            for l in 1..=mem {
                acc += taps[l] * alphabet[(s >> (2 * (l - 1))) & 3];
                v.push(acc);
            }
            v
        })
        .collect();

    let prior = |i: usize, q: usize| {
        0.5 * (if q & 1 == 0 { la[2 * i] } else { -la[2 * i] }) + 0.5 * (if q & 2 == 0 { la[2 * i + 1] } else { -la[2 * i + 1] })
    };
    // γ = data(i, q) - isi(s, q) once the state holds L real symbols
    let data = |i: usize, q: usize| 2.0 * (alphabet[q].conj() * y[i]).re / nu + prior(i, q);
    let isi_term = |s: usize, q: usize, m: usize| {
        let x = alphabet[q];
        (taps[0] * x.norm_sqr() + 2.0 * (x.conj() * partial[s][m]).re) / nu
    };
    let next = |s: usize, q: usize| ((s << 2) | q) & mask;

    // Exact log-MAP carried out in the probability domain: branch weights
    // are exp(γ - max γ) per step and the forward/backward vectors are
    // rescaled every step, so nothing is approximated. In steady state the
    // weight factors into a per-step data part and a fixed ISI part. When
    // the metric spread is too wide for that, the log-domain path runs.
    let steady: Vec<f64> = (0..4 * states).map(|k| isi_term(k / 4, k % 4, mem)).collect();
    let lo = steady.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = steady.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let steady_w: Vec<f64> = steady.iter().map(|v| (lo - v).exp()).collect();
    let weights = |i: usize, buf: &mut [f64]| {
        let d: [f64; 4] = std::array::from_fn(|q| data(i, q));
        let dmax = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
        if i >= mem && (hi - lo) + (dmax - dmin) < 600.0 {
            let e: [f64; 4] = std::array::from_fn(|q| (d[q] - dmax).exp());
            for (k, v) in buf.iter_mut().enumerate() {
                *v = e[k % 4] * steady_w[k];
            }
            return;
        }
        let m = mem.min(i);
        let mut top = f64::NEG_INFINITY;
        for (k, v) in buf.iter_mut().enumerate() {
            *v = d[k % 4] - isi_term(k / 4, k % 4, m);
            top = top.max(*v);
        }
        buf.iter_mut().for_each(|g| *g = (*g - top).exp());
    };

    let mut range_ok = true;
    for i in mem..n {
        let d: [f64; 4] = std::array::from_fn(|q| data(i, q));
        let dmax = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
        if (hi - lo) + (dmax - dmin) >= 600.0 {
            range_ok = false;
            break;
        }
    }

    let mut out = vec![0.0; 2 * n];
    let mut put = |i: usize, app: [f64; 4], log_domain: bool| {
        let (l0, l1) = if log_domain {
            (lse2(app[0], app[2]) - lse2(app[1], app[3]), lse2(app[0], app[1]) - lse2(app[2], app[3]))
        } else {
            (((app[0] + app[2]) / (app[1] + app[3])).ln(), ((app[0] + app[1]) / (app[2] + app[3])).ln())
        };
        out[2 * i] = clip(finite_or_sign(l0) - la[2 * i]);
        out[2 * i + 1] = clip(finite_or_sign(l1) - la[2 * i + 1]);
    };

    if !range_ok {
        // Well-separated metrics (very high SNR): exact log-domain recursions,
        // where unreachable states stay at -inf instead of underflowing the
        // surviving path.
        let gamma = |i: usize, buf: &mut [f64]| {
            let m = mem.min(i);
            for (k, v) in buf.iter_mut().enumerate() {
                *v = data(i, k % 4) - isi_term(k / 4, k % 4, m);
            }
        };
        let mut g = vec![0.0; 4 * states];
        let mut alpha = vec![vec![0.0; states]; n + 1];
        let mut acc = vec![Vec::with_capacity(4); states];
        for i in 0..n {
            gamma(i, &mut g);
            acc.iter_mut().for_each(|v: &mut Vec<f64>| v.clear());
            for s in 0..states {
                if alpha[i][s] == f64::NEG_INFINITY {
                    continue;
                }
                for q in 0..4 {
                    acc[next(s, q)].push(alpha[i][s] + g[4 * s + q]);
                }
            }
            for (t, v) in acc.iter().enumerate() {
                alpha[i + 1][t] = lse(v);
            }
            normalize_log(&mut alpha[i + 1]);
        }
        let mut beta = vec![0.0; states];
        let mut b = vec![0.0; states];
        for i in (0..n).rev() {
            gamma(i, &mut g);
            let mut app: [Vec<f64>; 4] = Default::default();
            for s in 0..states {
                let terms: [f64; 4] = std::array::from_fn(|q| g[4 * s + q] + beta[next(s, q)]);
                if alpha[i][s] > f64::NEG_INFINITY {
                    for q in 0..4 {
                        app[q].push(alpha[i][s] + terms[q]);
                    }
                }
                b[s] = lse(&terms);
            }
            normalize_log(&mut b);
            std::mem::swap(&mut beta, &mut b);
            put(i, std::array::from_fn(|q| lse(&app[q])), true);
        }
        return Ok(LlrVector::new(out, LlrRole::Extrinsic));
    }

    let mut w = vec![0.0; 4 * states];
    let mut alpha = vec![vec![1.0; states]; n + 1];
    for i in 0..n {
        weights(i, &mut w);
        let (head, tail) = alpha.split_at_mut(i + 1);
        let (prev, a) = (&head[i], &mut tail[0]);
        a.iter_mut().for_each(|v| *v = 0.0);
        for s in 0..states {
            let p = prev[s];
            if p == 0.0 {
                continue;
            }
            for q in 0..4 {
                a[next(s, q)] += p * w[4 * s + q];
            }
        }
        rescale(a);
    }
    let mut beta = vec![1.0; states];
    let mut b = vec![0.0; states];
    for i in (0..n).rev() {
        weights(i, &mut w);
        let mut app = [0.0; 4];
        for s in 0..states {
            let mut acc = 0.0;
            for q in 0..4 {
                let v = w[4 * s + q] * beta[next(s, q)];
                app[q] += alpha[i][s] * v;
                acc += v;
            }
            b[s] = acc;
        }
        rescale(&mut b);
        std::mem::swap(&mut beta, &mut b);
        put(i, app, false);
    }
    Ok(LlrVector::new(out, LlrRole::Extrinsic))
}

fn lse(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn lse2(a: f64, b: f64) -> f64 {
    super::max_star(a, b)
}

fn normalize_log(v: &mut [f64]) {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m > f64::NEG_INFINITY {
        v.iter_mut().for_each(|x| *x -= m);
    }
}

fn finite_or_sign(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(-1e3, 1e3)
    }
}

fn rescale(v: &mut [f64]) {
    let m = v.iter().copied().fold(0.0, f64::max);
    if m > 0.0 {
        v.iter_mut().for_each(|x| *x /= m);
    }
}
