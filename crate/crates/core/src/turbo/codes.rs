//! Unit-memory recursive codes and their log-MAP soft-in/soft-out decoders.
//!
//! RSC: `w_k = u_k ⊕ w_{k-1}`, outputs `(u_k, w_{k-1})` (feedback `1+D`,
//! feedforward `D`). URC: `c_k = u_k ⊕ c_{k-1}` (transfer `1/(1+D)`). Both
//! start in the zero state and are left unterminated.

use super::{max_star, LlrRole, LlrVector};

pub fn rsc_encode(bits: &[u8]) -> Vec<u8> {
    let mut s = 0u8;
    let mut out = Vec::with_capacity(2 * bits.len());
    for &u in bits {
        out.push(u);
        out.push(s);
        s ^= u;
    }
    out
}

pub fn urc_encode(bits: &[u8]) -> Vec<u8> {
    let mut s = 0u8;
    bits.iter()
        .map(|&u| {
            s ^= u;
            s
        })
        .collect()
}

/// Soft outputs of one decoder activation.
#[derive(Debug, Clone)]
pub struct SisoOutput {
    /// Extrinsic LLRs of the encoder input bits.
    pub input: LlrVector,
    /// Extrinsic LLRs of the encoder output bits.
    pub output: LlrVector,
    /// A-posteriori LLRs of the input bits.
    pub app: Vec<f64>,
}

/// Log-domain half-LLR contribution of bit `b`.
fn bit_term(llr: f64, b: u8) -> f64 {
    if b == 0 {
        0.5 * llr
    } else {
        -0.5 * llr
    }
}

/// BCJR over a two-state trellis. `step(s, u)` returns the next state and
/// writes the `n_out` output bits.
fn siso2<F: Fn(u8, u8, &mut [u8]) -> u8>(la_in: &[f64], la_out: &[f64], n_out: usize, step: F) -> SisoOutput {
    let k = la_in.len();
    debug_assert_eq!(la_out.len(), k * n_out);
    let mut outs = vec![[[0u8; 2]; 2]; 2];
    let mut next = [[0u8; 2]; 2];
    for s in 0..2u8 {
        for u in 0..2u8 {
            let mut o = [0u8; 2];
            next[s as usize][u as usize] = step(s, u, &mut o[..n_out]);
            outs[s as usize][u as usize] = o;
        }
    }
    let gamma = |i: usize, s: usize, u: usize| -> f64 {
        let o = &outs[s][u];
        let mut g = bit_term(la_in[i], u as u8);
        for j in 0..n_out {
            g += bit_term(la_out[i * n_out + j], o[j]);
        }
        g
    };

    let ninf = f64::NEG_INFINITY;
    let mut alpha = vec![[ninf; 2]; k + 1];
    alpha[0] = [0.0, ninf];
    for i in 0..k {
        let mut a = [ninf; 2];
        for s in 0..2 {
            if alpha[i][s] == ninf {
                continue;
            }
            for u in 0..2 {
                let t = next[s][u] as usize;
                a[t] = max_star(a[t], alpha[i][s] + gamma(i, s, u));
            }
        }
        let norm = a[0].max(a[1]);
        alpha[i + 1] = [a[0] - norm, a[1] - norm];
    }
    let mut beta = vec![[0.0; 2]; k + 1];
    for i in (0..k).rev() {
        let mut b = [ninf; 2];
        for s in 0..2 {
            for u in 0..2 {
                let t = next[s][u] as usize;
                b[s] = max_star(b[s], gamma(i, s, u) + beta[i + 1][t]);
            }
        }
        let norm = b[0].max(b[1]);
        beta[i] = [b[0] - norm, b[1] - norm];
    }

    let mut ext_in = vec![0.0; k];
    let mut ext_out = vec![0.0; k * n_out];
    let mut app = vec![0.0; k];
    for i in 0..k {
        let mut pu = [ninf; 2];
        let mut po = [[ninf; 2]; 2];
        for s in 0..2 {
            for u in 0..2 {
                let m = alpha[i][s] + gamma(i, s, u) + beta[i + 1][next[s][u] as usize];
                pu[u] = max_star(pu[u], m);
                for j in 0..n_out {
                    let b = outs[s][u][j] as usize;
                    po[j][b] = max_star(po[j][b], m);
                }
            }
        }
        app[i] = clip(pu[0] - pu[1]);
        ext_in[i] = clip(app[i] - la_in[i]);
        for j in 0..n_out {
            let l = clip(po[j][0] - po[j][1]);
            ext_out[i * n_out + j] = clip(l - la_out[i * n_out + j]);
        }
    }
    SisoOutput {
        input: LlrVector::new(ext_in, LlrRole::Extrinsic),
        output: LlrVector::new(ext_out, LlrRole::Extrinsic),
        app,
    }
}

pub(crate) fn clip(v: f64) -> f64 {
    v.clamp(-super::LLR_CLIP, super::LLR_CLIP)
}

/// RSC decoder from a-priori LLRs of the coded stream `(u_0, p_0, u_1, …)`.
/// Information bits carry no prior.
pub fn rsc_decode(la_coded: &[f64]) -> SisoOutput {
    let k = la_coded.len() / 2;
    siso2(&vec![0.0; k], la_coded, 2, |s, u, o| {
        o[0] = u;
        o[1] = s;
        s ^ u
    })
}

/// URC decoder from a-priori LLRs of its input and output bits.
pub fn urc_decode(la_in: &[f64], la_out: &[f64]) -> SisoOutput {
    siso2(la_in, la_out, 1, |s, u, o| {
        o[0] = s ^ u;
        s ^ u
    })
}
