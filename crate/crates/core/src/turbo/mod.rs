//! Three-stage turbo-equalized FTN link: RSC outer code, unity-rate inner
//! code, QPSK over the matched-filter FTN channel, MAP equalizer.

mod codes;
mod equalizer;
mod interleaver;
mod link;

pub use codes::{rsc_decode, rsc_encode, urc_decode, urc_encode, SisoOutput};
pub use equalizer::{map_equalize, MAX_MEMORY};
pub use interleaver::{default_spread, has_spread, s_random_interleaver, Interleaver};
pub use link::{
    bler_crossing_db, bler_sweep, ftn_transmit, na_crossing_db, three_stage_receive, wilson_interval, BlerPoint,
    CodingConfig, Decoded, FtnChannel, TurboLink,
};

use num_complex::Complex64;

pub(crate) const LLR_CLIP: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlrRole {
    APriori,
    Extrinsic,
    APosteriori,
}

/// Bit LLRs `ln P(b=0)/P(b=1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector {
    pub values: Vec<f64>,
    pub role: LlrRole,
}

impl LlrVector {
    pub fn new(values: Vec<f64>, role: LlrRole) -> Self {
        LlrVector { values, role }
    }

    pub fn zeros(n: usize) -> Self {
        LlrVector { values: vec![0.0; n], role: LlrRole::APriori }
    }

    pub fn hard_decisions(&self) -> Vec<u8> {
        self.values.iter().map(|&l| u8::from(l < 0.0)).collect()
    }
}

/// Jacobian logarithm `ln(e^a + e^b)`.
#[inline]
pub fn max_star(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    a.max(b) + (-(a - b).abs()).exp().ln_1p()
}

/// Gray-mapped QPSK point for the bit pair `(q & 1, q >> 1)`: bit 0 on the
/// real axis, bit 1 on the imaginary axis, unit energy.
pub fn qpsk_symbol(q: usize) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex64::new(if q & 1 == 0 { s } else { -s }, if q & 2 == 0 { s } else { -s })
}

/// Maps bit pairs `(b_{2n}, b_{2n+1})` to QPSK symbols.
pub fn qpsk_map(bits: &[u8]) -> Vec<Complex64> {
    bits.chunks_exact(2).map(|b| qpsk_symbol((b[0] | (b[1] << 1)) as usize)).collect()
}

/// Exact QPSK demapper LLRs for `y = x + n`, `n ~ CN(0, ν)`.
pub fn qpsk_demap(y: &[Complex64], nu: f64) -> Vec<f64> {
    let k = 2.0 * std::f64::consts::SQRT_2 / nu;
    y.iter().flat_map(|v| [k * v.re, k * v.im]).collect()
}
