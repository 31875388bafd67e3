//! Rate limits on the parallel-channel model: capacity, normal approximation,
//! meta-converse upper bound and RCU achievability bound.

mod capacity;
mod converse;
mod normal;
mod rcu;
pub mod saddlepoint;

pub use capacity::capacity_ftn;
pub use converse::{mc_bound, mc_bound_from, mc_rate};
pub use normal::{c_na, moments_mismatched, na_bler, na_bler_from, na_rate, na_rate_from, v_na, RateVariant};
pub use rcu::{rcu_bler, rcu_rate, RcuSampler, DEFAULT_RCU_SAMPLES};
pub use saddlepoint::{cgf, saddlepoint_log_cdf, CgfEval};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Capacity,
    Na,
    Mc,
    Rcu,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Capacity => "capacity",
            Method::Na => "na",
            Method::Mc => "mc",
            Method::Rcu => "rcu",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub t_hat: Option<f64>,
    pub lambda_threshold: Option<f64>,
    pub mc_samples: Option<usize>,
    pub rcu_samples: Option<usize>,
    pub seed: Option<u64>,
    pub std_error: Option<f64>,
}

/// A rate or BLER value; the other field echoes the fixed input.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub method: Method,
    pub rate_bps_hz: Option<f64>,
    pub bler: Option<f64>,
    pub diagnostics: Diagnostics,
}
