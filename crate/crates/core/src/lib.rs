//! Finite time-bandwidth-product limits of faster-than-Nyquist signaling.
//!
//! The crate maps a base pulse and a symbol-rate acceleration factor onto an
//! equivalent set of parallel Gaussian channels and evaluates finite-blocklength
//! rate bounds on that model (normal approximation, meta-converse, RCU), next to
//! PSWF benchmarks and a turbo-equalized link simulator.
//!
//! ```
//! use ftn_tbp::{channel, pulse};
//! let p = pulse::make_rrc_default(1.0, 0.5, 8.57).unwrap();
//! let n = channel::symbol_count(132.0, 8.57, 1.0, 1.0).unwrap();
//! assert_eq!(n, 62);
//! let ch = channel::make_channel(&p, 132.0, 1000.0, 1.0).unwrap();
//! assert_eq!(ch.n, 62);
//! ```

pub mod bounds;
pub mod channel;
pub mod design;
pub mod error;
pub mod optim;
pub mod pswf;
pub mod pulse;
pub mod quad;
pub mod rng;
pub mod special;
pub mod turbo;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
