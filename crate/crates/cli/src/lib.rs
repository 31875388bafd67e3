//! Configuration-driven experiment runner for `ftn-tbp`.
//!
//! A run expands a JSON configuration into grid points, evaluates them on a
//! worker pool with per-point seeds `derive_seed(seed, index)` and writes a
//! CSV plus a JSON manifest.

pub mod config;
pub mod experiments;
pub mod oracles;
pub mod runner;
pub mod selftest;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CONFIG: u8 = 1;
    pub const NUMERIC: u8 = 2;
    pub const SELFTEST: u8 = 3;
}
