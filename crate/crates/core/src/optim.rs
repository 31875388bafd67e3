//! Derivative-free minimization with seeded restarts.

use crate::error::{Error, Result};
use crate::rng::stream;
use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rand::Rng;

struct Objective<'a, F: Fn(&[f64]) -> f64> {
    f: &'a F,
}

impl<F: Fn(&[f64]) -> f64> CostFunction for Objective<'_, F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let v = (self.f)(x);
        Ok(if v.is_finite() { v } else { f64::MAX })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: u64,
}

/// Nelder–Mead from `x0` with an axis-aligned initial simplex of edge `step`.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], step: f64, max_iters: u64, tol: f64) -> Result<Minimum> {
    let mut simplex = vec![x0.to_vec()];
    for i in 0..x0.len() {
        let mut v = x0.to_vec();
        v[i] += if v[i].abs() > 1e-12 { step * v[i].abs().max(0.1) } else { step };
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(tol)
        .map_err(|e| Error::Optimizer(e.to_string()))?;
    let res = Executor::new(Objective { f }, solver)
        .configure(|s| s.max_iters(max_iters))
        .run()
        .map_err(|e| Error::Optimizer(e.to_string()))?;
    let state = res.state();
    let x = state.get_best_param().cloned().ok_or_else(|| Error::Optimizer("no best point".into()))?;
    Ok(Minimum { value: state.get_best_cost(), x, iterations: state.get_iter() })
}

/// Best of `restarts` Nelder–Mead runs. Run 0 starts at `x0`; the others
/// start at `x0` plus uniform noise of half-width `spread[i]` per coordinate,
/// drawn from independent seeded streams. Ties keep the lower restart index.
pub fn multistart<F: Fn(&[f64]) -> f64 + Sync>(
    f: &F,
    x0: &[f64],
    spread: &[f64],
    restarts: usize,
    seed: u64,
    max_iters: u64,
) -> Result<Minimum> {
    use rayon::prelude::*;
    let runs: Vec<Result<Minimum>> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let start: Vec<f64> = if r == 0 {
                x0.to_vec()
            } else {
                let mut rng = stream(seed, r as u64);
                x0.iter().zip(spread).map(|(v, s)| v + s * rng.random_range(-1.0..1.0)).collect()
            };
            nelder_mead(f, &start, 0.2, max_iters, 1e-12)
        })
        .collect();
    let mut best: Option<Minimum> = None;
    for run in runs {
        let m = run?;
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    Ok(best.expect("at least one restart"))
}
