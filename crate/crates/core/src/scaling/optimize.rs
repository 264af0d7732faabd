//! Bounded multi-start Nelder–Mead on top of argmin.

use argmin::core::{CostFunction, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::trajectory_rng;
use crate::Error;

/// Cost returned outside the box; large enough that the simplex always retreats.
const OUT_OF_BOUNDS: f64 = 1e12;
const MAX_ITERS: u64 = 4000;
const SD_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub params: Vec<f64>,
    pub cost: f64,
    /// Parameters within 1% of the box width of a bound.
    pub at_bound: Vec<bool>,
    pub converged_starts: usize,
    pub starts: usize,
}

struct Boxed<'a, F> {
    f: &'a F,
    bounds: &'a [(f64, f64)],
}

impl<F: Fn(&[f64]) -> Result<f64, Error> + Sync> CostFunction for Boxed<'_, F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> Result<f64, argmin::core::Error> {
        let outside: f64 = p
            .iter()
            .zip(self.bounds)
            .map(|(&v, &(lo, hi))| if v < lo { lo - v } else if v > hi { v - hi } else { 0.0 })
            .sum();
        if outside > 0.0 {
            return Ok(OUT_OF_BOUNDS * (1.0 + outside));
        }
        // undefined cost (too little overlap) is treated like leaving the box
        Ok((self.f)(p).unwrap_or(OUT_OF_BOUNDS))
    }
}

fn run_one<F>(f: &F, bounds: &[(f64, f64)], start: &[f64]) -> Option<(Vec<f64>, f64, bool)>
where
    F: Fn(&[f64]) -> Result<f64, Error> + Sync,
{
    let mut simplex = vec![start.to_vec()];
    for (k, &(lo, hi)) in bounds.iter().enumerate() {
        let mut v = start.to_vec();
        let step = 0.1 * (hi - lo);
        v[k] = if v[k] + step <= hi { v[k] + step } else { v[k] - step };
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(SD_TOLERANCE).ok()?;
    let res = Executor::new(Boxed { f, bounds }, solver).configure(|s| s.max_iters(MAX_ITERS)).run().ok()?;
    let state = res.state();
    let best = state.get_best_param()?.clone();
    let converged = matches!(state.get_termination_status(), TerminationStatus::Terminated(TerminationReason::SolverConverged));
    Some((best, state.get_best_cost(), converged))
}

/// Minimises `f` inside `bounds` from `start` plus `restarts` uniformly drawn
/// starting points; the lowest cost wins.
pub fn minimize<F>(f: &F, bounds: &[(f64, f64)], start: &[f64], restarts: usize, seed: u64) -> Result<Minimum, Error>
where
    F: Fn(&[f64]) -> Result<f64, Error> + Sync,
{
    let mut starts = vec![start.to_vec()];
    let mut rng: ChaCha8Rng = trajectory_rng(seed, u64::MAX);
    for _ in 0..restarts {
        starts.push(bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect());
    }
    let results: Vec<_> = starts.par_iter().map(|s| run_one(f, bounds, s)).collect();
    let converged_starts = results.iter().flatten().filter(|r| r.2).count();
    let (params, cost, _) = results
        .into_iter()
        .flatten()
        .filter(|r| r.1 < OUT_OF_BOUNDS)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Fit(format!("no start of {} found a defined cost inside the bounds", starts.len())))?;
    if converged_starts == 0 {
        return Err(Error::Fit(format!(
            "simplex did not converge from any of {} starts; best cost {cost:.4e} at {params:?}",
            starts.len()
        )));
    }
    let at_bound = params.iter().zip(bounds).map(|(&v, &(lo, hi))| v - lo < 0.01 * (hi - lo) || hi - v < 0.01 * (hi - lo)).collect();
    Ok(Minimum { params, cost, at_bound, converged_starts, starts: starts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_rosenbrock_minimum() {
        let f = |p: &[f64]| Ok((1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2));
        let m = minimize(&f, &[(-2.0, 2.0), (-1.0, 3.0)], &[-1.5, 2.0], 5, 1).unwrap();
        assert!((m.params[0] - 1.0).abs() < 1e-3 && (m.params[1] - 1.0).abs() < 1e-3, "{m:?}");
        assert_eq!(m.at_bound, vec![false, false]);
    }

    #[test]
    fn flags_minimum_on_the_boundary() {
        let f = |p: &[f64]| Ok((p[0] - 5.0).powi(2));
        let m = minimize(&f, &[(0.0, 1.0)], &[0.5], 3, 2).unwrap();
        assert!(m.params[0] > 0.99);
        assert_eq!(m.at_bound, vec![true]);
    }

    #[test]
    fn undefined_everywhere_is_an_error() {
        let f = |_: &[f64]| Err(Error::Fit("nope".into()));
        assert!(minimize(&f, &[(0.0, 1.0)], &[0.5], 2, 3).is_err());
    }
}
