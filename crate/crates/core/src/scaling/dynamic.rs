//! Dynamic collapse `S(t, L) = L^γ f(t L^{-z})` at the critical point.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{gaussian, linear_fit, master_curve_cost, minimize, CollapsedPoint, Curve, Interval};
use crate::circuit::{mean_stderr, trajectory_rng};
use crate::Error;

/// Mean entropy against time for one system size.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub l: usize,
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Per-trajectory series aligned with `times`, when kept.
    pub trajectories: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn from_trajectories(l: usize, times: Vec<f64>, trajectories: Vec<Vec<f64>>) -> Self {
        let (mean, stderr) = (0..times.len())
            .map(|k| mean_stderr(&trajectories.iter().map(|t| t[k]).collect::<Vec<_>>()))
            .unzip();
        Self { l, times, mean, stderr, trajectories }
    }

    fn resampled(&self, rng: &mut ChaCha8Rng) -> Self {
        let n = self.trajectories.len();
        if n >= 2 {
            let pick: Vec<Vec<f64>> = (0..n).map(|_| self.trajectories[rng.gen_range(0..n)].clone()).collect();
            let mut out = Self::from_trajectories(self.l, self.times.clone(), pick);
            out.trajectories.clear();
            for (e, orig) in out.stderr.iter_mut().zip(&self.stderr) {
                if !(*e > 0.0) {
                    *e = *orig;
                }
            }
            out
        } else {
            let mean = self.mean.iter().zip(&self.stderr).map(|(m, e)| m + gaussian(rng) * e).collect();
            Self { mean, trajectories: Vec::new(), ..self.clone() }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicOptions {
    /// Static exponent γ, held fixed.
    pub gamma: f64,
    pub z_bounds: (f64, f64),
    pub z_start: f64,
    /// Times below this are left out of the collapse (t = 0 has S = 0 for every L).
    pub t_min: f64,
    /// Collapse window upper edge in `x = t L^{-z}`; `None` keeps every time.
    pub x_max: Option<f64>,
    /// Time window of the early-growth power law, applied to the largest size.
    pub growth_window: (f64, f64),
    /// Relative tolerance defining the plateau of `f`.
    pub plateau_tolerance: f64,
    pub restarts: usize,
    pub bootstrap: usize,
    pub seed: u64,
}

impl DynamicOptions {
    pub fn new(gamma: f64) -> Self {
        Self {
            gamma,
            z_bounds: (0.3, 3.0),
            z_start: 1.5,
            t_min: 1.0,
            x_max: None,
            growth_window: (2.0, 16.0),
            plateau_tolerance: 0.05,
            restarts: 20,
            bootstrap: 1000,
            seed: 0,
        }
    }
}

/// Where the collapsed curve of each size reaches its plateau.
#[derive(Clone, Debug, PartialEq)]
pub struct PlateauReport {
    /// `(L, x*)`: beyond `x*` every point stays within tolerance of the plateau.
    pub onsets: Vec<(usize, f64)>,
    /// `(L, plateau height)` in collapsed units.
    pub heights: Vec<(usize, f64)>,
    /// Largest onset over sizes.
    pub threshold: f64,
    /// Largest over smallest onset.
    pub onset_ratio: f64,
    /// Relative spread of the plateau heights across sizes.
    pub height_spread: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicCollapse {
    pub gamma: f64,
    pub z: f64,
    pub z_ci: Interval,
    pub cost: f64,
    pub at_bound: bool,
    /// Power-law exponent of `S(t)` for the largest size in the growth window.
    pub growth_exponent: f64,
    pub growth_ci: Interval,
    pub plateau: PlateauReport,
    pub bootstrap_z: Vec<f64>,
}

fn curves(series: &[TimeSeries], gamma: f64, z: f64, opts: &DynamicOptions) -> Vec<Curve> {
    series
        .iter()
        .map(|s| {
            let lf = s.l as f64;
            let (sx, sy) = (lf.powf(-z), lf.powf(-gamma));
            let pts = (0..s.times.len())
                .filter(|&k| s.times[k] >= opts.t_min)
                .map(|k| CollapsedPoint { x: s.times[k] * sx, y: s.mean[k] * sy, dy: s.stderr[k] * sy })
                .filter(|q| opts.x_max.is_none_or(|m| q.x <= m))
                .collect();
            Curve::new(s.l, pts)
        })
        .collect()
}

fn growth_exponent(series: &TimeSeries, window: (f64, f64)) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = series
        .times
        .iter()
        .zip(&series.mean)
        .filter(|(t, m)| **t >= window.0 && **t <= window.1 && **m > 0.0)
        .map(|(t, m)| (t.ln(), m.ln()))
        .unzip();
    linear_fit(&x, &y).map(|(s, _)| s)
}

fn plateau(series: &[TimeSeries], gamma: f64, z: f64, tol: f64) -> PlateauReport {
    let mut onsets = Vec::new();
    let mut heights = Vec::new();
    for s in series {
        let lf = s.l as f64;
        let (sx, sy) = (lf.powf(-z), lf.powf(-gamma));
        let n = s.times.len();
        let tail_from = s.times.partition_point(|&t| t < 0.8 * s.times[n - 1]);
        let tail = &s.mean[tail_from.min(n - 1)..];
        let h = tail.iter().sum::<f64>() / tail.len() as f64;
        // scan backwards for the last point outside the band
        let mut onset = s.times[0] * sx;
        for k in (0..n).rev() {
            let band = (tol * h).max(3.0 * s.stderr[k]);
            if (s.mean[k] - h).abs() > band {
                onset = s.times[(k + 1).min(n - 1)] * sx;
                break;
            }
        }
        onsets.push((s.l, onset));
        heights.push((s.l, h * sy));
    }
    let max_on = onsets.iter().map(|o| o.1).fold(f64::MIN, f64::max);
    let min_on = onsets.iter().map(|o| o.1).fold(f64::MAX, f64::min);
    let hs: Vec<f64> = heights.iter().map(|h| h.1).collect();
    let hmax = hs.iter().copied().fold(f64::MIN, f64::max);
    let hmin = hs.iter().copied().fold(f64::MAX, f64::min);
    PlateauReport {
        onsets,
        heights,
        threshold: max_on,
        onset_ratio: max_on / min_on,
        height_spread: (hmax - hmin) / (0.5 * (hmax + hmin)),
    }
}

/// Fits `z` at fixed γ, then reports the early-time growth exponent and
/// the plateau onset of the collapsed curve.
pub fn fit_dynamic_collapse(series: &[TimeSeries], opts: &DynamicOptions) -> Result<DynamicCollapse, Error> {
    if series.len() < 3 {
        return Err(Error::Fit(format!("dynamic collapse needs at least 3 sizes, have {}", series.len())));
    }
    for s in series {
        if s.times.is_empty() || s.times.len() != s.mean.len() || s.mean.len() != s.stderr.len() {
            return Err(Error::Dataset(format!("L={}: ragged time series", s.l)));
        }
        if s.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Dataset(format!("L={}: times not increasing", s.l)));
        }
        if s.stderr.iter().zip(&s.times).any(|(e, t)| *t >= opts.t_min && !(*e > 0.0)) {
            return Err(Error::Dataset(format!("L={}: stderr must be positive in the fit window", s.l)));
        }
    }
    let largest = series.iter().max_by_key(|s| s.l).unwrap();
    let cost_of = |d: &[TimeSeries]| {
        let d = d.to_vec();
        move |q: &[f64]| master_curve_cost(&curves(&d, opts.gamma, q[0], opts))
    };
    let best = minimize(&cost_of(series), &[opts.z_bounds], &[opts.z_start], opts.restarts, opts.seed)?;
    let z = best.params[0];
    let growth = growth_exponent(largest, opts.growth_window)
        .ok_or_else(|| Error::Fit(format!("fewer than two positive points in growth window {:?}", opts.growth_window)))?;

    let replicates: Vec<(f64, f64)> = (0..opts.bootstrap as u64)
        .into_par_iter()
        .filter_map(|b| {
            let mut rng = trajectory_rng(opts.seed ^ 0xd1a_b007, b);
            let d: Vec<TimeSeries> = series.iter().map(|s| s.resampled(&mut rng)).collect();
            let m = minimize(&cost_of(&d), &[opts.z_bounds], &[z], 1, b).ok()?;
            let big = d.iter().max_by_key(|s| s.l)?;
            Some((m.params[0], growth_exponent(big, opts.growth_window)?))
        })
        .collect();
    let boot_z: Vec<f64> = replicates.iter().map(|r| r.0).collect();
    let boot_g: Vec<f64> = replicates.iter().map(|r| r.1).collect();
    Ok(DynamicCollapse {
        gamma: opts.gamma,
        z,
        z_ci: Interval::percentile(&boot_z, z),
        cost: best.cost,
        at_bound: best.at_bound[0],
        growth_exponent: growth,
        growth_ci: Interval::percentile(&boot_g, growth),
        plateau: plateau(series, opts.gamma, z, opts.plateau_tolerance),
        bootstrap_z: boot_z,
    })
}
