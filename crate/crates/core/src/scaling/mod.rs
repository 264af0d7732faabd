//! Finite-size-scaling analysis of steady-state and time-dependent entropies.
//!
//! Static form: `S(p, L) = L^γ F((p - p_c) L^{1/ν})`. Dynamic form at the
//! critical point: `S(t, L) = L^γ f(t L^{-z})`. Both are fitted by minimising
//! a local-linear master-curve cost with a multi-start simplex search, and
//! error bars come from resampling trajectories.

mod cost;
mod dynamic;
mod optimize;

pub use cost::{master_curve_cost, CollapsedPoint, Curve};
pub use dynamic::{fit_dynamic_collapse, DynamicCollapse, DynamicOptions, PlateauReport, TimeSeries};
pub use optimize::{minimize, Minimum};

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::circuit::{mean_stderr, trajectory_rng, Model};
use crate::Error;

/// Steady-state entropy of one `(L, p)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub l: usize,
    pub p: f64,
    pub s_mean: f64,
    pub s_err: f64,
    pub n_samples: usize,
    /// Per-trajectory steady values, when kept. Enables trajectory bootstrap.
    pub per_trajectory: Vec<f64>,
}

impl SweepPoint {
    pub fn new(l: usize, p: f64, s_mean: f64, s_err: f64, n_samples: usize) -> Self {
        Self { l, p, s_mean, s_err, n_samples, per_trajectory: Vec::new() }
    }

    pub fn from_trajectories(l: usize, p: f64, values: Vec<f64>) -> Self {
        let (s_mean, s_err) = mean_stderr(&values);
        Self { l, p, s_mean, s_err, n_samples: values.len(), per_trajectory: values }
    }

    fn resampled(&self, rng: &mut ChaCha8Rng) -> Self {
        let (s_mean, s_err) = if self.per_trajectory.len() >= 2 {
            let n = self.per_trajectory.len();
            let draw: Vec<f64> = (0..n).map(|_| self.per_trajectory[rng.gen_range(0..n)]).collect();
            let (m, e) = mean_stderr(&draw);
            // a resample of identical values has no spread; keep the original error
            (m, if e > 0.0 { e } else { self.s_err })
        } else {
            let z: f64 = StandardNormal.sample(rng);
            (self.s_mean + z * self.s_err, self.s_err)
        };
        Self { s_mean, s_err, per_trajectory: Vec::new(), ..*self }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepDataset {
    pub model: Option<Model>,
    pub cut_fraction: f64,
    pub periods: u32,
    points: Vec<SweepPoint>,
}

impl SweepDataset {
    pub fn new(model: Option<Model>, cut_fraction: f64, periods: u32, points: Vec<SweepPoint>) -> Result<Self, Error> {
        let mut keys = BTreeSet::new();
        for pt in &points {
            if !(pt.s_err > 0.0 && pt.s_err.is_finite() && pt.s_mean.is_finite()) {
                return Err(Error::Dataset(format!("L={} p={}: need finite mean and stderr > 0", pt.l, pt.p)));
            }
            if !(0.0..=1.0).contains(&pt.p) {
                return Err(Error::Dataset(format!("p = {} outside [0, 1]", pt.p)));
            }
            if !keys.insert((pt.l, pt.p.to_bits())) {
                return Err(Error::Dataset(format!("duplicate cell L={} p={}", pt.l, pt.p)));
            }
        }
        Ok(Self { model, cut_fraction, periods, points })
    }

    pub fn points(&self) -> &[SweepPoint] {
        &self.points
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.l).collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let mut ps: Vec<f64> = self.points.iter().map(|p| p.p).collect();
        ps.sort_by(f64::total_cmp);
        ps.dedup();
        ps
    }

    /// Keeps cells with `lo <= p <= hi` and `L` in `sizes` (all sizes if empty).
    pub fn restrict(&self, window: (f64, f64), sizes: &[usize]) -> Self {
        let eps = 1e-12;
        let points = self
            .points
            .iter()
            .filter(|pt| pt.p >= window.0 - eps && pt.p <= window.1 + eps)
            .filter(|pt| sizes.is_empty() || sizes.contains(&pt.l))
            .cloned()
            .collect();
        Self { points, ..self.clone() }
    }

    fn resampled(&self, rng: &mut ChaCha8Rng) -> Self {
        Self { points: self.points.iter().map(|pt| pt.resampled(rng)).collect(), ..self.clone() }
    }

    fn curves(&self, p_c: f64, nu: f64, gamma: f64) -> Vec<Curve> {
        self.sizes()
            .into_iter()
            .map(|l| {
                let lf = l as f64;
                let scale_y = lf.powf(-gamma);
                let scale_x = lf.powf(1.0 / nu);
                let pts = self
                    .points
                    .iter()
                    .filter(|pt| pt.l == l)
                    .map(|pt| CollapsedPoint { x: (pt.p - p_c) * scale_x, y: pt.s_mean * scale_y, dy: pt.s_err * scale_y })
                    .collect();
                Curve::new(l, pts)
            })
            .collect()
    }
}

/// Collapse cost of the static scaling form at `(p_c, ν, γ)`.
pub fn collapse_cost(data: &SweepDataset, p_c: f64, nu: f64, gamma: f64) -> Result<f64, Error> {
    if !(nu > 0.0) || !(0.0..=1.0).contains(&gamma) || !(0.0 < p_c && p_c < 1.0) {
        return Err(Error::Fit(format!("parameters out of range: p_c={p_c} nu={nu} gamma={gamma}")));
    }
    if data.sizes().len() < 2 {
        return Err(Error::Fit("collapse needs at least two sizes".into()));
    }
    master_curve_cost(&data.curves(p_c, nu, gamma))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Central 95% percentile interval of `samples`, widened to include `estimate`.
    pub fn percentile(samples: &[f64], estimate: f64) -> Self {
        let mut s: Vec<f64> = samples.iter().copied().filter(|v| v.is_finite()).collect();
        if s.is_empty() {
            return Self { lo: estimate, hi: estimate };
        }
        s.sort_by(f64::total_cmp);
        let at = |q: f64| s[((q * (s.len() - 1) as f64).round() as usize).min(s.len() - 1)];
        Self { lo: at(0.025).min(estimate), hi: at(0.975).max(estimate) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StaticFitOptions {
    pub p_window: (f64, f64),
    pub p_c_bounds: (f64, f64),
    pub nu_bounds: (f64, f64),
    pub gamma_bounds: (f64, f64),
    /// First simplex start as `[p_c, ν, γ]`; random restarts are added.
    pub start: [f64; 3],
    pub restarts: usize,
    pub bootstrap: usize,
    /// Random restarts per bootstrap replicate, on top of the point estimate.
    pub bootstrap_restarts: usize,
    pub seed: u64,
}

impl StaticFitOptions {
    pub fn for_window(p_window: (f64, f64)) -> Self {
        let (lo, hi) = p_window;
        let margin = 0.1 * (hi - lo);
        Self {
            p_window,
            p_c_bounds: (lo + margin, hi - margin),
            nu_bounds: (0.5, 5.0),
            gamma_bounds: (0.0, 1.0),
            start: [0.5 * (lo + hi), 1.5, 0.5],
            restarts: 20,
            bootstrap: 1000,
            bootstrap_restarts: 2,
            seed: 0,
        }
    }

    /// Default window for a Clifford model.
    pub fn for_model(model: Model) -> Self {
        match model {
            Model::B2 | Model::A2 => Self::for_window((0.3, 1.0)),
            Model::B1 | Model::A1 => Self::for_window((0.05, 0.3)),
        }
    }

    fn bounds(&self) -> [(f64, f64); 3] {
        [self.p_c_bounds, self.nu_bounds, self.gamma_bounds]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollapseResult {
    pub p_c: f64,
    pub nu: f64,
    pub gamma: f64,
    /// Dynamic exponent, when a dynamic collapse has been attached.
    pub z: Option<f64>,
    pub cost: f64,
    pub p_c_ci: Interval,
    pub nu_ci: Interval,
    pub gamma_ci: Interval,
    pub z_ci: Option<Interval>,
    pub p_window: (f64, f64),
    pub sizes: Vec<usize>,
    pub n_points: usize,
    /// Names of parameters whose optimum sits on a search bound.
    pub at_bound: Vec<&'static str>,
    pub converged_starts: usize,
    pub starts: usize,
    /// Bootstrap replicates as `[p_c, ν, γ]`.
    pub bootstrap: Vec<[f64; 3]>,
    pub bootstrap_z: Vec<f64>,
}

impl CollapseResult {
    pub fn with_dynamic(mut self, d: &DynamicCollapse) -> Self {
        self.z = Some(d.z);
        self.z_ci = Some(d.z_ci);
        self.bootstrap_z = d.bootstrap_z.clone();
        self
    }

    /// Flat `key = value` report.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let iv = |i: &Interval| format!("[{:.4}, {:.4}]", i.lo, i.hi);
        out += &format!("p_c = {:.4}\np_c_ci = {}\n", self.p_c, iv(&self.p_c_ci));
        out += &format!("nu = {:.4}\nnu_ci = {}\n", self.nu, iv(&self.nu_ci));
        out += &format!("gamma = {:.4}\ngamma_ci = {}\n", self.gamma, iv(&self.gamma_ci));
        if let (Some(z), Some(ci)) = (self.z, self.z_ci) {
            out += &format!("z = {z:.4}\nz_ci = {}\n", iv(&ci));
        }
        out += &format!("cost = {:.6}\n", self.cost);
        out += &format!("p_window = [{}, {}]\n", self.p_window.0, self.p_window.1);
        let sizes: Vec<String> = self.sizes.iter().map(|l| l.to_string()).collect();
        out += &format!("sizes = {}\nn_points = {}\n", sizes.join(","), self.n_points);
        out += &format!("at_bound = {}\n", self.at_bound.join(","));
        out += &format!("converged_starts = {}/{}\nbootstrap = {}\n", self.converged_starts, self.starts, self.bootstrap.len());
        out
    }
}

fn static_cost(d: &SweepDataset) -> impl Fn(&[f64]) -> Result<f64, Error> + Sync + '_ {
    move |q| collapse_cost(d, q[0], q[1], q[2])
}

const PARAM_NAMES: [&str; 3] = ["p_c", "nu", "gamma"];

/// Fits `(p_c, ν, γ)` by minimising [`collapse_cost`] inside the window.
pub fn fit_static_collapse(data: &SweepDataset, opts: &StaticFitOptions) -> Result<CollapseResult, Error> {
    let window = data.restrict(opts.p_window, &[]);
    let sizes = window.sizes();
    if sizes.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 sizes in the window, have {}", sizes.len())));
    }
    let bounds = opts.bounds();
    let best = minimize(&static_cost(&window), &bounds, &opts.start, opts.restarts, opts.seed)?;
    let est = [best.params[0], best.params[1], best.params[2]];

    let replicates: Vec<[f64; 3]> = (0..opts.bootstrap as u64)
        .into_par_iter()
        .filter_map(|b| {
            let mut rng = trajectory_rng(opts.seed ^ 0x5eed_b007, b);
            let d = window.resampled(&mut rng);
            let m = minimize(&static_cost(&d), &bounds, &est, opts.bootstrap_restarts, b).ok()?;
            Some([m.params[0], m.params[1], m.params[2]])
        })
        .collect();
    let column = |k: usize| replicates.iter().map(|r| r[k]).collect::<Vec<_>>();
    Ok(CollapseResult {
        p_c: est[0],
        nu: est[1],
        gamma: est[2],
        z: None,
        cost: best.cost,
        p_c_ci: Interval::percentile(&column(0), est[0]),
        nu_ci: Interval::percentile(&column(1), est[1]),
        gamma_ci: Interval::percentile(&column(2), est[2]),
        z_ci: None,
        p_window: opts.p_window,
        sizes,
        n_points: window.points.len(),
        at_bound: best.at_bound.iter().zip(PARAM_NAMES).filter(|(b, _)| **b).map(|(_, n)| n).collect(),
        converged_starts: best.converged_starts,
        starts: best.starts,
        bootstrap: replicates,
        bootstrap_z: Vec::new(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub ci: Interval,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DerivedExponents {
    /// `(1 - γ) ν`, the large-negative-x exponent of F.
    pub volume_side: Estimate,
    /// `γ ν`, the large-positive-x decay exponent of F.
    pub area_side: Estimate,
    /// `ν (z - γ)`, the entanglement-velocity exponent.
    pub velocity: Option<Estimate>,
}

/// Exponent combinations with intervals propagated through the bootstrap
/// replicates (z replicates are paired by index).
pub fn derived_exponents(r: &CollapseResult) -> DerivedExponents {
    let estimate = |f: &dyn Fn(f64, f64, f64) -> f64, z: f64, zs: &[f64]| {
        let value = f(r.nu, r.gamma, z);
        let samples: Vec<f64> = r
            .bootstrap
            .iter()
            .enumerate()
            .map(|(k, b)| f(b[1], b[2], if zs.is_empty() { z } else { zs[k % zs.len()] }))
            .collect();
        Estimate { value, ci: Interval::percentile(&samples, value) }
    };
    DerivedExponents {
        volume_side: estimate(&|nu, g, _| (1.0 - g) * nu, 0.0, &[]),
        area_side: estimate(&|nu, g, _| g * nu, 0.0, &[]),
        velocity: r.z.map(|z| estimate(&|nu, g, z| nu * (z - g), z, &r.bootstrap_z)),
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Shape of `log S` against `log L` at one measurement rate.
#[derive(Clone, Debug, PartialEq)]
pub struct SlopeReport {
    pub p: f64,
    pub sizes: Vec<usize>,
    /// Slopes between consecutive sizes.
    pub local_slopes: Vec<f64>,
    /// Least-squares slope over the largest `top` sizes.
    pub top_slope: f64,
    /// Second derivative of the least-squares parabola in `log L`; positive
    /// means concave up. Zero with only two sizes.
    pub curvature: f64,
}

/// Quadratic least-squares coefficient `c` of `y = a + b x + c x^2`.
fn quadratic_coefficient(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 3 {
        return None;
    }
    // centre x for conditioning
    let mx = x.iter().sum::<f64>() / x.len() as f64;
    let mut m = [[0.0f64; 3]; 3];
    let mut v = [0.0f64; 3];
    for (&xi, &yi) in x.iter().zip(y) {
        let u = xi - mx;
        let basis = [1.0, u, u * u];
        for r in 0..3 {
            v[r] += basis[r] * yi;
            for c in 0..3 {
                m[r][c] += basis[r] * basis[c];
            }
        }
    }
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det3(&m);
    if d.abs() < 1e-300 {
        return None;
    }
    let mut mc = m;
    for r in 0..3 {
        mc[r][2] = v[r];
    }
    Some(det3(&mc) / d)
}

/// Per-p log-log slopes of the steady entropy against system size.
/// Rates with fewer than `top.max(2)` sizes or a non-positive entropy are skipped.
pub fn side_diagnostics(data: &SweepDataset, top: usize) -> Vec<SlopeReport> {
    let top = top.max(2);
    data.probabilities()
        .into_iter()
        .filter_map(|p| {
            let mut cells: Vec<&SweepPoint> = data.points.iter().filter(|pt| pt.p == p).collect();
            cells.sort_by_key(|pt| pt.l);
            if cells.len() < top || cells.iter().any(|pt| pt.s_mean <= 0.0) {
                return None;
            }
            let lx: Vec<f64> = cells.iter().map(|pt| (pt.l as f64).ln()).collect();
            let ly: Vec<f64> = cells.iter().map(|pt| pt.s_mean.ln()).collect();
            let local_slopes: Vec<f64> = (1..cells.len()).map(|k| (ly[k] - ly[k - 1]) / (lx[k] - lx[k - 1])).collect();
            let from = cells.len() - top;
            let (top_slope, _) = linear_fit(&lx[from..], &ly[from..])?;
            let curvature = quadratic_coefficient(&lx, &ly).map_or(0.0, |c| 2.0 * c);
            Some(SlopeReport { p, sizes: cells.iter().map(|pt| pt.l).collect(), local_slopes, top_slope, curvature })
        })
        .collect()
}

/// Log-log slopes of the collapsed master curve's tails, `|x| > x_cut`
/// on each side: expected near `(1-γ)ν` on the left and `-γν` on the right.
/// Only reported, since the tails of a finite sweep are short.
pub fn master_curve_tails(data: &SweepDataset, r: &CollapseResult, x_cut: f64) -> (Option<f64>, Option<f64>) {
    let window = data.restrict(r.p_window, &[]);
    let pts: Vec<CollapsedPoint> = window.curves(r.p_c, r.nu, r.gamma).into_iter().flat_map(|c| c.points).collect();
    let side = |sign: f64| {
        let (x, y): (Vec<f64>, Vec<f64>) =
            pts.iter().filter(|q| sign * q.x > x_cut && q.y > 0.0).map(|q| ((sign * q.x).ln(), q.y.ln())).unzip();
        linear_fit(&x, &y).map(|(s, _)| s)
    };
    (side(-1.0), side(1.0))
}

/// `S = a ln(L_A) + b L_A`, fitted by least squares without intercept.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogLinearFit {
    pub a: f64,
    pub b: f64,
    pub residual: f64,
}

/// Comparison fit of the logarithm-plus-linear form against `(L_A, S)` pairs.
pub fn fit_log_linear(points: &[(f64, f64)]) -> Option<LogLinearFit> {
    let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(la, s) in points {
        let (f1, f2) = (la.ln(), la);
        s11 += f1 * f1;
        s12 += f1 * f2;
        s22 += f2 * f2;
        t1 += f1 * s;
        t2 += f2 * s;
    }
    let det = s11 * s22 - s12 * s12;
    if points.len() < 2 || det.abs() < 1e-12 {
        return None;
    }
    let a = (t1 * s22 - t2 * s12) / det;
    let b = (s11 * t2 - s12 * t1) / det;
    let residual = points.iter().map(|&(la, s)| (s - a * la.ln() - b * la).powi(2)).sum();
    Some(LogLinearFit { a, b, residual })
}

/// Deterministic Gaussian noise helper shared with the dynamic fit.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

#[cfg(test)]
mod tests;
