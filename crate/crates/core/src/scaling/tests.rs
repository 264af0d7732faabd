use super::*;
use rand::SeedableRng;

const SIZES: [usize; 4] = [32, 64, 128, 256];

fn master(x: f64) -> f64 {
    1.5 + 1.2 * (-0.8 * x).tanh()
}

fn planted(p_c: f64, nu: f64, gamma: f64, noise: f64, seed: u64) -> SweepDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    for &l in &SIZES {
        for k in 0..=20 {
            let p = 0.05 + 0.0125 * k as f64;
            let lf = l as f64;
            let s = lf.powf(gamma) * master((p - p_c) * lf.powf(1.0 / nu));
            // errors stay at 2% even for clean data so that interpolation error is weighed sensibly
            let err = 0.02 * s;
            let value = s + noise * s * gaussian(&mut rng);
            points.push(SweepPoint::new(l, p, value, err, 100));
        }
    }
    SweepDataset::new(None, 0.25, 600, points).unwrap()
}

#[test]
fn cost_is_lowest_at_planted_parameters() {
    let d = planted(0.15, 1.8, 0.3, 0.0, 0);
    let truth = collapse_cost(&d, 0.15, 1.8, 0.3).unwrap();
    // noise-free data: only interpolation error remains, far below the O(1) noise floor
    assert!(truth < 0.05, "{truth}");
    for (p_c, nu, gamma) in [(0.16, 1.8, 0.3), (0.14, 1.8, 0.3), (0.15, 2.2, 0.3), (0.15, 1.5, 0.3), (0.15, 1.8, 0.35), (0.15, 1.8, 0.25)] {
        assert!(collapse_cost(&d, p_c, nu, gamma).unwrap() > truth, "({p_c}, {nu}, {gamma})");
    }
}

#[test]
fn single_size_has_no_cost() {
    let d = planted(0.15, 1.8, 0.3, 0.0, 0).restrict((0.0, 1.0), &[64]);
    assert!(collapse_cost(&d, 0.15, 1.8, 0.3).is_err());
}

#[test]
fn flat_data_is_degenerate_in_nu() {
    let points = SIZES.iter().flat_map(|&l| (0..10).map(move |k| SweepPoint::new(l, 0.1 + 0.02 * k as f64, 2.0, 0.01, 10))).collect();
    let d = SweepDataset::new(None, 0.25, 600, points).unwrap();
    for nu in [0.7, 1.3, 2.9] {
        assert!(collapse_cost(&d, 0.2, nu, 0.0).unwrap() < 1e-20);
    }
}

#[test]
fn cost_ignores_record_order() {
    let d = planted(0.15, 1.8, 0.3, 0.02, 4);
    let mut shuffled: Vec<SweepPoint> = d.points().to_vec();
    shuffled.reverse();
    shuffled.rotate_left(17);
    let e = SweepDataset::new(None, 0.25, 600, shuffled).unwrap();
    let (a, b) = (collapse_cost(&d, 0.17, 1.6, 0.4).unwrap(), collapse_cost(&e, 0.17, 1.6, 0.4).unwrap());
    assert!((a - b).abs() <= 1e-12 * a.abs());
}

#[test]
fn cost_is_continuous_in_p_c() {
    let d = planted(0.15, 1.8, 0.3, 0.02, 5);
    let mut prev = collapse_cost(&d, 0.10, 1.8, 0.3).unwrap();
    for k in 1..=200 {
        let c = collapse_cost(&d, 0.10 + 0.0005 * k as f64, 1.8, 0.3).unwrap();
        assert!((c - prev).abs() < 0.5 * (c + prev) + 0.5, "jump at step {k}: {prev} -> {c}");
        prev = c;
    }
}

#[test]
fn dataset_rejects_bad_records() {
    assert!(SweepDataset::new(None, 0.25, 1, vec![SweepPoint::new(8, 0.1, 1.0, 0.0, 3)]).is_err());
    let dup = vec![SweepPoint::new(8, 0.1, 1.0, 0.1, 3), SweepPoint::new(8, 0.1, 1.2, 0.1, 3)];
    assert!(SweepDataset::new(None, 0.25, 1, dup).is_err());
}

#[test]
fn fitter_recovers_planted_exponents() {
    let (p_c, nu, gamma) = (0.15, 1.8, 0.3);
    let d = planted(p_c, nu, gamma, 0.02, 11);
    let mut opts = StaticFitOptions::for_window((0.05, 0.3));
    opts.bootstrap = 200;
    let r = fit_static_collapse(&d, &opts).unwrap();
    assert!(r.p_c_ci.contains(p_c), "{}", r.report());
    assert!(r.nu_ci.contains(nu), "{}", r.report());
    assert!(r.gamma_ci.contains(gamma), "{}", r.report());
    assert!(r.at_bound.is_empty());
    assert!(r.p_c_ci.contains(r.p_c) && r.nu_ci.contains(r.nu) && r.gamma_ci.contains(r.gamma));
}

#[test]
fn trajectory_bootstrap_uses_raw_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pt = SweepPoint::from_trajectories(16, 0.2, (0..50).map(|k| (k % 7) as f64).collect());
    let r = pt.resampled(&mut rng);
    assert!(r.s_mean >= 0.0 && r.s_mean <= 6.0);
    assert_ne!(r.s_mean, pt.s_mean);
}

#[test]
fn derived_exponent_arithmetic() {
    let d = planted(0.15, 1.8, 0.3, 0.02, 1);
    let mut opts = StaticFitOptions::for_window((0.05, 0.3));
    opts.bootstrap = 20;
    let mut r = fit_static_collapse(&d, &opts).unwrap();
    r.nu = 1.85;
    r.gamma = 0.30;
    r.z = Some(1.0);
    let e = derived_exponents(&r);
    assert!((e.volume_side.value - 1.295).abs() < 1e-12);
    assert!((e.area_side.value - 0.555).abs() < 1e-12);
    assert!((e.velocity.unwrap().value - 1.295).abs() < 1e-12);
    r.gamma = 1.0;
    assert_eq!(derived_exponents(&r).volume_side.value, 0.0);
}

#[test]
fn slopes_separate_volume_and_area_laws() {
    let mut points = Vec::new();
    for &l in &SIZES {
        points.push(SweepPoint::new(l, 0.05, 0.25 * l as f64 + 2.0, 0.1, 10));
        points.push(SweepPoint::new(l, 0.3, 3.0 - 40.0 / l as f64, 0.1, 10));
    }
    let d = SweepDataset::new(None, 0.25, 600, points).unwrap();
    let r = side_diagnostics(&d, 2);
    assert_eq!(r.len(), 2);
    assert!(r[0].curvature > 0.0);
    assert!((r[0].top_slope - 1.0).abs() < 0.1);
    assert!(r[1].curvature < 0.0);
    assert!(r[1].top_slope.abs() < 0.15);
}

#[test]
fn parabola_coefficient_is_exact() {
    let x = [1.0, 2.0, 3.0, 5.0];
    let y: Vec<f64> = x.iter().map(|v| 1.0 - 2.0 * v + 0.75 * v * v).collect();
    assert!((quadratic_coefficient(&x, &y).unwrap() - 0.75).abs() < 1e-9);
}

#[test]
fn log_linear_fit_is_exact_on_its_own_form() {
    let pts: Vec<(f64, f64)> = [4.0, 8.0, 16.0, 32.0, 64.0].iter().map(|&la: &f64| (la, 0.7 * la.ln() + 0.05 * la)).collect();
    let f = fit_log_linear(&pts).unwrap();
    assert!((f.a - 0.7).abs() < 1e-10 && (f.b - 0.05).abs() < 1e-10 && f.residual < 1e-18);
}

#[test]
fn tails_follow_the_master_curve() {
    // F ~ |x|^{(1-γ)ν} on the left: plant exactly that
    let (p_c, nu, gamma) = (0.2, 1.5, 0.4);
    let points = SIZES
        .iter()
        .flat_map(|&l| {
            (0..=12).map(move |k| {
                let p = 0.05 + 0.025 * k as f64;
                let x = (p - p_c) * (l as f64).powf(1.0 / nu);
                let f = if x < 0.0 { (-x).powf((1.0 - gamma) * nu) } else { 1.0 };
                SweepPoint::new(l, p, (l as f64).powf(gamma) * (f + 1e-3), 1e-3, 10)
            })
        })
        .collect();
    let d = SweepDataset::new(None, 0.25, 600, points).unwrap();
    let mut opts = StaticFitOptions::for_window((0.05, 0.35));
    opts.bootstrap = 0;
    let mut r = fit_static_collapse(&d, &opts).unwrap();
    (r.p_c, r.nu, r.gamma) = (p_c, nu, gamma);
    let (left, _) = master_curve_tails(&d, &r, 1.0);
    assert!((left.unwrap() - (1.0 - gamma) * nu).abs() < 0.05, "{left:?}");
}

fn planted_series(gamma: f64, z: f64, noise: f64, seed: u64) -> Vec<TimeSeries> {
    let a = gamma / z;
    let f = |x: f64| x.powf(a) / (1.0 + x.powf(4.0 * a)).powf(0.25);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SIZES
        .iter()
        .map(|&l| {
            let step = (l / 32).max(1);
            let times: Vec<f64> = (1..=3 * l).filter(|t| *t <= 32 || t % step == 0).map(|t| t as f64).collect();
            let lf = l as f64;
            let clean: Vec<f64> = times.iter().map(|t| lf.powf(gamma) * f(t * lf.powf(-z))).collect();
            let stderr: Vec<f64> = clean.iter().map(|s| noise * s).collect();
            let mean = clean.iter().zip(&stderr).map(|(s, e)| s + e * gaussian(&mut rng)).collect();
            TimeSeries { l, times, mean, stderr, trajectories: Vec::new() }
        })
        .collect()
}

#[test]
fn dynamic_fit_recovers_planted_z_and_growth() {
    let series = planted_series(1.0 / 3.0, 1.0, 0.01, 9);
    let mut opts = DynamicOptions::new(1.0 / 3.0);
    opts.bootstrap = 100;
    opts.growth_window = (2.0, 16.0);
    let r = fit_dynamic_collapse(&series, &opts).unwrap();
    assert!(r.z_ci.contains(1.0) && (r.z - 1.0).abs() < 0.1, "{r:?}");
    assert!((r.growth_exponent - 1.0 / 3.0).abs() < 0.05, "{}", r.growth_exponent);
    assert!(r.plateau.height_spread < 0.05);
    assert!(!r.at_bound);
}

#[test]
fn dynamic_fit_needs_three_sizes() {
    let series = planted_series(0.3, 1.0, 0.01, 1);
    assert!(fit_dynamic_collapse(&series[..2], &DynamicOptions::new(0.3)).is_err());
}

#[test]
fn percentile_interval_contains_estimate() {
    let i = Interval::percentile(&[1.0, 2.0, 3.0], 10.0);
    assert_eq!((i.lo, i.hi), (1.0, 10.0));
}
