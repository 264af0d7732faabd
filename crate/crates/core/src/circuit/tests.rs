use super::*;

#[test]
fn brick_layer_geometry() {
    // 0-based versions of (1,2),(3,4),(5,6),(7,8) and (2,3),(4,5),(6,7)
    assert_eq!(layer_pairs(1, 8), vec![(0, 1), (2, 3), (4, 5), (6, 7)]);
    assert_eq!(layer_pairs(2, 8), vec![(1, 2), (3, 4), (5, 6)]);
    assert_eq!(layer_pairs(4, 4), vec![(1, 2)]);
    assert_eq!(layer_pairs(3, 4), vec![(0, 1), (2, 3)]);
}

#[test]
fn initial_sample_is_unentangled() {
    let mut cfg = CircuitConfig::new(Model::B1, 8, 0.3).with_periods(1);
    cfg.record_times = vec![0];
    let r = run_trajectory(&cfg, 0).unwrap();
    assert_eq!(r.samples.len(), 1);
    assert_eq!(r.samples[0].t, 0.0);
    assert_eq!(r.samples[0].entropy, 0.0);
}

#[test]
fn zeno_limit_of_b1_stays_below_one_bit() {
    let mut cfg = CircuitConfig::new(Model::B1, 16, 1.0).with_periods(40);
    cfg.record_times = (0..=40).collect();
    cfg.record_mid_period = true;
    cfg.record_profile = true;
    for k in 0..5 {
        let r = run_trajectory(&cfg, k).unwrap();
        for s in &r.samples {
            assert!(s.entropy <= 1.0);
            assert!(s.profile.iter().all(|&e| e <= 1.0));
        }
        assert_eq!(r.measurement_count, r.gate_count);
    }
}

#[test]
fn unitary_clifford_circuit_reaches_volume_law() {
    let cfg = CircuitConfig::new(Model::B1, 32, 0.0).with_periods(60).with_trajectories(4).with_seed(3);
    let s = run_ensemble(&cfg).unwrap();
    assert!(s.steady_mean >= 8.0 - 2.0, "{}", s.steady_mean);
    assert!(s.steady_mean <= 8.0);
    assert_eq!(s.measurement_count, 0);
}

#[test]
fn ensembles_are_reproducible() {
    let cfg = CircuitConfig::new(Model::B2, 16, 0.4).with_periods(30).with_trajectories(6).with_seed(42);
    let a = run_ensemble(&cfg).unwrap();
    let b = run_ensemble(&cfg).unwrap();
    assert_eq!(a, b);
    let c = run_ensemble(&cfg.clone().with_seed(43)).unwrap();
    assert_ne!(a.mean, c.mean);
}

#[test]
fn trajectories_are_independent_of_ensemble_size() {
    let cfg = CircuitConfig::new(Model::B1, 12, 0.2).with_periods(20).with_trajectories(3).with_seed(8);
    let small = run_ensemble(&cfg).unwrap();
    let big = run_ensemble(&cfg.clone().with_trajectories(9)).unwrap();
    assert_eq!(small.steady_per_trajectory[..], big.steady_per_trajectory[..3]);
}

#[test]
fn steady_state_is_tail_mean() {
    let cfg = CircuitConfig::new(Model::B1, 16, 0.1).with_periods(50).with_trajectories(5).with_seed(1);
    let s = run_ensemble(&cfg).unwrap();
    let start = cfg.steady_start();
    let tail: Vec<f64> = s.times.iter().zip(&s.mean).filter(|(t, _)| **t >= start).map(|(_, m)| *m).collect();
    let expected = tail.iter().sum::<f64>() / tail.len() as f64;
    assert!((s.steady_mean - expected).abs() < 1e-12);
}

#[test]
fn measured_gate_fraction_matches_p() {
    let p = 0.3;
    let cfg = CircuitConfig::new(Model::B2, 32, p).with_periods(100).with_trajectories(4).with_seed(5);
    let s = run_ensemble(&cfg).unwrap();
    let n = s.gate_count as f64;
    let sigma = (n * p * (1.0 - p)).sqrt();
    assert!((s.measurement_count as f64 - n * p).abs() < 3.0 * sigma);
    assert_eq!(s.gate_count, 4 * 100 * (16 + 15));
}

#[test]
fn stderr_shrinks_like_inverse_sqrt_n() {
    let base = CircuitConfig::new(Model::B1, 16, 0.15).with_periods(40).with_seed(17);
    let s = run_ensemble(&base.clone().with_trajectories(256)).unwrap();
    let sub = |n: usize| mean_stderr(&s.steady_per_trajectory[..n]).1;
    let ratio = sub(16) / sub(256);
    assert!((2.5..6.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn backends_agree_on_clifford_circuits() {
    for (model, n, p, c) in [(Model::B1, 6, 0.3, 0.5), (Model::B2, 8, 0.5, 0.25), (Model::B1, 8, 0.15, 0.5)] {
        let mut cfg = CircuitConfig::new(model, n, p).with_periods(15).with_seed(77);
        cfg.cut_fraction = c;
        cfg.record_times = (0..=15).collect();
        cfg.record_mid_period = true;
        cfg.record_profile = true;
        for k in 0..4 {
            let stab = run_trajectory(&cfg, k).unwrap();
            let mut dense_cfg = cfg.clone();
            dense_cfg.backend = BackendKind::Dense;
            let dense = run_trajectory(&dense_cfg, k).unwrap();
            assert_eq!(stab.measurement_count, dense.measurement_count);
            for (a, b) in stab.samples.iter().zip(&dense.samples) {
                assert_eq!(a.t, b.t);
                for (x, y) in a.profile.iter().zip(&b.profile) {
                    assert!((x - y).abs() < 1e-8, "{model:?} traj {k} t {}: {x} vs {y}", a.t);
                }
            }
        }
    }
}

#[test]
fn haar_zeno_trajectory_stays_area_law() {
    let mut cfg = CircuitConfig::new(Model::A1, 8, 1.0).with_periods(10);
    cfg.record_times = (0..=10).collect();
    cfg.record_profile = true;
    let r = run_trajectory(&cfg, 0).unwrap();
    for s in &r.samples {
        // after a full P1 layer only the last layer's pairs carry entanglement
        assert!(s.profile.iter().all(|&e| e <= 1.0 + 1e-9));
    }
}

#[test]
fn unitary_channel_stays_pure() {
    let mut cfg = CircuitConfig::new(Model::A2, 6, 0.0).with_periods(10).with_trajectories(2);
    cfg.cut_fraction = 0.5;
    cfg.record_times = (0..=10).collect();
    let series = run_channel(&cfg).unwrap();
    assert!(series.mean.iter().all(|s| s.abs() < 1e-9));
}

#[test]
fn zeno_channel_heats_to_infinite_temperature() {
    let mut cfg = CircuitConfig::new(Model::A1, 4, 1.0).with_periods(30).with_trajectories(3);
    cfg.record_times = (0..=30).collect();
    let series = run_channel(&cfg).unwrap();
    assert!((series.steady_mean - 4.0).abs() < 0.05, "{}", series.steady_mean);
}

#[test]
fn channel_rejects_clifford_models_and_large_sizes() {
    assert!(run_channel(&CircuitConfig::new(Model::B1, 4, 1.0)).is_err());
    assert!(matches!(run_channel(&CircuitConfig::new(Model::A1, 12, 1.0)), Err(Error::Capacity(_))));
}

#[test]
fn dense_capacity_guard_applies_to_trajectories() {
    assert!(matches!(run_trajectory(&CircuitConfig::new(Model::A1, 20, 1.0), 0), Err(Error::Capacity(_))));
}

#[test]
fn ensemble_needs_two_trajectories() {
    let cfg = CircuitConfig::new(Model::B1, 8, 0.1).with_trajectories(1);
    assert!(run_ensemble(&cfg).is_err());
}
