use anyhow::{bail, Result};
use clap::Args;
use mipt_core::circuit::{run_trajectory, BackendKind, CircuitConfig, Model};
use mipt_core::clifford::{CliffordGate, CliffordTable, TWO_QUBIT_CLIFFORD_CLASSES};
use mipt_core::dense::{PureState, Unitary2Q};
use mipt_core::pauli::{Pauli, PauliOperator};
use mipt_core::stabilizer::{ProjectorSet, StabilizerState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Args)]
pub struct ValidateArgs {
    /// Random circuits compared between the stabilizer and dense simulators.
    #[arg(long, default_value_t = 50)]
    circuits: u64,
    /// Shots per Born-rule frequency test.
    #[arg(long, default_value_t = 20_000)]
    shots: usize,
    /// Haar unitaries sampled for the moment test.
    #[arg(long, default_value_t = 20_000)]
    haar: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

type Check = Result<String, String>;

fn equivalence(a: &ValidateArgs) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut worst: f64 = 0.0;
    for k in 0..a.circuits {
        let l = [4, 6, 8][k as usize % 3];
        let model = if k % 2 == 0 { Model::B1 } else { Model::B2 };
        let mut cfg = CircuitConfig::new(model, l, rng.gen_range(0.1..0.9)).with_periods(12).with_seed(rng.gen());
        cfg.cut_fraction = 0.5;
        cfg.record_times = (0..=12).collect();
        cfg.record_mid_period = true;
        cfg.record_profile = true;
        let stab = run_trajectory(&cfg, k).map_err(|e| e.to_string())?;
        cfg.backend = BackendKind::Dense;
        let dense = run_trajectory(&cfg, k).map_err(|e| e.to_string())?;
        if stab.samples.len() != dense.samples.len() || stab.measurement_count != dense.measurement_count {
            return Err(format!("circuit {k}: sample or measurement counts differ"));
        }
        for (x, y) in stab.samples.iter().zip(&dense.samples) {
            for (s, d) in x.profile.iter().zip(&y.profile) {
                worst = worst.max((s - d).abs());
            }
        }
    }
    if worst > 1e-8 {
        return Err(format!("max |S_stab - S_dense| = {worst:.2e}"));
    }
    Ok(format!("{} circuits, max |S_stab - S_dense| = {worst:.2e}", a.circuits))
}

fn within_3_sigma(count: usize, shots: usize, p: f64) -> bool {
    let sigma = (shots as f64 * p * (1.0 - p)).sqrt();
    (count as f64 - shots as f64 * p).abs() <= 3.0 * sigma + 1e-9
}

fn born(a: &ValidateArgs) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed ^ 2);
    let shots = a.shots;
    let mut psi = PureState::plus_product(6);
    for k in 0..12 {
        psi.apply_unitary(&Unitary2Q::sample_haar(&mut rng), (k % 5, k % 5 + 1)).map_err(|e| e.to_string())?;
    }
    for set in [ProjectorSet::P1, ProjectorSet::P2] {
        let probs = psi.outcome_probabilities(set, (2, 3)).map_err(|e| e.to_string())?;
        let mut counts = vec![0usize; probs.len()];
        for _ in 0..shots {
            let mut c = psi.clone();
            counts[c.project_and_sample(set, (2, 3), &mut rng).map_err(|e| e.to_string())? as usize] += 1;
        }
        for (o, (&n, &p)) in counts.iter().zip(&probs).enumerate() {
            if !within_3_sigma(n, shots, p) {
                return Err(format!("dense {set:?} outcome {o}: {n} of {shots}, expected p = {p:.4}"));
            }
        }
    }
    let mut s = StabilizerState::new_plus_product_state(6).map_err(|e| e.to_string())?;
    let mut dense = PureState::plus_product(6);
    let table = CliffordTable::global();
    for k in 0..12 {
        let g = table.sample(&mut rng);
        s.apply_clifford(g, &[k % 5, k % 5 + 1]).map_err(|e| e.to_string())?;
        dense.apply_clifford(g, (k % 5, k % 5 + 1)).map_err(|e| e.to_string())?;
    }
    let probs = dense.outcome_probabilities(ProjectorSet::P1, (0, 1)).map_err(|e| e.to_string())?;
    let p1 = probs[2] + probs[3];
    let z = PauliOperator::single(6, 0, Pauli::Z);
    let mut ones = 0;
    for _ in 0..shots {
        let mut c = s.clone();
        ones += c.measure_pauli(&z, &mut rng).map_err(|e| e.to_string())? as usize;
    }
    if !within_3_sigma(ones, shots, p1) {
        return Err(format!("stabilizer Z = 1 in {ones} of {shots}, dense marginal {p1:.4}"));
    }
    Ok(format!("dense P1/P2 and stabilizer Z frequencies within 3σ over {shots} shots"))
}

fn clifford_count(_: &ValidateArgs) -> Check {
    let t = CliffordTable::enumerate().map_err(|e| e.to_string())?;
    let distinct: std::collections::BTreeSet<u32> = t.gates().iter().map(CliffordGate::signature).collect();
    if t.len() != TWO_QUBIT_CLIFFORD_CLASSES || distinct.len() != TWO_QUBIT_CLIFFORD_CLASSES {
        return Err(format!("{} classes, {} distinct", t.len(), distinct.len()));
    }
    Ok(format!("{TWO_QUBIT_CLIFFORD_CLASSES} distinct two-qubit Clifford classes"))
}

/// Unitarity of every sample, plus the first two moments of `|U_00|^2`,
/// which are 1/4 and 1/10 for Haar-random U(4).
fn haar(a: &ValidateArgs) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed ^ 3);
    let n = a.haar as f64;
    let (mut worst, mut m1, mut m2): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..a.haar {
        let u = Unitary2Q::sample_haar(&mut rng);
        worst = worst.max(u.unitarity_error());
        let mut psi = PureState::basis(&[0, 0]);
        psi.apply_unitary(&u, (0, 1)).map_err(|e| e.to_string())?;
        let x = psi.amplitudes()[0].norm_sqr();
        m1 += x;
        m2 += x * x;
    }
    let (m1, m2) = (m1 / n, m2 / n);
    // var |U_00|^2 = 1/10 - 1/16; var |U_00|^4 from the 4th moment 1/35
    let se1 = (0.1f64 - 0.0625).sqrt() / n.sqrt();
    let se2 = (1.0f64 / 35.0 - 0.01).sqrt() / n.sqrt();
    if worst > 1e-10 {
        return Err(format!("unitarity error {worst:.2e}"));
    }
    if (m1 - 0.25).abs() > 4.0 * se1 || (m2 - 0.1).abs() > 4.0 * se2 {
        return Err(format!("E|U00|^2 = {m1:.4} (0.25), E|U00|^4 = {m2:.4} (0.1)"));
    }
    Ok(format!("{} samples, max unitarity error {worst:.1e}, E|U00|^2 = {m1:.4}, E|U00|^4 = {m2:.4}", a.haar))
}

pub fn run(a: ValidateArgs) -> Result<()> {
    let checks: [(&str, fn(&ValidateArgs) -> Check); 4] =
        [("equivalence", equivalence), ("born", born), ("clifford-count", clifford_count), ("haar", haar)];
    let mut failed = Vec::new();
    for (name, check) in checks {
        match check(&a) {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                println!("FAIL {name}: {detail}");
                failed.push(name);
            }
        }
    }
    if !failed.is_empty() {
        bail!("validation failed: {}", failed.join(", "));
    }
    Ok(())
}
