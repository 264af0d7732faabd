//! Brick-layer hybrid circuits: gate layout, trajectory driving on either
//! backend, channel evolution, and ensemble aggregation.
//!
//! Every trajectory owns a ChaCha8 stream selected by its index from the
//! master seed, so results do not depend on thread scheduling. Within a layer
//! gates are visited left to right; for each gate the stream supplies, in
//! order, the measure/no-measure decision, any Born outcome bits, and the
//! unitary.

mod config;

pub use config::*;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::clifford::CliffordTable;
use crate::dense::{ChannelGate, MixedState, PureState, Unitary2Q};
use crate::stabilizer::{ProjectorSet, StabilizerState};
use crate::Error;

/// Neighbouring pairs acted on in layer `t` (1-based; odd layers start at
/// site 0). Open boundaries: even layers have `L/2 - 1` gates.
pub fn layer_pairs(t: u64, n_qubits: usize) -> Vec<(usize, usize)> {
    let start = if t % 2 == 1 { 0 } else { 1 };
    (start..n_qubits.saturating_sub(1)).step_by(2).map(|i| (i, i + 1)).collect()
}

/// Random stream of trajectory `index`.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Operations a trajectory needs from a simulation backend.
pub trait Backend {
    /// Measurement block on a neighbouring pair; returns the outcomes.
    fn measure(&mut self, pair: (usize, usize), set: ProjectorSet, rng: &mut ChaCha8Rng) -> Result<Vec<u8>, Error>;
    /// Fresh random unitary on the pair.
    fn random_unitary(&mut self, pair: (usize, usize), rng: &mut ChaCha8Rng) -> Result<(), Error>;
    /// Entanglement entropy (bits) of the first `la` sites.
    fn entropy(&self, la: usize) -> f64;
}

pub struct StabilizerBackend {
    pub state: StabilizerState,
    table: &'static CliffordTable,
}

impl StabilizerBackend {
    pub fn new(n: usize) -> Result<Self, Error> {
        Ok(Self { state: StabilizerState::new_plus_product_state(n)?, table: CliffordTable::global() })
    }
}

impl Backend for StabilizerBackend {
    fn measure(&mut self, pair: (usize, usize), set: ProjectorSet, rng: &mut ChaCha8Rng) -> Result<Vec<u8>, Error> {
        self.state.apply_measurement_block(pair, set, rng)
    }

    fn random_unitary(&mut self, pair: (usize, usize), rng: &mut ChaCha8Rng) -> Result<(), Error> {
        let g = self.table.sample(rng);
        self.state.apply_clifford(g, &[pair.0, pair.1])
    }

    fn entropy(&self, la: usize) -> f64 {
        self.state.entanglement_entropy(la) as f64
    }
}

pub struct DenseBackend {
    pub state: PureState,
    unitaries: UnitaryEnsemble,
}

impl DenseBackend {
    pub fn new(n: usize, unitaries: UnitaryEnsemble) -> Self {
        Self { state: PureState::plus_product(n), unitaries }
    }
}

fn sample_unitary(ensemble: UnitaryEnsemble, rng: &mut ChaCha8Rng) -> Unitary2Q {
    match ensemble {
        UnitaryEnsemble::Haar => Unitary2Q::sample_haar(rng),
        UnitaryEnsemble::Clifford => Unitary2Q::from_clifford(CliffordTable::global().sample(rng)),
    }
}

impl Backend for DenseBackend {
    fn measure(&mut self, pair: (usize, usize), set: ProjectorSet, rng: &mut ChaCha8Rng) -> Result<Vec<u8>, Error> {
        let alpha = self.state.project_and_sample(set, pair, rng)?;
        Ok(match set {
            ProjectorSet::P1 => vec![alpha >> 1, alpha & 1],
            ProjectorSet::P2 => vec![alpha],
        })
    }

    fn random_unitary(&mut self, pair: (usize, usize), rng: &mut ChaCha8Rng) -> Result<(), Error> {
        let u = sample_unitary(self.unitaries, rng);
        self.state.apply_unitary(&u, pair)
    }

    fn entropy(&self, la: usize) -> f64 {
        self.state.renyi2_entropy(la)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    /// Time in periods; `k - 0.5` marks the state after the first layer of period `k`.
    pub t: f64,
    /// Entropy of the configured cut.
    pub entropy: f64,
    /// Entropy of every prefix `0..=L` when profiling is enabled, else empty.
    pub profile: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub config_hash: String,
    /// Index of the trajectory; also its ChaCha stream id under the master seed.
    pub trajectory_index: u64,
    pub samples: Vec<Sample>,
    /// Number of gates preceded by a measurement block.
    pub measurement_count: u64,
    pub gate_count: u64,
}

impl TrajectoryRecord {
    /// Mean entropy over samples at or after `t_start`.
    pub fn tail_mean(&self, t_start: f64) -> Option<f64> {
        let tail: Vec<f64> = self.samples.iter().filter(|s| s.t >= t_start).map(|s| s.entropy).collect();
        (!tail.is_empty()).then(|| tail.iter().sum::<f64>() / tail.len() as f64)
    }
}

/// Drives one trajectory through any backend.
pub fn drive<B: Backend>(cfg: &CircuitConfig, backend: &mut B, rng: &mut ChaCha8Rng, index: u64) -> Result<TrajectoryRecord, Error> {
    let set = cfg.model.projector_set();
    let la = cfg.cut();
    let n = cfg.n_qubits;
    let mut samples = Vec::with_capacity(cfg.record_times.len() * if cfg.record_mid_period { 2 } else { 1 });
    let record = |b: &B, t: f64, samples: &mut Vec<Sample>| {
        let profile = if cfg.record_profile { (0..=n).map(|k| b.entropy(k)).collect() } else { Vec::new() };
        samples.push(Sample { t, entropy: b.entropy(la), profile });
    };
    let mut next = cfg.record_times.iter().peekable();
    if next.peek() == Some(&&0) {
        record(backend, 0.0, &mut samples);
        next.next();
    }
    let (mut measured, mut gates) = (0u64, 0u64);
    for t in 1..=cfg.periods {
        let recorded = next.peek() == Some(&&t);
        for half in 0..2u64 {
            for pair in layer_pairs(2 * t as u64 - 1 + half, n) {
                gates += 1;
                if rng.gen_bool(cfg.p) {
                    measured += 1;
                    backend.measure(pair, set, rng)?;
                }
                backend.random_unitary(pair, rng)?;
            }
            if recorded && (half == 1 || cfg.record_mid_period) {
                record(backend, t as f64 - if half == 0 { 0.5 } else { 0.0 }, &mut samples);
            }
        }
        if recorded {
            next.next();
        }
    }
    Ok(TrajectoryRecord {
        config_hash: cfg.config_hash(),
        trajectory_index: index,
        samples,
        measurement_count: measured,
        gate_count: gates,
    })
}

/// Runs trajectory `index` of `cfg` from `|+>^L`. Fully determined by
/// `(cfg.master_seed, index)`.
pub fn run_trajectory(cfg: &CircuitConfig, index: u64) -> Result<TrajectoryRecord, Error> {
    cfg.validate()?;
    let mut rng = trajectory_rng(cfg.master_seed, index);
    match cfg.backend {
        BackendKind::Stabilizer => drive(cfg, &mut StabilizerBackend::new(cfg.n_qubits)?, &mut rng, index),
        BackendKind::Dense => drive(cfg, &mut DenseBackend::new(cfg.n_qubits, cfg.model.unitaries()), &mut rng, index),
    }
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSummary {
    pub config: CircuitConfig,
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Mean over trajectories of each trajectory's tail-window average.
    pub steady_mean: f64,
    pub steady_stderr: f64,
    /// Tail-window average of each trajectory, in index order.
    pub steady_per_trajectory: Vec<f64>,
    /// Tail-window average of every prefix entropy when profiling.
    pub steady_profile: Option<Vec<f64>>,
    pub n_trajectories: usize,
    pub measurement_count: u64,
    pub gate_count: u64,
}

/// Aggregates trajectory records that share one config.
pub fn summarize(cfg: &CircuitConfig, records: &[TrajectoryRecord]) -> Result<EnsembleSummary, Error> {
    let first = records.first().ok_or_else(|| Error::InvalidConfig("no trajectories to summarise".into()))?;
    let times: Vec<f64> = first.samples.iter().map(|s| s.t).collect();
    if records.iter().any(|r| r.samples.len() != times.len()) {
        return Err(Error::InvalidConfig("trajectories recorded different schedules".into()));
    }
    let (mut mean, mut stderr) = (Vec::with_capacity(times.len()), Vec::with_capacity(times.len()));
    for k in 0..times.len() {
        let col: Vec<f64> = records.iter().map(|r| r.samples[k].entropy).collect();
        let (m, e) = mean_stderr(&col);
        mean.push(m);
        stderr.push(e);
    }
    let start = cfg.steady_start();
    let steady_per_trajectory: Vec<f64> = records
        .iter()
        .map(|r| r.tail_mean(start).ok_or_else(|| Error::InvalidConfig(format!("no record times at or after t = {start}"))))
        .collect::<Result<_, _>>()?;
    let (steady_mean, steady_stderr) = mean_stderr(&steady_per_trajectory);
    let steady_profile = cfg.record_profile.then(|| {
        let mut acc = vec![0.0; cfg.n_qubits + 1];
        let mut count = 0usize;
        for r in records {
            for s in r.samples.iter().filter(|s| s.t >= start) {
                acc.iter_mut().zip(&s.profile).for_each(|(a, v)| *a += v);
                count += 1;
            }
        }
        acc.iter().map(|a| a / count as f64).collect()
    });
    Ok(EnsembleSummary {
        config: cfg.clone(),
        times,
        mean,
        stderr,
        steady_mean,
        steady_stderr,
        steady_per_trajectory,
        steady_profile,
        n_trajectories: records.len(),
        measurement_count: records.iter().map(|r| r.measurement_count).sum(),
        gate_count: records.iter().map(|r| r.gate_count).sum(),
    })
}

/// Runs all trajectories in parallel, in index order.
pub fn run_records(cfg: &CircuitConfig) -> Result<Vec<TrajectoryRecord>, Error> {
    cfg.validate()?;
    if cfg.n_trajectories < 2 {
        return Err(Error::InvalidConfig("an ensemble needs at least two trajectories".into()));
    }
    (0..cfg.n_trajectories as u64)
        .into_par_iter()
        .map(|k| run_trajectory(cfg, k).map_err(|e| Error::Trajectory { index: k, source: Box::new(e) }))
        .collect()
}

/// Runs all trajectories (in parallel) and aggregates them.
pub fn run_ensemble(cfg: &CircuitConfig) -> Result<EnsembleSummary, Error> {
    summarize(cfg, &run_records(cfg)?)
}

/// Time series of the thermal entropy averaged over unitary realisations.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSeries {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub steady_mean: f64,
    pub steady_stderr: f64,
    pub n_realizations: usize,
}

/// Evolves `ρ = |+><+|^L` by the outcome-averaged channel for each of
/// `cfg.n_trajectories` unitary realisations and records `s₂(ρ(t))`.
pub fn run_channel(cfg: &CircuitConfig) -> Result<ChannelSeries, Error> {
    cfg.validate_channel()?;
    let set = cfg.model.projector_set();
    let n = cfg.n_qubits;
    let runs = (0..cfg.n_trajectories as u64)
        .into_par_iter()
        .map(|k| -> Result<Vec<(f64, f64)>, Error> {
            let mut rng = trajectory_rng(cfg.master_seed, k);
            let mut rho = MixedState::plus_product(n);
            let mut out = Vec::new();
            let mut next = cfg.record_times.iter().peekable();
            if next.peek() == Some(&&0) {
                out.push((0.0, rho.thermal_entropy()));
                next.next();
            }
            for t in 1..=cfg.periods {
                for half in 0..2u64 {
                    let gates: Vec<ChannelGate> = layer_pairs(2 * t as u64 - 1 + half, n)
                        .into_iter()
                        .map(|pair| {
                            let measured = rng.gen_bool(cfg.p);
                            ChannelGate { pair, measured, unitary: sample_unitary(UnitaryEnsemble::Haar, &mut rng) }
                        })
                        .collect();
                    rho.channel_step(&gates, set).map_err(|e| Error::Trajectory { index: k, source: Box::new(e) })?;
                }
                if next.peek() == Some(&&t) {
                    out.push((t as f64, rho.thermal_entropy()));
                    next.next();
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let times: Vec<f64> = runs[0].iter().map(|s| s.0).collect();
    let (mut mean, mut stderr) = (Vec::new(), Vec::new());
    for k in 0..times.len() {
        let col: Vec<f64> = runs.iter().map(|r| r[k].1).collect();
        let (m, e) = mean_stderr(&col);
        mean.push(m);
        stderr.push(e);
    }
    let start = cfg.steady_start();
    let tails: Vec<f64> = runs
        .iter()
        .map(|r| {
            let tail: Vec<f64> = r.iter().filter(|s| s.0 >= start).map(|s| s.1).collect();
            tail.iter().sum::<f64>() / tail.len().max(1) as f64
        })
        .collect();
    let (steady_mean, steady_stderr) = mean_stderr(&tails);
    Ok(ChannelSeries { times, mean, stderr, steady_mean, steady_stderr, n_realizations: runs.len() })
}

#[cfg(test)]
mod tests;
