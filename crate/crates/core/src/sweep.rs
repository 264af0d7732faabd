//! Resumable ensembles and `(L, p)` sweeps backed by per-cell manifests.
//!
//! A cell is one ensemble. Its manifest holds the config, the per-time
//! means, each trajectory's steady value, and optionally every trajectory's
//! series. A manifest with `status = done` and a matching config hash and
//! code version is reused instead of recomputed; failed cells are retried.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

use crate::circuit::{run_records, summarize, CircuitConfig, EnsembleSummary, Model};
use crate::scaling::{SweepDataset, SweepPoint, TimeSeries};
use crate::store::{format_key_values, parse_key_values, write_atomic};
use crate::Error;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A finished ensemble as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct CellData {
    pub config: CircuitConfig,
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub steady_mean: f64,
    pub steady_stderr: f64,
    pub steady_per_trajectory: Vec<f64>,
    /// Entropy series of every trajectory, if requested.
    pub trajectories: Vec<Vec<f64>>,
    pub measurement_count: u64,
    pub gate_count: u64,
    pub wall_seconds: f64,
}

impl CellData {
    fn from_summary(s: &EnsembleSummary, trajectories: Vec<Vec<f64>>, wall_seconds: f64) -> Self {
        Self {
            config: s.config.clone(),
            times: s.times.clone(),
            mean: s.mean.clone(),
            stderr: s.stderr.clone(),
            steady_mean: s.steady_mean,
            steady_stderr: s.steady_stderr,
            steady_per_trajectory: s.steady_per_trajectory.clone(),
            trajectories,
            measurement_count: s.measurement_count,
            gate_count: s.gate_count,
            wall_seconds,
        }
    }

    pub fn sweep_point(&self) -> SweepPoint {
        SweepPoint::from_trajectories(self.config.n_qubits, self.config.p, self.steady_per_trajectory.clone())
    }

    /// Time series for dynamic collapse; needs stored trajectories for resampling.
    pub fn time_series(&self) -> TimeSeries {
        TimeSeries {
            l: self.config.n_qubits,
            times: self.times.clone(),
            mean: self.mean.clone(),
            stderr: self.stderr.clone(),
            trajectories: self.trajectories.clone(),
        }
    }

    fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let mut m = BTreeMap::new();
        for (k, v) in self.config.to_key_values() {
            m.insert(format!("config.{k}"), v);
        }
        m.insert("status".into(), "done".into());
        m.insert("code_version".into(), CODE_VERSION.into());
        m.insert("config_hash".into(), self.config.config_hash());
        m.insert("wall_seconds".into(), format!("{:.3}", self.wall_seconds));
        m.insert("times".into(), join(&self.times));
        m.insert("mean".into(), join(&self.mean));
        m.insert("stderr".into(), join(&self.stderr));
        m.insert("steady_mean".into(), self.steady_mean.to_string());
        m.insert("steady_stderr".into(), self.steady_stderr.to_string());
        m.insert("steady_values".into(), join(&self.steady_per_trajectory));
        m.insert("measurement_count".into(), self.measurement_count.to_string());
        m.insert("gate_count".into(), self.gate_count.to_string());
        for (k, t) in self.trajectories.iter().enumerate() {
            m.insert(format!("trajectory.{k:06}"), join(t));
        }
        format_key_values(&m)
    }

    fn parse(text: &str) -> Result<Self, Error> {
        let m = parse_key_values(text)?;
        let get = |k: &str| m.get(k).ok_or_else(|| Error::Dataset(format!("manifest lacks {k}")));
        let num = |k: &str| -> Result<f64, Error> { get(k)?.parse().map_err(|_| Error::Dataset(format!("bad {k}"))) };
        let list = |v: &str| -> Result<Vec<f64>, Error> {
            v.split(',').filter(|s| !s.is_empty()).map(|s| s.parse().map_err(|_| Error::Dataset(format!("bad number {s:?}")))).collect()
        };
        let config = CircuitConfig::from_key_values(m.iter().filter_map(|(k, v)| k.strip_prefix("config.").map(|k| (k, v.as_str()))))?;
        let trajectories = m.iter().filter(|(k, _)| k.starts_with("trajectory.")).map(|(_, v)| list(v)).collect::<Result<_, _>>()?;
        Ok(Self {
            config,
            times: list(get("times")?)?,
            mean: list(get("mean")?)?,
            stderr: list(get("stderr")?)?,
            steady_mean: num("steady_mean")?,
            steady_stderr: num("steady_stderr")?,
            steady_per_trajectory: list(get("steady_values")?)?,
            trajectories,
            measurement_count: num("measurement_count")? as u64,
            gate_count: num("gate_count")? as u64,
            wall_seconds: num("wall_seconds")?,
        })
    }
}

/// What happened to a cell in this invocation.
#[derive(Clone, Debug, PartialEq)]
pub enum CellOutcome {
    Computed,
    Resumed,
    Failed(String),
}

/// Reads a finished manifest at `path` if it belongs to `cfg` and this code version.
pub fn load_cell(cfg: &CircuitConfig, path: &Path) -> Option<CellData> {
    let text = fs::read_to_string(path).ok()?;
    let m = parse_key_values(&text).ok()?;
    let fresh = m.get("status").map(String::as_str) == Some("done")
        && m.get("code_version").map(String::as_str) == Some(CODE_VERSION)
        && m.get("config_hash") == Some(&cfg.config_hash());
    if !fresh {
        return None;
    }
    CellData::parse(&text).ok()
}

/// Runs `cfg` unless `path` already holds its finished manifest. On failure
/// the manifest records the error and the error is returned.
pub fn run_cell(cfg: &CircuitConfig, path: &Path, keep_trajectories: bool) -> Result<(CellData, CellOutcome), Error> {
    if let Some(cell) = load_cell(cfg, path) {
        if !keep_trajectories || !cell.trajectories.is_empty() {
            return Ok((cell, CellOutcome::Resumed));
        }
    }
    let start = Instant::now();
    let result = run_records(cfg).and_then(|records| {
        let summary = summarize(cfg, &records)?;
        let series = if keep_trajectories {
            records.iter().map(|r| r.samples.iter().map(|s| s.entropy).collect()).collect()
        } else {
            Vec::new()
        };
        Ok(CellData::from_summary(&summary, series, start.elapsed().as_secs_f64()))
    });
    match result {
        Ok(cell) => {
            write_atomic(path, &cell.to_text())?;
            Ok((cell, CellOutcome::Computed))
        }
        Err(e) => {
            let mut m = BTreeMap::new();
            for (k, v) in cfg.to_key_values() {
                m.insert(format!("config.{k}"), v);
            }
            m.insert("status".into(), "failed".into());
            m.insert("code_version".into(), CODE_VERSION.into());
            m.insert("config_hash".into(), cfg.config_hash());
            m.insert("error".into(), e.to_string().replace('\n', " "));
            write_atomic(path, &format_key_values(&m))?;
            Err(e)
        }
    }
}

/// Grid of sizes and measurement rates sharing one model and budget.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub model: Model,
    pub sizes: Vec<usize>,
    pub probabilities: Vec<f64>,
    /// `None` uses the model default.
    pub periods: Option<u32>,
    pub trajectories: usize,
    pub seed: u64,
    pub cut_fraction: f64,
}

impl SweepSpec {
    pub fn new(model: Model, sizes: Vec<usize>, probabilities: Vec<f64>) -> Self {
        Self {
            model,
            sizes,
            probabilities,
            periods: None,
            trajectories: crate::circuit::DEFAULT_TRAJECTORIES,
            seed: 0,
            cut_fraction: crate::circuit::DEFAULT_CUT_FRACTION,
        }
    }

    pub fn periods(&self) -> u32 {
        self.periods.unwrap_or(self.model.default_periods())
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.sizes.is_empty() || self.probabilities.is_empty() {
            return Err(Error::InvalidConfig("empty sweep grid".into()));
        }
        Ok(())
    }

    /// Config of one cell. Each cell gets its own master seed so cells are
    /// statistically independent.
    pub fn cell_config(&self, l: usize, p: f64) -> CircuitConfig {
        let mut cfg = CircuitConfig::new(self.model, l, p).with_periods(self.periods()).with_trajectories(self.trajectories);
        cfg.cut_fraction = self.cut_fraction;
        cfg.master_seed = cell_seed(self.seed, l, p);
        cfg
    }

    pub fn cells(&self) -> Vec<(usize, f64)> {
        self.sizes.iter().flat_map(|&l| self.probabilities.iter().map(move |&p| (l, p))).collect()
    }

    pub fn to_meta(&self) -> BTreeMap<String, String> {
        let sizes: Vec<String> = self.sizes.iter().map(usize::to_string).collect();
        let ps: Vec<String> = self.probabilities.iter().map(f64::to_string).collect();
        BTreeMap::from([
            ("model".to_string(), self.model.to_string()),
            ("sizes".to_string(), sizes.join(" ")),
            ("probabilities".to_string(), ps.join(" ")),
            ("T".to_string(), self.periods().to_string()),
            ("trajectories".to_string(), self.trajectories.to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("code_version".to_string(), CODE_VERSION.to_string()),
        ])
    }
}

/// Per-cell master seed: first eight bytes of SHA-256 over `(seed, L, p)`.
pub fn cell_seed(seed: u64, l: usize, p: f64) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((l as u64).to_le_bytes());
    h.update(p.to_bits().to_le_bytes());
    u64::from_le_bytes(h.finalize()[..8].try_into().unwrap())
}

pub fn cell_path(dir: &Path, l: usize, p: f64) -> PathBuf {
    dir.join(format!("L{l}_p{p}.cell"))
}

/// Evenly spaced values from `lo` to `hi` inclusive, rounded to 10 decimals
/// so that grid points print cleanly.
pub fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, Error> {
    if !(step > 0.0) || hi < lo {
        return Err(Error::InvalidConfig(format!("bad grid {lo}:{hi}:{step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| ((lo + k as f64 * step) * 1e10).round() / 1e10).collect())
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    /// Finished cells only.
    pub dataset: SweepDataset,
    pub outcomes: Vec<((usize, f64), CellOutcome)>,
    pub cells: Vec<CellData>,
}

impl SweepReport {
    pub fn failures(&self) -> Vec<&((usize, f64), CellOutcome)> {
        self.outcomes.iter().filter(|o| matches!(o.1, CellOutcome::Failed(_))).collect()
    }
}

/// Runs every cell of `spec` under `dir`, skipping finished ones. A failing
/// cell is recorded and the sweep moves on. `progress` sees each outcome.
pub fn run_sweep<F>(spec: &SweepSpec, dir: &Path, keep_trajectories: bool, mut progress: F) -> Result<SweepReport, Error>
where
    F: FnMut(usize, f64, &CellOutcome, Option<&CellData>),
{
    spec.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut outcomes = Vec::new();
    let mut cells = Vec::new();
    for (l, p) in spec.cells() {
        let cfg = spec.cell_config(l, p);
        match run_cell(&cfg, &cell_path(dir, l, p), keep_trajectories) {
            Ok((cell, outcome)) => {
                progress(l, p, &outcome, Some(&cell));
                outcomes.push(((l, p), outcome));
                cells.push(cell);
            }
            Err(Error::Io { path, source }) => return Err(Error::Io { path, source }),
            Err(e) => {
                let outcome = CellOutcome::Failed(e.to_string());
                progress(l, p, &outcome, None);
                outcomes.push(((l, p), outcome));
            }
        }
    }
    let points = cells.iter().map(CellData::sweep_point).collect();
    let dataset = SweepDataset::new(Some(spec.model), spec.cut_fraction, spec.periods(), points)?;
    Ok(SweepReport { dataset, outcomes, cells })
}
