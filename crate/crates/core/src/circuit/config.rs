use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::stabilizer::ProjectorSet;
use crate::Error;

/// Largest pure-state trajectory simulated densely without an override.
pub const MAX_DENSE_TRAJECTORY_QUBITS: usize = 16;
/// Largest density matrix evolved without an override.
pub const MAX_DENSE_CHANNEL_QUBITS: usize = 10;
/// Hard limits that apply even with the override flag.
pub const MAX_DENSE_TRAJECTORY_QUBITS_OVERRIDE: usize = 24;
pub const MAX_DENSE_CHANNEL_QUBITS_OVERRIDE: usize = 12;

pub const DEFAULT_CUT_FRACTION: f64 = 0.25;
pub const DEFAULT_STEADY_FRACTION: f64 = 0.2;
pub const DEFAULT_DENSE_PERIODS: u32 = 200;
pub const DEFAULT_CLIFFORD_PERIODS: u32 = 600;
pub const DEFAULT_TRAJECTORIES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Model {
    A1,
    A2,
    B1,
    B2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnitaryEnsemble {
    Haar,
    Clifford,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BackendKind {
    Stabilizer,
    Dense,
}

impl Model {
    pub fn projector_set(self) -> ProjectorSet {
        match self {
            Model::A1 | Model::B1 => ProjectorSet::P1,
            Model::A2 | Model::B2 => ProjectorSet::P2,
        }
    }

    pub fn unitaries(self) -> UnitaryEnsemble {
        match self {
            Model::A1 | Model::A2 => UnitaryEnsemble::Haar,
            Model::B1 | Model::B2 => UnitaryEnsemble::Clifford,
        }
    }

    pub fn default_backend(self) -> BackendKind {
        match self.unitaries() {
            UnitaryEnsemble::Haar => BackendKind::Dense,
            UnitaryEnsemble::Clifford => BackendKind::Stabilizer,
        }
    }

    pub fn default_periods(self) -> u32 {
        match self.unitaries() {
            UnitaryEnsemble::Haar => DEFAULT_DENSE_PERIODS,
            UnitaryEnsemble::Clifford => DEFAULT_CLIFFORD_PERIODS,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A1" => Ok(Model::A1),
            "A2" => Ok(Model::A2),
            "B1" => Ok(Model::B1),
            "B2" => Ok(Model::B2),
            _ => Err(Error::InvalidConfig(format!("unknown model {s:?} (expected A1, A2, B1 or B2)"))),
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Stabilizer => "stabilizer",
            BackendKind::Dense => "dense",
        })
    }
}

impl FromStr for BackendKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stabilizer" | "tableau" => Ok(BackendKind::Stabilizer),
            "dense" | "statevector" => Ok(BackendKind::Dense),
            _ => Err(Error::InvalidConfig(format!("unknown backend {s:?}"))),
        }
    }
}

/// Full description of one circuit experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitConfig {
    pub model: Model,
    /// Number of qubits `L`.
    pub n_qubits: usize,
    /// Probability that a gate is preceded by a measurement.
    pub p: f64,
    /// Number of time periods `T` (two layers each).
    pub periods: u32,
    /// `L_A / L`.
    pub cut_fraction: f64,
    /// Periods after which the entropy is recorded.
    pub record_times: Vec<u32>,
    /// Also record after the first layer of each recorded period (time `t - 1/2`).
    pub record_mid_period: bool,
    /// Record the entropy of every prefix `0..=L`, not only the configured cut.
    pub record_profile: bool,
    pub n_trajectories: usize,
    pub master_seed: u64,
    /// Trailing fraction of `T` averaged for the steady state.
    pub steady_fraction: f64,
    pub backend: BackendKind,
    pub allow_large_dense: bool,
}

/// Every period up to 50, then every 10th, always including `T`.
pub fn default_record_times(periods: u32) -> Vec<u32> {
    let mut times: Vec<u32> = (0..=periods.min(50)).collect();
    times.extend((60..=periods).step_by(10));
    if times.last() != Some(&periods) {
        times.push(periods);
    }
    times
}

impl CircuitConfig {
    pub fn new(model: Model, n_qubits: usize, p: f64) -> Self {
        let periods = model.default_periods();
        Self {
            model,
            n_qubits,
            p,
            periods,
            cut_fraction: DEFAULT_CUT_FRACTION,
            record_times: default_record_times(periods),
            record_mid_period: false,
            record_profile: false,
            n_trajectories: DEFAULT_TRAJECTORIES,
            master_seed: 0,
            steady_fraction: DEFAULT_STEADY_FRACTION,
            backend: model.default_backend(),
            allow_large_dense: false,
        }
    }

    /// Sets `T` and resets the record schedule to the default for it.
    pub fn with_periods(mut self, periods: u32) -> Self {
        self.periods = periods;
        self.record_times = default_record_times(periods);
        self
    }

    pub fn with_trajectories(mut self, n: usize) -> Self {
        self.n_trajectories = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    /// Subsystem size `L_A = c·L`.
    pub fn cut(&self) -> usize {
        (self.cut_fraction * self.n_qubits as f64).round() as usize
    }

    /// Start of the steady-state window, in periods.
    pub fn steady_start(&self) -> f64 {
        (1.0 - self.steady_fraction) * self.periods as f64
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(0.0..=1.0).contains(&self.p) {
            return bad(format!("p = {} outside [0, 1]", self.p));
        }
        if self.n_qubits < 4 || !self.n_qubits.is_multiple_of(2) {
            return bad(format!("L = {} must be even and at least 4", self.n_qubits));
        }
        let la = self.cut_fraction * self.n_qubits as f64;
        if !(0.0..=1.0).contains(&self.cut_fraction) || (la - la.round()).abs() > 1e-9 {
            return bad(format!("c·L = {la} is not an integer subsystem size"));
        }
        if self.periods < 1 {
            return bad("T must be at least 1".into());
        }
        if self.n_trajectories < 1 {
            return bad("need at least one trajectory".into());
        }
        if !(0.0..=1.0).contains(&self.steady_fraction) || self.steady_fraction == 0.0 {
            return bad(format!("steady-state fraction {} outside (0, 1]", self.steady_fraction));
        }
        if let Some(t) = self.record_times.iter().find(|&&t| t > self.periods) {
            return bad(format!("record time {t} beyond T = {}", self.periods));
        }
        if self.record_times.windows(2).any(|w| w[0] >= w[1]) {
            return bad("record times must be strictly increasing".into());
        }
        match self.backend {
            BackendKind::Stabilizer if self.model.unitaries() == UnitaryEnsemble::Haar => {
                bad(format!("model {} uses Haar unitaries and cannot run on the stabilizer backend", self.model))
            }
            BackendKind::Dense => {
                let limit = if self.allow_large_dense {
                    MAX_DENSE_TRAJECTORY_QUBITS_OVERRIDE
                } else {
                    MAX_DENSE_TRAJECTORY_QUBITS
                };
                if self.n_qubits > limit {
                    return Err(Error::Capacity(format!(
                        "dense trajectories are limited to L <= {limit}, got L = {}",
                        self.n_qubits
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn validate_channel(&self) -> Result<(), Error> {
        if self.model.unitaries() != UnitaryEnsemble::Haar {
            return Err(Error::InvalidConfig(format!("channel evolution is defined for the dense models, not {}", self.model)));
        }
        let mut c = self.clone();
        c.backend = BackendKind::Dense;
        c.validate()?;
        let limit = if self.allow_large_dense { MAX_DENSE_CHANNEL_QUBITS_OVERRIDE } else { MAX_DENSE_CHANNEL_QUBITS };
        if self.n_qubits > limit {
            return Err(Error::Capacity(format!("density matrices are limited to L <= {limit}, got L = {}", self.n_qubits)));
        }
        Ok(())
    }

    /// Canonical flat key-value form (one `key = value` per entry, sorted).
    pub fn to_key_values(&self) -> BTreeMap<&'static str, String> {
        let times: Vec<String> = self.record_times.iter().map(u32::to_string).collect();
        BTreeMap::from([
            ("model", self.model.to_string()),
            ("L", self.n_qubits.to_string()),
            ("p", format!("{}", self.p)),
            ("T", self.periods.to_string()),
            ("cut_fraction", format!("{}", self.cut_fraction)),
            ("record_times", times.join(",")),
            ("record_mid_period", self.record_mid_period.to_string()),
            ("record_profile", self.record_profile.to_string()),
            ("trajectories", self.n_trajectories.to_string()),
            ("seed", self.master_seed.to_string()),
            ("steady_fraction", format!("{}", self.steady_fraction)),
            ("backend", self.backend.to_string()),
            ("allow_large_dense", self.allow_large_dense.to_string()),
        ])
    }

    pub fn to_text(&self) -> String {
        self.to_key_values().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Builds a config from key-value pairs; `model` and `L` are required,
    /// everything else falls back to the defaults. `record_times` defaults to
    /// the schedule for the given `T`.
    pub fn from_key_values<'a, I>(pairs: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let map: BTreeMap<&str, &str> = pairs.into_iter().map(|(k, v)| (k.trim(), v.trim())).collect();
        let known = [
            "model",
            "L",
            "p",
            "T",
            "cut_fraction",
            "record_times",
            "record_mid_period",
            "record_profile",
            "trajectories",
            "seed",
            "steady_fraction",
            "backend",
            "allow_large_dense",
        ];
        if let Some(k) = map.keys().find(|k| !known.contains(k)) {
            return Err(Error::InvalidConfig(format!("unknown key {k:?}")));
        }
        fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, Error> {
            v.parse().map_err(|_| Error::InvalidConfig(format!("cannot parse {key} = {v:?}")))
        }
        let model: Model = map.get("model").ok_or_else(|| Error::InvalidConfig("missing model".into()))?.parse()?;
        let n: usize = parse("L", map.get("L").ok_or_else(|| Error::InvalidConfig("missing L".into()))?)?;
        let p: f64 = map.get("p").map(|v| parse("p", v)).transpose()?.unwrap_or(match model {
            Model::A1 | Model::A2 => 1.0,
            _ => 0.0,
        });
        let mut cfg = CircuitConfig::new(model, n, p);
        if let Some(v) = map.get("T") {
            cfg = cfg.with_periods(parse("T", v)?);
        }
        if let Some(v) = map.get("cut_fraction") {
            cfg.cut_fraction = parse("cut_fraction", v)?;
        }
        if let Some(v) = map.get("record_times") {
            cfg.record_times =
                v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse("record_times", s.trim())).collect::<Result<_, _>>()?;
        }
        if let Some(v) = map.get("record_mid_period") {
            cfg.record_mid_period = parse("record_mid_period", v)?;
        }
        if let Some(v) = map.get("record_profile") {
            cfg.record_profile = parse("record_profile", v)?;
        }
        if let Some(v) = map.get("trajectories") {
            cfg.n_trajectories = parse("trajectories", v)?;
        }
        if let Some(v) = map.get("seed") {
            cfg.master_seed = parse("seed", v)?;
        }
        if let Some(v) = map.get("steady_fraction") {
            cfg.steady_fraction = parse("steady_fraction", v)?;
        }
        if let Some(v) = map.get("backend") {
            cfg.backend = v.parse()?;
        }
        if let Some(v) = map.get("allow_large_dense") {
            cfg.allow_large_dense = parse("allow_large_dense", v)?;
        }
        Ok(cfg)
    }

    /// SHA-256 of the canonical key-value text, hex encoded.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
