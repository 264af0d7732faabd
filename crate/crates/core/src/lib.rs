//! Simulation of one-dimensional hybrid circuits of random two-qubit unitaries
//! and projective measurements, with finite-size-scaling analysis of the
//! resulting entanglement transition.
//!
//! - [`gf2`]: packed bit matrices and GF(2) rank.
//! - [`pauli`], [`clifford`], [`stabilizer`]: tableau simulation of Clifford
//!   trajectories (models B1/B2).
//! - [`dense`]: state-vector trajectories and density-matrix channels with
//!   Haar unitaries (models A1/A2), also used as a cross-check oracle.
//! - [`circuit`]: brick-layer circuit driver, seeding, and ensembles.
//! - [`scaling`]: data-collapse fits and derived exponents.
//! - [`store`], [`sweep`]: versioned CSV files, manifests, and resumable
//!   `(L, p)` sweeps.
//!
//! Entropies are in bits everywhere. Sites are 0-based.

pub mod circuit;
pub mod clifford;
pub mod dense;
pub mod gf2;
pub mod pauli;
pub mod scaling;
pub mod stabilizer;
pub mod store;
pub mod sweep;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("bad sites: {0}")]
    BadSites(String),
    #[error("malformed operator: {0}")]
    Malformed(String),
    #[error("product of anticommuting Paulis is not Hermitian")]
    NonHermitianProduct,
    #[error("images are not symplectic: {0}")]
    NotSymplectic(String),
    #[error("Clifford enumeration exceeded {0} elements; generator images are wrong")]
    EnumerationOverflow(usize),
    #[error("numerical corruption: {0}")]
    Numerical(String),
    #[error("trajectory {index} failed: {source}")]
    Trajectory {
        index: u64,
        #[source]
        source: Box<Error>,
    },
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("bad dataset: {0}")]
    Dataset(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), source }
    }
}

pub use circuit::{CircuitConfig, EnsembleSummary, Model, TrajectoryRecord};
pub use clifford::{CliffordGate, CliffordTable};
pub use dense::{MixedState, PureState, Unitary2Q};
pub use gf2::BitMatrix;
pub use pauli::{Pauli, PauliOperator};
pub use scaling::{CollapseResult, SweepDataset};
pub use stabilizer::{ProjectorSet, StabilizerState};
