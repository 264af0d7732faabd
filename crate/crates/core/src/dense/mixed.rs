use num_complex::Complex64 as C64;

use super::{apply_4x4, PureState, Unitary2Q, NORM_TOL, TRACE_DRIFT_TOL};
use crate::stabilizer::ProjectorSet;
use crate::Error;

/// One gate of a channel layer: an optional projector channel on `pair`
/// followed by the unitary.
#[derive(Clone, Debug)]
pub struct ChannelGate {
    pub pair: (usize, usize),
    pub measured: bool,
    pub unitary: Unitary2Q,
}

/// Density matrix, row-major `2^n × 2^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedState {
    n: usize,
    rho: Vec<C64>,
}

impl MixedState {
    pub fn from_pure(psi: &PureState) -> Self {
        let a = psi.amplitudes();
        let d = a.len();
        let mut rho = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                rho[r * d + c] = a[r] * a[c].conj();
            }
        }
        Self { n: psi.n_qubits(), rho }
    }

    pub fn plus_product(n: usize) -> Self {
        Self::from_pure(&PureState::plus_product(n))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1usize << n;
        let mut rho = vec![C64::new(0.0, 0.0); d * d];
        for k in 0..d {
            rho[k * d + k] = C64::new(1.0 / d as f64, 0.0);
        }
        Self { n, rho }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.rho[r * self.dim() + c]
    }

    pub fn trace(&self) -> f64 {
        let d = self.dim();
        (0..d).map(|k| self.rho[k * d + k].re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut e = 0.0f64;
        for r in 0..d {
            for c in r..d {
                e = e.max((self.rho[r * d + c] - self.rho[c * d + r].conj()).norm());
            }
        }
        e
    }

    /// Hermitian and unit trace within [`NORM_TOL`].
    pub fn validate(&self) -> Result<(), Error> {
        let h = self.hermiticity_error();
        let t = self.trace();
        if h > NORM_TOL || (t - 1.0).abs() > NORM_TOL {
            return Err(Error::Numerical(format!("density matrix invalid: hermiticity {h:e}, trace {t}")));
        }
        Ok(())
    }

    /// Largest entry-wise distance to another density matrix.
    pub fn distance(&self, other: &MixedState) -> f64 {
        self.rho.iter().zip(&other.rho).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    fn check_pair(&self, (i, j): (usize, usize)) -> Result<(), Error> {
        if i == j || i >= self.n || j >= self.n {
            return Err(Error::BadSites(format!("({i}, {j}) invalid for {} qubits", self.n)));
        }
        Ok(())
    }

    /// `ρ → U ρ U†`.
    pub fn conjugate(&mut self, u: &Unitary2Q, pair: (usize, usize)) -> Result<(), Error> {
        self.check_pair(pair)?;
        let n = self.n;
        // row site s is bit 2n-1-s of the flattened index, column site s is bit n-1-s
        apply_4x4(&mut self.rho, 2 * n - 1 - pair.0, 2 * n - 1 - pair.1, u);
        apply_4x4(&mut self.rho, n - 1 - pair.0, n - 1 - pair.1, &u.conj());
        Ok(())
    }

    /// `ρ → Σ_α P_α ρ P_α` for the projector set on `pair`.
    pub fn dephase(&mut self, set: ProjectorSet, pair: (usize, usize)) -> Result<(), Error> {
        self.check_pair(pair)?;
        let d = self.dim();
        let (bi, bj) = (self.n - 1 - pair.0, self.n - 1 - pair.1);
        let label = |k: usize| -> usize {
            let (a, b) = ((k >> bi) & 1, (k >> bj) & 1);
            match set {
                ProjectorSet::P1 => 2 * a + b,
                ProjectorSet::P2 => a ^ b,
            }
        };
        for r in 0..d {
            let lr = label(r);
            for c in 0..d {
                if label(c) != lr {
                    self.rho[r * d + c] = C64::new(0.0, 0.0);
                }
            }
        }
        Ok(())
    }

    /// Applies one layer of gates. Measured gates apply `Σ_α U P_α ρ P_α U†`
    /// with one `U` shared by all outcomes.
    pub fn channel_step(&mut self, gates: &[ChannelGate], set: ProjectorSet) -> Result<(), Error> {
        for g in gates {
            if g.measured {
                self.dephase(set, g.pair)?;
            }
            self.conjugate(&g.unitary, g.pair)?;
        }
        let t = self.trace();
        if (t - 1.0).abs() > TRACE_DRIFT_TOL {
            return Err(Error::Numerical(format!("trace drifted to {t}")));
        }
        Ok(())
    }

    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|v| v.norm_sqr()).sum()
    }

    /// `s₂(ρ) = -log₂ Tr ρ²` in bits.
    pub fn thermal_entropy(&self) -> f64 {
        -self.purity().log2()
    }
}
