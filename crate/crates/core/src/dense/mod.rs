//! Exact state-vector and density-matrix simulation.
//!
//! Site `s` of an `n`-qubit register is bit `n - 1 - s` of the amplitude
//! index, so the first `L_A` sites are the most significant bits and a
//! state vector reshapes row-major into a `2^L_A × 2^(L - L_A)` matrix.

mod mixed;
mod pure;
mod unitary;

pub use mixed::{ChannelGate, MixedState};
pub use pure::PureState;
pub use unitary::{pauli_matrix, Unitary2Q};

use num_complex::Complex64 as C64;
use rand::Rng;

/// Allowed deviation of a state norm from one.
pub const NORM_TOL: f64 = 1e-10;
/// Trace drift that aborts channel evolution.
pub const TRACE_DRIFT_TOL: f64 = 1e-8;
/// Outcome probabilities below this are treated as impossible.
pub const PROBABILITY_FLOOR: f64 = 1e-12;
/// Band around 0, 1/2 and 1 in which a two-outcome probability is taken to be
/// exactly that value (stabilizer-state probabilities).
pub const BORN_SNAP_TOL: f64 = 1e-10;

/// Samples a two-outcome measurement with `P(outcome 0) = p0`.
///
/// Probabilities within [`BORN_SNAP_TOL`] of 0 or 1 consume no randomness;
/// within the band around 1/2 the outcome is a single unbiased bit. This is
/// the same consumption pattern as the tableau engine, so Clifford circuits
/// driven from one random stream follow identical trajectories on both.
pub fn sample_two_outcome<R: Rng + ?Sized>(p0: f64, rng: &mut R) -> u8 {
    if p0 <= BORN_SNAP_TOL {
        1
    } else if p0 >= 1.0 - BORN_SNAP_TOL {
        0
    } else if (p0 - 0.5).abs() <= BORN_SNAP_TOL {
        rng.gen::<bool>() as u8
    } else {
        (rng.gen::<f64>() >= p0) as u8
    }
}

#[inline]
fn insert_zero_bit(k: usize, bit: usize) -> usize {
    let low = k & ((1 << bit) - 1);
    ((k >> bit) << (bit + 1)) | low
}

/// Applies `u` to the bit pair `(bit_a, bit_b)` of a vector of length `2^m`;
/// `bit_a` is the more significant bit of the local 4-dim index.
pub(crate) fn apply_4x4(amps: &mut [C64], bit_a: usize, bit_b: usize, u: &Unitary2Q) {
    debug_assert_ne!(bit_a, bit_b);
    let (lo, hi) = if bit_a < bit_b { (bit_a, bit_b) } else { (bit_b, bit_a) };
    let (ma, mb) = (1usize << bit_a, 1usize << bit_b);
    let m = &u.m;
    for k in 0..amps.len() / 4 {
        let base = insert_zero_bit(insert_zero_bit(k, lo), hi);
        let idx = [base, base | mb, base | ma, base | ma | mb];
        let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
        for r in 0..4 {
            amps[idx[r]] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
        }
    }
}
