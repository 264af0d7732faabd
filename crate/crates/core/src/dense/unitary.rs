use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::clifford::{CliffordGate, Generator};
use crate::pauli::{Pauli, PauliOperator};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A 4×4 unitary on an ordered pair of sites `(a, b)`. Local basis index is
/// `2·q_a + q_b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unitary2Q {
    pub m: [[C64; 4]; 4],
}

impl Unitary2Q {
    pub fn identity() -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (k, row) in m.iter_mut().enumerate() {
            row[k] = ONE;
        }
        Self { m }
    }

    pub fn swap() -> Self {
        let mut m = [[ZERO; 4]; 4];
        m[0][0] = ONE;
        m[1][2] = ONE;
        m[2][1] = ONE;
        m[3][3] = ONE;
        Self { m }
    }

    pub fn from_rows(m: [[C64; 4]; 4]) -> Self {
        Self { m }
    }

    /// Haar-random element of U(4): Gram-Schmidt orthonormalisation of a
    /// complex Ginibre matrix. Gram-Schmidt yields `R` with a positive real
    /// diagonal, which is the phase-fixed QR that makes `Q` Haar distributed.
    pub fn sample_haar<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut cols = [[ZERO; 4]; 4];
        for col in cols.iter_mut() {
            for v in col.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *v = C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            }
        }
        for j in 0..4 {
            for k in 0..j {
                let proj: C64 = (0..4).map(|r| cols[k][r].conj() * cols[j][r]).sum();
                for r in 0..4 {
                    let sub = proj * cols[k][r];
                    cols[j][r] -= sub;
                }
            }
            let norm = cols[j].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            for v in cols[j].iter_mut() {
                *v /= norm;
            }
        }
        let mut m = [[ZERO; 4]; 4];
        for (c, col) in cols.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                m[r][c] = *v;
            }
        }
        Self { m }
    }

    pub fn dagger(&self) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.m[c][r].conj();
            }
        }
        Self { m }
    }

    pub fn conj(&self) -> Self {
        let mut m = self.m;
        for v in m.iter_mut().flatten() {
            *v = v.conj();
        }
        Self { m }
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Unitary2Q) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|k| self.m[r][k] * other.m[k][c]).sum();
            }
        }
        Self { m }
    }

    pub fn apply(&self, v: &[C64; 4]) -> [C64; 4] {
        let mut out = [ZERO; 4];
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|k| self.m[r][k] * v[k]).sum();
        }
        out
    }

    /// Max-entry deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.dagger().mul(self);
        let mut err = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                let target = if r == c { ONE } else { ZERO };
                err = err.max((p.m[r][c] - target).norm());
            }
        }
        err
    }

    /// Max-entry distance after removing a global phase.
    pub fn distance_up_to_phase(&self, other: &Unitary2Q) -> f64 {
        let overlap: C64 = (0..4).flat_map(|r| (0..4).map(move |c| (r, c))).map(|(r, c)| other.m[r][c].conj() * self.m[r][c]).sum();
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
        let mut d = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                d = d.max((self.m[r][c] - phase * other.m[r][c]).norm());
            }
        }
        d
    }

    /// Dense matrix of the listed generators, written out directly.
    pub fn generator(g: Generator) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let one_qubit = |u: [[C64; 2]; 2], site: u8| {
            let mut m = [[ZERO; 4]; 4];
            for a in 0..2 {
                for b in 0..2 {
                    for a2 in 0..2 {
                        for b2 in 0..2 {
                            let v = if site == 0 {
                                if b == b2 { u[a][a2] } else { ZERO }
                            } else if a == a2 {
                                u[b][b2]
                            } else {
                                ZERO
                            };
                            m[2 * a + b][2 * a2 + b2] = v;
                        }
                    }
                }
            }
            Self { m }
        };
        match g {
            Generator::CnotL => {
                let mut m = [[ZERO; 4]; 4];
                m[0][0] = ONE;
                m[1][1] = ONE;
                m[2][3] = ONE;
                m[3][2] = ONE;
                Self { m }
            }
            Generator::CnotR => {
                let mut m = [[ZERO; 4]; 4];
                m[0][0] = ONE;
                m[2][2] = ONE;
                m[1][3] = ONE;
                m[3][1] = ONE;
                Self { m }
            }
            Generator::H(s) => one_qubit([[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(h, 0.0), C64::new(-h, 0.0)]], s),
            Generator::P(s) => one_qubit([[ONE, ZERO], [ZERO, C64::new(0.0, 1.0)]], s),
        }
    }

    /// Product of generators, the first element acting first.
    pub fn from_word(word: &[Generator]) -> Self {
        word.iter().fold(Self::identity(), |acc, &g| Self::generator(g).mul(&acc))
    }

    /// A unitary (fixed up to global phase) realising a two-qubit Clifford.
    ///
    /// `U|00>` is the joint +1 eigenvector of the images of `Z_0`, `Z_1`; the
    /// other columns follow from `U X_0^a X_1^b |00> = X_0'^a X_1'^b U|00>`.
    pub fn from_clifford(gate: &CliffordGate) -> Self {
        assert_eq!(gate.arity(), 2, "only two-qubit gates have a 4x4 matrix");
        let ims = gate.images();
        let (x0, z0, x1, z1) = (pauli_matrix(&ims[0]), pauli_matrix(&ims[1]), pauli_matrix(&ims[2]), pauli_matrix(&ims[3]));
        let id = Self::identity();
        let half = |p: &Unitary2Q| {
            let mut m = [[ZERO; 4]; 4];
            for r in 0..4 {
                for c in 0..4 {
                    m[r][c] = (id.m[r][c] + p.m[r][c]) * 0.5;
                }
            }
            Self { m }
        };
        let proj = half(&z0).mul(&half(&z1));
        let (best, _) = (0..4)
            .map(|c| (c, (0..4).map(|r| proj.m[r][c].norm_sqr()).sum::<f64>()))
            .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        let mut v0 = [ZERO; 4];
        for r in 0..4 {
            v0[r] = proj.m[r][best];
        }
        let norm = v0.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        v0.iter_mut().for_each(|v| *v /= norm);
        let cols = [v0, x1.apply(&v0), x0.apply(&v0), x0.mul(&x1).apply(&v0)];
        let mut m = [[ZERO; 4]; 4];
        for (c, col) in cols.iter().enumerate() {
            for r in 0..4 {
                m[r][c] = col[r];
            }
        }
        Self { m }
    }
}

/// Dense 4×4 matrix of a signed two-qubit Pauli.
pub fn pauli_matrix(p: &PauliOperator) -> Unitary2Q {
    assert_eq!(p.n_qubits(), 2);
    let single = |q: Pauli| -> [[C64; 2]; 2] {
        match q {
            Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    };
    let (a, b) = (single(p.get(0)), single(p.get(1)));
    let sign = if p.is_negative() { -ONE } else { ONE };
    let mut m = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            m[r][c] = sign * a[r / 2][c / 2] * b[r % 2][c % 2];
        }
    }
    Unitary2Q { m }
}
