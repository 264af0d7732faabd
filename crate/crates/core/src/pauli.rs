//! Hermitian Pauli strings with a ±1 sign.
//!
//! Site `k` carries the factor `i^(x·z) X^x Z^z`, so `x = z = 1` is `Y`.

use std::fmt;
use std::str::FromStr;

use crate::gf2::words_for;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Power of `i` (mod 4) picked up by multiplying the word-packed strings
/// `(x1, z1) · (x2, z2)` site by site.
#[inline]
pub(crate) fn product_phase(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> u32 {
    let mut plus = 0u32;
    let mut minus = 0u32;
    for k in 0..x1.len() {
        let (a, b, c, d) = (x1[k], z1[k], x2[k], z2[k]);
        let only_x1 = a & !b;
        let y1 = a & b;
        let only_z1 = !a & b;
        let only_x2 = c & !d;
        let y2 = c & d;
        let only_z2 = !c & d;
        // XY, YZ, ZX contribute +i; XZ, YX, ZY contribute -i
        plus += ((only_x1 & y2) | (y1 & only_z2) | (only_z1 & only_x2)).count_ones();
        minus += ((only_x1 & only_z2) | (y1 & only_x2) | (only_z1 & y2)).count_ones();
    }
    (plus + 4 * x1.len() as u32 * 64 - minus) % 4
}

/// Symplectic inner product parity: true when the two strings anticommute.
#[inline]
pub(crate) fn anticommutes_words(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> bool {
    let mut acc = 0u64;
    for k in 0..x1.len() {
        acc ^= (x1[k] & z2[k]) ^ (z1[k] & x2[k]);
    }
    acc.count_ones() & 1 == 1
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    pub(crate) x: Vec<u64>,
    pub(crate) z: Vec<u64>,
    negative: bool,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self { n, x: vec![0; w], z: vec![0; w], negative: false }
    }

    pub fn single(n: usize, site: usize, p: Pauli) -> Self {
        let mut op = Self::identity(n);
        op.set(site, p);
        op
    }

    pub fn from_paulis(paulis: &[Pauli], negative: bool) -> Self {
        let mut op = Self::identity(paulis.len());
        for (k, &p) in paulis.iter().enumerate() {
            op.set(k, p);
        }
        op.negative = negative;
        op
    }

    pub(crate) fn from_words(n: usize, x: Vec<u64>, z: Vec<u64>, negative: bool) -> Self {
        debug_assert_eq!(x.len(), words_for(n));
        debug_assert_eq!(z.len(), words_for(n));
        Self { n, x, z, negative }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn set_negative(&mut self, negative: bool) {
        self.negative = negative;
    }

    pub fn get(&self, site: usize) -> Pauli {
        assert!(site < self.n, "site {site} out of range for {} qubits", self.n);
        let (w, b) = (site / 64, site % 64);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, site: usize, p: Pauli) {
        assert!(site < self.n, "site {site} out of range for {} qubits", self.n);
        let (w, b) = (site / 64, 1u64 << (site % 64));
        let (x, z) = p.bits();
        self.x[w] = if x { self.x[w] | b } else { self.x[w] & !b };
        self.z[w] = if z { self.z[w] | b } else { self.z[w] & !b };
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(x, z)| (x | z).count_ones() as usize).sum()
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        assert_eq!(self.n, other.n, "operator sizes differ");
        !anticommutes_words(&self.x, &self.z, &other.x, &other.z)
    }

    /// `self · other`. Errors if the operators anticommute (the product would
    /// carry a factor of ±i and not be Hermitian).
    pub fn mul(&self, other: &PauliOperator) -> Result<PauliOperator, Error> {
        if self.n != other.n {
            return Err(Error::Malformed(format!("operator sizes differ: {} vs {}", self.n, other.n)));
        }
        let phase = product_phase(&self.x, &self.z, &other.x, &other.z);
        if phase % 2 == 1 {
            return Err(Error::NonHermitianProduct);
        }
        let negative = self.negative ^ other.negative ^ (phase == 2);
        let x = self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect();
        let z = self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect();
        Ok(PauliOperator { n: self.n, x, z, negative })
    }

    /// Unsigned equality of the Pauli letters.
    pub fn same_support(&self, other: &PauliOperator) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    /// Extends an operator on `k` qubits to `n` qubits, placing site `j` of
    /// `self` on `sites[j]`.
    pub fn embed(&self, n: usize, sites: &[usize]) -> PauliOperator {
        assert_eq!(sites.len(), self.n);
        let mut op = PauliOperator::identity(n);
        for (j, &s) in sites.iter().enumerate() {
            op.set(s, self.get(j));
        }
        op.negative = self.negative;
        op
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        for k in 0..self.n {
            write!(f, "{}", self.get(k).letter())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Parses strings like `+XZI`, `-YY`, or `ZZ` (sign optional).
    fn from_str(s: &str) -> Result<Self, Error> {
        let (negative, body) = match s.as_bytes().first() {
            Some(b'+') => (false, &s[1..]),
            Some(b'-') => (true, &s[1..]),
            _ => (false, s),
        };
        if body.is_empty() {
            return Err(Error::Malformed(format!("empty Pauli string {s:?}")));
        }
        let paulis = body
            .chars()
            .map(|c| match c {
                'I' | '_' | '.' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(Error::Malformed(format!("bad Pauli letter {c:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PauliOperator::from_paulis(&paulis, negative))
    }
}
