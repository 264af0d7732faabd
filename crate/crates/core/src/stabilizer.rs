//! Stabilizer tableau with destabilizers (CHP layout).
//!
//! Rows `0..n` are destabilizers, rows `n..2n` stabilizers. Each row stores
//! its x and z bits packed into `u64` words plus a sign bit. Sites are
//! 0-based.

use std::fmt;

use rand::Rng;

use crate::clifford::CliffordGate;
use crate::gf2::{words_for, BitMatrix};
use crate::pauli::{anticommutes_words, product_phase, Pauli, PauliOperator};
use crate::Error;

/// Which projector family a measurement block uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProjectorSet {
    /// Four rank-1 projectors: `Z_i` and `Z_{i+1}` measured separately.
    P1,
    /// Two rank-2 projectors: the parity `Z_i Z_{i+1}`.
    P2,
}

#[derive(Clone, PartialEq, Eq)]
pub struct StabilizerState {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    negative: Vec<bool>,
}

impl StabilizerState {
    /// `|+>^n`: stabilizers `X_i`, destabilizers `Z_i`.
    pub fn new_plus_product_state(n: usize) -> Result<Self, Error> {
        let mut s = Self::blank(n)?;
        for i in 0..n {
            s.set_bit(i, i, false, true);
            s.set_bit(n + i, i, true, false);
        }
        Ok(s)
    }

    /// `|0>^n`: stabilizers `Z_i`, destabilizers `X_i`.
    pub fn new_zero_state(n: usize) -> Result<Self, Error> {
        let mut s = Self::blank(n)?;
        for i in 0..n {
            s.set_bit(i, i, true, false);
            s.set_bit(n + i, i, false, true);
        }
        Ok(s)
    }

    fn blank(n: usize) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::InvalidConfig("stabilizer state needs at least one qubit".into()));
        }
        let words = words_for(n);
        Ok(Self { n, words, x: vec![0; 2 * n * words], z: vec![0; 2 * n * words], negative: vec![false; 2 * n] })
    }

    fn set_bit(&mut self, row: usize, site: usize, x: bool, z: bool) {
        let (w, b) = (row * self.words + site / 64, 1u64 << (site % 64));
        if x {
            self.x[w] |= b;
        } else {
            self.x[w] &= !b;
        }
        if z {
            self.z[w] |= b;
        } else {
            self.z[w] &= !b;
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn row_x(&self, r: usize) -> &[u64] {
        &self.x[r * self.words..(r + 1) * self.words]
    }

    #[inline]
    fn row_z(&self, r: usize) -> &[u64] {
        &self.z[r * self.words..(r + 1) * self.words]
    }

    fn row(&self, r: usize) -> PauliOperator {
        PauliOperator::from_words(self.n, self.row_x(r).to_vec(), self.row_z(r).to_vec(), self.negative[r])
    }

    pub fn stabilizer(&self, i: usize) -> PauliOperator {
        assert!(i < self.n);
        self.row(self.n + i)
    }

    pub fn destabilizer(&self, i: usize) -> PauliOperator {
        assert!(i < self.n);
        self.row(i)
    }

    pub fn stabilizers(&self) -> Vec<PauliOperator> {
        (0..self.n).map(|i| self.stabilizer(i)).collect()
    }

    /// Replaces row `dst` by `row[src] · row[dst]`. The two rows must commute.
    fn rowsum(&mut self, dst: usize, src: usize) {
        let w = self.words;
        let phase = product_phase(self.row_x(src), self.row_z(src), self.row_x(dst), self.row_z(dst));
        assert!(phase.is_multiple_of(2), "row product picked up a factor of ±i");
        self.negative[dst] ^= self.negative[src] ^ (phase == 2);
        for k in 0..w {
            self.x[dst * w + k] ^= self.x[src * w + k];
            self.z[dst * w + k] ^= self.z[src * w + k];
        }
    }

    fn check_sites(&self, sites: &[usize]) -> Result<(), Error> {
        for (k, &s) in sites.iter().enumerate() {
            if s >= self.n {
                return Err(Error::BadSites(format!("site {s} out of range for {} qubits", self.n)));
            }
            if sites[..k].contains(&s) {
                return Err(Error::BadSites(format!("site {s} repeated")));
            }
        }
        Ok(())
    }

    /// Conjugates every generator by `gate` acting on `sites`.
    pub fn apply_clifford(&mut self, gate: &CliffordGate, sites: &[usize]) -> Result<(), Error> {
        if sites.len() != gate.arity() {
            return Err(Error::BadSites(format!("gate of arity {} given {} sites", gate.arity(), sites.len())));
        }
        self.check_sites(sites)?;
        let lut = gate.lut();
        let w = self.words;
        let mut pos = [(0usize, 0u32); 2];
        for (k, &s) in sites.iter().enumerate() {
            pos[k] = (s / 64, (s % 64) as u32);
        }
        let pos = &pos[..sites.len()];
        for r in 0..2 * self.n {
            let base = r * w;
            let mut pattern = 0usize;
            for (k, &(wi, b)) in pos.iter().enumerate() {
                pattern |= (((self.x[base + wi] >> b) & 1) as usize) << (2 * k);
                pattern |= (((self.z[base + wi] >> b) & 1) as usize) << (2 * k + 1);
            }
            if pattern == 0 {
                continue;
            }
            let e = lut[pattern];
            self.negative[r] ^= e.negate;
            for (k, &(wi, b)) in pos.iter().enumerate() {
                let xv = ((e.bits >> (2 * k)) & 1) as u64;
                let zv = ((e.bits >> (2 * k + 1)) & 1) as u64;
                self.x[base + wi] = (self.x[base + wi] & !(1 << b)) | (xv << b);
                self.z[base + wi] = (self.z[base + wi] & !(1 << b)) | (zv << b);
            }
        }
        Ok(())
    }

    /// Measures a Hermitian Pauli. Outcome 0 means eigenvalue +1 of `op` as
    /// given (sign included). An indeterminate outcome consumes exactly one
    /// unbiased bit from `rng`; a deterministic one consumes nothing.
    pub fn measure_pauli<R: Rng + ?Sized>(&mut self, op: &PauliOperator, rng: &mut R) -> Result<u8, Error> {
        if op.n_qubits() != self.n {
            return Err(Error::Malformed(format!("operator on {} qubits, state has {}", op.n_qubits(), self.n)));
        }
        if op.is_identity() {
            return Err(Error::Malformed("cannot measure the identity".into()));
        }
        let n = self.n;
        let w = self.words;
        // only words where op acts can contribute to the symplectic product
        let support: Vec<usize> = (0..w).filter(|&k| op.x[k] | op.z[k] != 0).collect();
        let anti = |s: &Self, r: usize| {
            let odd = support.iter().fold(0u32, |acc, &k| {
                acc ^ ((s.x[r * w + k] & op.z[k]) ^ (s.z[r * w + k] & op.x[k])).count_ones()
            });
            odd & 1 == 1
        };

        if let Some(p) = (n..2 * n).find(|&r| anti(self, r)) {
            for r in 0..2 * n {
                if r != p && r != p - n && anti(self, r) {
                    self.rowsum(r, p);
                }
            }
            let (dst, src) = (p - n, p);
            self.x.copy_within(src * w..(src + 1) * w, dst * w);
            self.z.copy_within(src * w..(src + 1) * w, dst * w);
            self.negative[dst] = self.negative[src];
            let outcome = rng.gen::<bool>();
            self.x[p * w..(p + 1) * w].copy_from_slice(&op.x);
            self.z[p * w..(p + 1) * w].copy_from_slice(&op.z);
            self.negative[p] = op.is_negative() ^ outcome;
            return Ok(outcome as u8);
        }

        // Deterministic: ±op is the product of the stabilizers whose
        // destabilizer partners anticommute with it.
        let mut acc_x = vec![0u64; w];
        let mut acc_z = vec![0u64; w];
        let mut negative = false;
        for i in 0..n {
            if anti(self, i) {
                let r = n + i;
                let phase = product_phase(&acc_x, &acc_z, self.row_x(r), self.row_z(r));
                assert!(phase.is_multiple_of(2), "stabilizer product picked up a factor of ±i");
                negative ^= self.negative[r] ^ (phase == 2);
                for k in 0..w {
                    acc_x[k] ^= self.x[r * w + k];
                    acc_z[k] ^= self.z[r * w + k];
                }
            }
        }
        assert!(acc_x == op.x && acc_z == op.z, "commuting operator not in the stabilizer group");
        Ok((negative != op.is_negative()) as u8)
    }

    /// Applies a measurement block on the neighbouring pair `(i, i + 1)`.
    /// `P1` returns two outcomes (lower site first), `P2` returns one.
    pub fn apply_measurement_block<R: Rng + ?Sized>(
        &mut self,
        pair: (usize, usize),
        set: ProjectorSet,
        rng: &mut R,
    ) -> Result<Vec<u8>, Error> {
        let (i, j) = pair;
        if j != i + 1 || j >= self.n {
            return Err(Error::BadSites(format!("({i}, {j}) is not a neighbouring pair in 0..{}", self.n)));
        }
        match set {
            ProjectorSet::P1 => {
                let a = self.measure_pauli(&PauliOperator::single(self.n, i, Pauli::Z), rng)?;
                let b = self.measure_pauli(&PauliOperator::single(self.n, j, Pauli::Z), rng)?;
                Ok(vec![a, b])
            }
            ProjectorSet::P2 => {
                let mut op = PauliOperator::single(self.n, i, Pauli::Z);
                op.set(j, Pauli::Z);
                Ok(vec![self.measure_pauli(&op, rng)?])
            }
        }
    }

    /// Entanglement entropy (bits) of the first `la` sites:
    /// `rank(stabilizers restricted to A) - la`.
    pub fn entanglement_entropy(&self, la: usize) -> usize {
        assert!(la <= self.n, "cut {la} beyond {} qubits", self.n);
        if la == 0 || la == self.n {
            return 0;
        }
        // columns: x bits of A padded to a word boundary, then z bits of A
        let wa = words_for(la);
        let tail = la % 64;
        let mask = if tail == 0 { u64::MAX } else { (1u64 << tail) - 1 };
        let mut data = Vec::with_capacity(self.n * 2 * wa);
        for i in 0..self.n {
            let r = self.n + i;
            for src in [self.row_x(r), self.row_z(r)] {
                data.extend_from_slice(&src[..wa]);
                *data.last_mut().unwrap() &= mask;
            }
        }
        let m = BitMatrix::from_row_words(self.n, 2 * wa * 64, data);
        let s = m.rank() - la;
        debug_assert!(s <= la.min(self.n - la));
        s
    }

    /// Checks the tableau invariants: stabilizers commute pairwise,
    /// destabilizer `i` anticommutes only with stabilizer `i`, destabilizers
    /// commute pairwise, and the `2n` rows are independent.
    pub fn audit(&self) -> Result<(), String> {
        let n = self.n;
        let anti = |a: usize, b: usize| anticommutes_words(self.row_x(a), self.row_z(a), self.row_x(b), self.row_z(b));
        for a in 0..2 * n {
            for b in a + 1..2 * n {
                let expected = a < n && b == a + n;
                if anti(a, b) != expected {
                    return Err(format!("rows {a} and {b}: anticommute = {}, expected {expected}", !expected));
                }
            }
        }
        let mut m = BitMatrix::zeros(2 * n, 2 * n);
        for r in 0..2 * n {
            for s in 0..n {
                let (x, z) = self.row(r).get(s).bits();
                m.set(r, s, x);
                m.set(r, n + s, z);
            }
        }
        let rank = m.rank();
        if rank != 2 * n {
            return Err(format!("symplectic rank {rank}, expected {}", 2 * n));
        }
        Ok(())
    }
}

impl fmt::Display for StabilizerState {
    /// One row per generator in `±XZYI` letters: destabilizers, a separator,
    /// then stabilizers.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            writeln!(f, "{}", self.destabilizer(i))?;
        }
        writeln!(f, "{}", "-".repeat(self.n + 1))?;
        for i in 0..self.n {
            writeln!(f, "{}", self.stabilizer(i))?;
        }
        Ok(())
    }
}

impl fmt::Debug for StabilizerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::CliffordTable;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z(n: usize, i: usize) -> PauliOperator {
        PauliOperator::single(n, i, Pauli::Z)
    }

    fn bell() -> StabilizerState {
        let mut s = StabilizerState::new_zero_state(2).unwrap();
        s.apply_clifford(&CliffordGate::hadamard(), &[0]).unwrap();
        s.apply_clifford(&CliffordGate::cnot(), &[0, 1]).unwrap();
        s
    }

    #[test]
    fn zero_qubits_rejected() {
        assert!(StabilizerState::new_plus_product_state(0).is_err());
    }

    #[test]
    fn plus_state_layout() {
        let s = StabilizerState::new_plus_product_state(3).unwrap();
        assert_eq!(s.stabilizer(1).to_string(), "+IXI");
        assert_eq!(s.destabilizer(1).to_string(), "+IZI");
        s.audit().unwrap();
    }

    #[test]
    fn plus_state_x_measurement_is_deterministic() {
        let mut s = StabilizerState::new_plus_product_state(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            assert_eq!(s.measure_pauli(&"X".parse().unwrap(), &mut rng).unwrap(), 0);
            assert_eq!(s.measure_pauli(&"-X".parse().unwrap(), &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn product_state_has_no_entanglement() {
        let s = StabilizerState::new_plus_product_state(4).unwrap();
        assert!((0..=4).all(|la| s.entanglement_entropy(la) == 0));
    }

    #[test]
    fn born_rule_on_plus_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let trials = 10_000;
        let ones: u32 = (0..trials)
            .map(|_| {
                let mut s = StabilizerState::new_plus_product_state(2).unwrap();
                s.measure_pauli(&z(2, 0), &mut rng).unwrap() as u32
            })
            .sum();
        let sigma = (trials as f64 * 0.25).sqrt();
        assert!((ones as f64 - trials as f64 / 2.0).abs() < 3.0 * sigma, "{ones}");
    }

    #[test]
    fn hadamard_maps_z_stabilizer_to_x() {
        let mut s = StabilizerState::new_zero_state(1).unwrap();
        s.apply_clifford(&CliffordGate::hadamard(), &[0]).unwrap();
        assert_eq!(s.stabilizer(0).to_string(), "+X");
    }

    #[test]
    fn bell_pair_has_one_bit() {
        let s = bell();
        assert_eq!(s.entanglement_entropy(1), 1);
        let stabs: Vec<String> = s.stabilizers().iter().map(ToString::to_string).collect();
        assert!(stabs.contains(&"+XX".to_string()) || stabs.contains(&"+ZZ".to_string()));
        s.audit().unwrap();
    }

    #[test]
    fn deterministic_measurements() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut s = StabilizerState::new_zero_state(3).unwrap();
        let before = s.clone();
        assert_eq!(s.measure_pauli(&z(3, 0), &mut rng).unwrap(), 0);
        assert_eq!(s, before);
        let mut b = bell();
        let zz: PauliOperator = "ZZ".parse().unwrap();
        let xx: PauliOperator = "XX".parse().unwrap();
        assert_eq!(b.measure_pauli(&zz, &mut rng).unwrap(), 0);
        assert_eq!(b.measure_pauli(&xx, &mut rng).unwrap(), 0);
        assert_eq!(b.measure_pauli(&"YY".parse().unwrap(), &mut rng).unwrap(), 1);
        assert_eq!(b.entanglement_entropy(1), 1);
    }

    #[test]
    fn repeated_measurement_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let mut s = StabilizerState::new_plus_product_state(3).unwrap();
            let a = s.measure_pauli(&"ZZI".parse().unwrap(), &mut rng).unwrap();
            let b = s.measure_pauli(&"ZZI".parse().unwrap(), &mut rng).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn measuring_bad_operators_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = StabilizerState::new_plus_product_state(3).unwrap();
        assert!(s.measure_pauli(&"ZZ".parse().unwrap(), &mut rng).is_err());
        assert!(s.measure_pauli(&"III".parse().unwrap(), &mut rng).is_err());
    }

    #[test]
    fn site_validation() {
        let mut s = StabilizerState::new_plus_product_state(3).unwrap();
        let g = CliffordGate::cnot();
        assert!(s.apply_clifford(&g, &[1, 1]).is_err());
        assert!(s.apply_clifford(&g, &[2, 3]).is_err());
        assert!(s.apply_clifford(&g, &[0]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(s.apply_measurement_block((2, 3), ProjectorSet::P1, &mut rng).is_err());
        assert!(s.apply_measurement_block((0, 2), ProjectorSet::P2, &mut rng).is_err());
    }

    #[test]
    fn p1_disentangles_bell_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = bell();
        let out = s.apply_measurement_block((0, 1), ProjectorSet::P1, &mut rng).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0], out[1]);
        assert_eq!(s.entanglement_entropy(1), 0);
    }

    #[test]
    fn p2_leaves_bell_pair_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut s = bell();
        let before = s.clone();
        assert_eq!(s.apply_measurement_block((0, 1), ProjectorSet::P2, &mut rng).unwrap(), vec![0]);
        assert_eq!(s, before);
        assert_eq!(s.entanglement_entropy(1), 1);
    }

    #[test]
    fn p2_entangles_plus_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut s = StabilizerState::new_plus_product_state(2).unwrap();
        s.apply_measurement_block((0, 1), ProjectorSet::P2, &mut rng).unwrap();
        assert_eq!(s.entanglement_entropy(1), 1);
    }

    #[test]
    fn ghz_has_one_bit_across_every_cut() {
        let n = 6;
        let mut s = StabilizerState::new_zero_state(n).unwrap();
        s.apply_clifford(&CliffordGate::hadamard(), &[0]).unwrap();
        for i in 0..n - 1 {
            s.apply_clifford(&CliffordGate::cnot(), &[i, i + 1]).unwrap();
        }
        for la in 1..n {
            assert_eq!(s.entanglement_entropy(la), 1);
        }
    }

    #[test]
    fn random_circuits_keep_invariants() {
        let table = CliffordTable::global();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 70; // spans two words
        let mut s = StabilizerState::new_plus_product_state(n).unwrap();
        for step in 0..3000 {
            let i = rng.gen_range(0..n - 1);
            match rng.gen_range(0..3) {
                0 => s.apply_clifford(table.sample(&mut rng), &[i, i + 1]).unwrap(),
                1 => {
                    s.apply_measurement_block((i, i + 1), ProjectorSet::P1, &mut rng).unwrap();
                }
                _ => {
                    s.apply_measurement_block((i, i + 1), ProjectorSet::P2, &mut rng).unwrap();
                }
            }
            if step % 500 == 0 {
                s.audit().unwrap();
                for la in [1, 17, 35, 64, 69] {
                    let e = s.entanglement_entropy(la);
                    assert_eq!(e, s.entanglement_entropy_complement(la));
                    assert!(e <= la.min(n - la));
                }
            }
        }
        s.audit().unwrap();
    }

    #[test]
    fn display_lists_all_rows() {
        let s = StabilizerState::new_plus_product_state(2).unwrap();
        assert_eq!(s.to_string(), "+ZI\n+IZ\n---\n+XI\n+IX\n");
    }

    impl StabilizerState {
        /// Entropy of the last `n - la` sites via the same rank formula.
        fn entanglement_entropy_complement(&self, la: usize) -> usize {
            let lb = self.n - la;
            let mut m = BitMatrix::zeros(self.n, 2 * lb);
            for i in 0..self.n {
                let st = self.stabilizer(i);
                for (k, s) in (la..self.n).enumerate() {
                    let (x, z) = st.get(s).bits();
                    m.set(i, k, x);
                    m.set(i, lb + k, z);
                }
            }
            m.rank() - lb
        }
    }
}
