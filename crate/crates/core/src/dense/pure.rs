use num_complex::Complex64 as C64;
use rand::Rng;

use super::{apply_4x4, sample_two_outcome, Unitary2Q, NORM_TOL, PROBABILITY_FLOOR};
use crate::clifford::CliffordGate;
use crate::stabilizer::ProjectorSet;
use crate::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n: usize,
    amps: Vec<C64>,
}

impl PureState {
    pub fn plus_product(n: usize) -> Self {
        let a = C64::new((0.5f64).powf(n as f64 / 2.0), 0.0);
        Self { n, amps: vec![a; 1 << n] }
    }

    /// Computational basis state; `bits[s]` is the value of site `s`.
    pub fn basis(bits: &[u8]) -> Self {
        let n = bits.len();
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b as usize & 1));
        amps[idx] = C64::new(1.0, 0.0);
        Self { n, amps }
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self, Error> {
        if amps.len() != 1 << n {
            return Err(Error::InvalidConfig(format!("{} amplitudes for {n} qubits", amps.len())));
        }
        let mut s = Self { n, amps };
        s.normalize()?;
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn normalize(&mut self) -> Result<(), Error> {
        let ns = self.norm_sqr();
        if ns < PROBABILITY_FLOOR {
            return Err(Error::Numerical(format!("state norm² {ns:e} collapsed")));
        }
        let inv = 1.0 / ns.sqrt();
        self.amps.iter_mut().for_each(|a| *a *= inv);
        Ok(())
    }

    #[inline]
    fn bit(&self, site: usize) -> usize {
        self.n - 1 - site
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<(), Error> {
        if i == j || i >= self.n || j >= self.n {
            return Err(Error::BadSites(format!("({i}, {j}) invalid for {} qubits", self.n)));
        }
        Ok(())
    }

    /// `|ψ> → U|ψ>` with `U` acting on the ordered sites `(i, j)`.
    pub fn apply_unitary(&mut self, u: &Unitary2Q, (i, j): (usize, usize)) -> Result<(), Error> {
        self.check_pair(i, j)?;
        let (bi, bj) = (self.bit(i), self.bit(j));
        apply_4x4(&mut self.amps, bi, bj, u);
        Ok(())
    }

    pub fn apply_clifford(&mut self, gate: &CliffordGate, (i, j): (usize, usize)) -> Result<(), Error> {
        self.apply_unitary(&Unitary2Q::from_clifford(gate), (i, j))
    }

    /// Probability that the Z-parity of the sites in `mask` (bit mask over
    /// amplitude indices) is even.
    fn even_parity_probability(&self, mask: usize) -> f64 {
        self.amps.iter().enumerate().filter(|(k, _)| (k & mask).count_ones().is_multiple_of(2)).map(|(_, a)| a.norm_sqr()).sum()
    }

    fn project_parity(&mut self, mask: usize, outcome: u8) -> Result<(), Error> {
        for (k, a) in self.amps.iter_mut().enumerate() {
            if ((k & mask).count_ones() % 2) as u8 != outcome {
                *a = C64::new(0.0, 0.0);
            }
        }
        self.normalize()
    }

    /// Measures the product of `Z` over the sites in `mask`; outcome 0 is
    /// eigenvalue +1.
    fn measure_parity<R: Rng + ?Sized>(&mut self, mask: usize, rng: &mut R) -> Result<u8, Error> {
        let p0 = self.even_parity_probability(mask) / self.norm_sqr();
        let outcome = sample_two_outcome(p0, rng);
        self.project_parity(mask, outcome)?;
        Ok(outcome)
    }

    fn pair_masks(&self, set: ProjectorSet, (i, j): (usize, usize)) -> Vec<usize> {
        let (mi, mj) = (1usize << self.bit(i), 1usize << self.bit(j));
        match set {
            ProjectorSet::P1 => vec![mi, mj],
            ProjectorSet::P2 => vec![mi | mj],
        }
    }

    /// Born probabilities of each outcome of the projector set. `P1` outcomes
    /// are indexed `2a + b` for `Z_i = (-1)^a`, `Z_j = (-1)^b`.
    pub fn outcome_probabilities(&self, set: ProjectorSet, pair: (usize, usize)) -> Result<Vec<f64>, Error> {
        self.check_pair(pair.0, pair.1)?;
        let masks = self.pair_masks(set, pair);
        let mut probs = vec![0.0; 1 << masks.len()];
        for (k, a) in self.amps.iter().enumerate() {
            let alpha = masks.iter().fold(0usize, |acc, &m| (acc << 1) | ((k & m).count_ones() % 2) as usize);
            probs[alpha] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Samples an outcome with probability `<ψ|P_α|ψ>` and replaces the state
    /// by the normalised projection. For `P1` the two commuting `Z`
    /// measurements are taken in sequence (lower site first), which samples
    /// the joint Born distribution.
    pub fn project_and_sample<R: Rng + ?Sized>(
        &mut self,
        set: ProjectorSet,
        pair: (usize, usize),
        rng: &mut R,
    ) -> Result<u8, Error> {
        let (i, j) = pair;
        if j != i + 1 || j >= self.n {
            return Err(Error::BadSites(format!("({i}, {j}) is not a neighbouring pair in 0..{}", self.n)));
        }
        let total = self.norm_sqr();
        if total < PROBABILITY_FLOOR || (total - 1.0).abs() > 1e3 * NORM_TOL {
            return Err(Error::Numerical(format!("outcome probabilities sum to {total}")));
        }
        let mut alpha = 0u8;
        for mask in self.pair_masks(set, pair) {
            alpha = (alpha << 1) | self.measure_parity(mask, rng)?;
        }
        Ok(alpha)
    }

    /// Projects onto a prescribed outcome; returns its Born probability.
    pub fn project_onto(&mut self, set: ProjectorSet, pair: (usize, usize), alpha: u8) -> Result<f64, Error> {
        let probs = self.outcome_probabilities(set, pair)?;
        let p = *probs.get(alpha as usize).ok_or_else(|| Error::Malformed(format!("outcome {alpha} out of range")))?;
        if p < PROBABILITY_FLOOR {
            return Err(Error::Numerical(format!("outcome {alpha} has probability {p:e}")));
        }
        let masks = self.pair_masks(set, pair);
        for (k, a) in self.amps.iter_mut().enumerate() {
            let got = masks.iter().fold(0u8, |acc, &m| (acc << 1) | ((k & m).count_ones() % 2) as u8);
            if got != alpha {
                *a = C64::new(0.0, 0.0);
            }
        }
        self.normalize()?;
        Ok(p)
    }

    /// Second Rényi entropy (bits) of the first `la` sites.
    pub fn renyi2_entropy(&self, la: usize) -> f64 {
        assert!(la <= self.n);
        if la == 0 || la == self.n {
            return 0.0;
        }
        let (da, db) = (1usize << la, 1usize << (self.n - la));
        let m = &self.amps;
        // Tr ρ_A² = ||M M†||_F² = ||M† M||_F²; form whichever Gram matrix is smaller.
        let purity = if da <= db {
            let mut g = vec![C64::new(0.0, 0.0); da * da];
            for a in 0..da {
                let ra = &m[a * db..(a + 1) * db];
                for b in a..da {
                    let rb = &m[b * db..(b + 1) * db];
                    let v: C64 = ra.iter().zip(rb).map(|(x, y)| x * y.conj()).sum();
                    g[a * da + b] = v;
                }
            }
            let mut s = 0.0;
            for a in 0..da {
                s += g[a * da + a].norm_sqr();
                for b in a + 1..da {
                    s += 2.0 * g[a * da + b].norm_sqr();
                }
            }
            s
        } else {
            let mut g = vec![C64::new(0.0, 0.0); db * db];
            for a in 0..da {
                let row = &m[a * db..(a + 1) * db];
                for b in 0..db {
                    let cb = row[b].conj();
                    if cb == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let gr = &mut g[b * db..(b + 1) * db];
                    for (gv, x) in gr.iter_mut().zip(row) {
                        *gv += cb * x;
                    }
                }
            }
            g.iter().map(|v| v.norm_sqr()).sum()
        };
        // rounding can push the purity of a product state a hair above 1
        (-purity.log2()).max(0.0)
    }
}
