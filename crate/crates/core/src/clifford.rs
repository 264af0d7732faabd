//! One- and two-qubit Clifford gates in the Heisenberg picture, and uniform
//! sampling from the two-qubit Clifford group modulo global phase.
//!
//! A gate is stored as the conjugation images `g X_k g†`, `g Z_k g†` of the
//! single-site generators (signs included). Two unitaries with identical
//! signed images differ only by a global phase and are identified here.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::io::{self, Write};
use std::sync::OnceLock;

use rand::Rng;

use crate::pauli::{anticommutes_words, product_phase, Pauli, PauliOperator};
use crate::Error;

/// Order of the two-qubit Clifford group modulo phases.
pub const TWO_QUBIT_CLIFFORD_CLASSES: usize = 11520;

const ENUMERATION_BOUND: usize = 4 * TWO_QUBIT_CLIFFORD_CLASSES;

/// Pauli on at most two qubits: bit `k` of `x`/`z` is site `k`, `phase` is
/// the power of `i` in front of `⊗ i^(x·z) X^x Z^z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Local {
    x: u64,
    z: u64,
    phase: u32,
}

impl Local {
    const IDENTITY: Local = Local { x: 0, z: 0, phase: 0 };

    fn mul(self, other: Local) -> Local {
        let p = product_phase(&[self.x], &[self.z], &[other.x], &[other.z]);
        Local { x: self.x ^ other.x, z: self.z ^ other.z, phase: (self.phase + other.phase + p) % 4 }
    }

    fn from_op(op: &PauliOperator) -> Local {
        Local { x: op.x[0], z: op.z[0], phase: if op.is_negative() { 2 } else { 0 } }
    }

    fn to_op(self, arity: usize) -> PauliOperator {
        debug_assert!(self.phase.is_multiple_of(2));
        PauliOperator::from_words(arity, vec![self.x], vec![self.z], self.phase == 2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    /// CNOT controlled on the first qubit.
    CnotL,
    /// CNOT controlled on the second qubit.
    CnotR,
    H(u8),
    /// Phase gate `diag(1, i)`.
    P(u8),
}

impl Generator {
    pub const ALL: [Generator; 6] =
        [Generator::CnotL, Generator::CnotR, Generator::H(0), Generator::H(1), Generator::P(0), Generator::P(1)];

    pub fn gate(self) -> CliffordGate {
        let img = |s: &str| s.parse::<PauliOperator>().expect("static Pauli literal");
        let images = match self {
            Generator::CnotL => [img("XX"), img("ZI"), img("IX"), img("ZZ")],
            Generator::CnotR => [img("XI"), img("ZZ"), img("XX"), img("IZ")],
            Generator::H(0) => [img("ZI"), img("XI"), img("IX"), img("IZ")],
            Generator::H(_) => [img("XI"), img("ZI"), img("IZ"), img("IX")],
            Generator::P(0) => [img("YI"), img("ZI"), img("IX"), img("IZ")],
            Generator::P(_) => [img("XI"), img("ZI"), img("IY"), img("IZ")],
        };
        CliffordGate::from_images(images.to_vec()).expect("generator images are symplectic")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct LutEntry {
    /// Site pattern `x0 | z0 << 1 | x1 << 2 | z1 << 3` after conjugation.
    pub(crate) bits: u8,
    pub(crate) negate: bool,
}

#[derive(Clone, PartialEq, Eq)]
pub struct CliffordGate {
    arity: usize,
    images: Vec<PauliOperator>,
    lut: Vec<LutEntry>,
}

impl CliffordGate {
    /// `images` lists `g X_0 g†, g Z_0 g†, g X_1 g†, g Z_1 g†` (as many as
    /// `2 · arity`), each an operator on `arity` qubits.
    pub fn from_images(images: Vec<PauliOperator>) -> Result<Self, Error> {
        let arity = images.len() / 2;
        if !(1..=2).contains(&arity) || images.len() != 2 * arity {
            return Err(Error::Malformed(format!("expected 2 or 4 generator images, got {}", images.len())));
        }
        if images.iter().any(|im| im.n_qubits() != arity) {
            return Err(Error::Malformed("generator image has wrong number of qubits".into()));
        }
        for a in 0..images.len() {
            if images[a].is_identity() {
                return Err(Error::NotSymplectic(format!("image {a} is the identity")));
            }
            for b in a + 1..images.len() {
                let partners = a / 2 == b / 2;
                if images[a].commutes_with(&images[b]) == partners {
                    return Err(Error::NotSymplectic(format!(
                        "images {a} and {b} {} but should not",
                        if partners { "commute" } else { "anticommute" }
                    )));
                }
            }
        }
        let mut gate = CliffordGate { arity, images, lut: Vec::new() };
        gate.lut = (0..1u8 << (2 * arity))
            .map(|pattern| {
                let (mut x, mut z) = (0u64, 0u64);
                for k in 0..arity {
                    x |= (((pattern >> (2 * k)) & 1) as u64) << k;
                    z |= (((pattern >> (2 * k + 1)) & 1) as u64) << k;
                }
                let img = gate.conjugate_local(Local { x, z, phase: 0 });
                let mut bits = 0u8;
                for k in 0..arity {
                    bits |= (((img.x >> k) & 1) as u8) << (2 * k);
                    bits |= (((img.z >> k) & 1) as u8) << (2 * k + 1);
                }
                LutEntry { bits, negate: img.phase == 2 }
            })
            .collect();
        Ok(gate)
    }

    pub fn identity(arity: usize) -> Self {
        let images = (0..arity)
            .flat_map(|k| [PauliOperator::single(arity, k, Pauli::X), PauliOperator::single(arity, k, Pauli::Z)])
            .collect();
        Self::from_images(images).expect("identity is symplectic")
    }

    pub fn hadamard() -> Self {
        Self::from_images(vec!["Z".parse().unwrap(), "X".parse().unwrap()]).unwrap()
    }

    pub fn phase() -> Self {
        Self::from_images(vec!["Y".parse().unwrap(), "Z".parse().unwrap()]).unwrap()
    }

    /// CNOT with control on the first qubit.
    pub fn cnot() -> Self {
        Generator::CnotL.gate()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn images(&self) -> &[PauliOperator] {
        &self.images
    }

    pub(crate) fn lut(&self) -> &[LutEntry] {
        &self.lut
    }

    /// `g P g†` for a Pauli with explicit `i`-power, built as the ordered
    /// product of generator images.
    fn conjugate_local(&self, p: Local) -> Local {
        let mut acc = Local { phase: p.phase, ..Local::IDENTITY };
        for k in 0..self.arity {
            let (xk, zk) = ((p.x >> k) & 1 == 1, (p.z >> k) & 1 == 1);
            if xk {
                acc = acc.mul(Local::from_op(&self.images[2 * k]));
            }
            if zk {
                acc = acc.mul(Local::from_op(&self.images[2 * k + 1]));
            }
            if xk && zk {
                acc.phase = (acc.phase + 1) % 4;
            }
        }
        acc
    }

    /// Conjugation image of a Hermitian Pauli on `arity` qubits.
    pub fn conjugate(&self, p: &PauliOperator) -> PauliOperator {
        assert_eq!(p.n_qubits(), self.arity);
        let img = self.conjugate_local(Local::from_op(p));
        assert!(img.phase.is_multiple_of(2), "Clifford image of a Hermitian Pauli must be Hermitian");
        img.to_op(self.arity)
    }

    /// The gate that applies `self` first and `after` second.
    pub fn then(&self, after: &CliffordGate) -> CliffordGate {
        assert_eq!(self.arity, after.arity);
        let images = self.images.iter().map(|im| after.conjugate(im)).collect();
        CliffordGate::from_images(images).expect("composition of Cliffords is Clifford")
    }

    /// Packed signed images; equal signatures mean equal gates up to phase.
    pub fn signature(&self) -> u32 {
        let mut sig = 0u32;
        for (k, im) in self.images.iter().enumerate() {
            let code = (im.x[0] as u32) | (im.z[0] as u32) << 2 | (im.is_negative() as u32) << 4;
            sig |= code << (5 * k);
        }
        sig
    }
}

impl fmt::Debug for CliffordGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["X0", "Z0", "X1", "Z1"];
        let parts: Vec<String> =
            self.images.iter().enumerate().map(|(k, im)| format!("{}->{}", names[k], im)).collect();
        write!(f, "CliffordGate[{}]", parts.join(", "))
    }
}

/// All two-qubit Clifford classes, each with a generating word.
pub struct CliffordTable {
    gates: Vec<CliffordGate>,
    words: Vec<Vec<Generator>>,
    index: HashMap<u32, usize>,
}

impl CliffordTable {
    /// Breadth-first closure of the generator set starting from the identity.
    pub fn enumerate() -> Result<Self, Error> {
        let gens: Vec<(Generator, CliffordGate)> = Generator::ALL.iter().map(|&g| (g, g.gate())).collect();
        let identity = CliffordGate::identity(2);
        let mut index = HashMap::new();
        index.insert(identity.signature(), 0);
        let mut gates = vec![identity];
        let mut words: Vec<Vec<Generator>> = vec![Vec::new()];
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for (g, gate) in &gens {
                let next = gates[i].then(gate);
                let sig = next.signature();
                if index.contains_key(&sig) {
                    continue;
                }
                if gates.len() >= ENUMERATION_BOUND {
                    return Err(Error::EnumerationOverflow(gates.len()));
                }
                let mut word = words[i].clone();
                word.push(*g);
                index.insert(sig, gates.len());
                queue.push_back(gates.len());
                gates.push(next);
                words.push(word);
            }
        }
        Ok(Self { gates, words, index })
    }

    /// Shared table, built on first use.
    pub fn global() -> &'static CliffordTable {
        static TABLE: OnceLock<CliffordTable> = OnceLock::new();
        TABLE.get_or_init(|| CliffordTable::enumerate().expect("two-qubit Clifford enumeration"))
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gates(&self) -> &[CliffordGate] {
        &self.gates
    }

    pub fn get(&self, i: usize) -> &CliffordGate {
        &self.gates[i]
    }

    /// Generators applied left to right (first element acts first).
    pub fn word(&self, i: usize) -> &[Generator] {
        &self.words[i]
    }

    pub fn index_of(&self, gate: &CliffordGate) -> Option<usize> {
        self.index.get(&gate.signature()).copied()
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.gen_range(0..self.gates.len())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &CliffordGate {
        &self.gates[self.sample_index(rng)]
    }

    /// One line per class: index, hex signature, and the four signed images.
    pub fn write_signatures<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# two-qubit Clifford classes: {}", self.gates.len())?;
        writeln!(out, "# index signature X0 Z0 X1 Z1")?;
        for (i, g) in self.gates.iter().enumerate() {
            let ims: Vec<String> = g.images().iter().map(ToString::to_string).collect();
            writeln!(out, "{i} {:05x} {}", g.signature(), ims.join(" "))?;
        }
        Ok(())
    }
}

/// Draws a gate uniformly from the two-qubit Clifford group.
pub fn sample_uniform_2q<R: Rng + ?Sized>(rng: &mut R) -> CliffordGate {
    CliffordTable::global().sample(rng).clone()
}

pub fn enumerate_2q_classes() -> Result<Vec<CliffordGate>, Error> {
    Ok(CliffordTable::enumerate()?.gates)
}

/// Pairwise commutation audit of a gate's images.
pub fn is_symplectic(gate: &CliffordGate) -> bool {
    let ims = gate.images();
    (0..ims.len()).all(|a| {
        (a + 1..ims.len()).all(|b| {
            let anti = anticommutes_words(&ims[a].x, &ims[a].z, &ims[b].x, &ims[b].z);
            anti == (a / 2 == b / 2)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn closure_has_11520_classes() {
        let t = CliffordTable::global();
        assert_eq!(t.len(), TWO_QUBIT_CLIFFORD_CLASSES);
        assert_eq!(t.index_of(&CliffordGate::identity(2)), Some(0));
    }

    #[test]
    fn hadamard_generator_swaps_x_and_z() {
        let h = Generator::H(0).gate();
        let t = CliffordTable::global();
        let i = t.index_of(&h).expect("H0 enumerated");
        let ims = t.get(i).images();
        assert_eq!(ims[0].to_string(), "+ZI");
        assert_eq!(ims[1].to_string(), "+XI");
        assert_eq!(t.word(i), &[Generator::H(0)]);
    }

    #[test]
    fn non_symplectic_images_rejected() {
        let bad = vec!["XI".parse().unwrap(), "XI".parse().unwrap(), "IX".parse().unwrap(), "IZ".parse().unwrap()];
        assert!(matches!(CliffordGate::from_images(bad), Err(Error::NotSymplectic(_))));
        let bad = vec!["XI".parse().unwrap(), "ZI".parse().unwrap(), "XX".parse().unwrap(), "IZ".parse().unwrap()];
        assert!(CliffordGate::from_images(bad).is_err());
    }

    #[test]
    fn conjugating_y_through_phase_gate() {
        // S Y S† = -X
        let s = CliffordGate::phase();
        assert_eq!(s.conjugate(&"Y".parse().unwrap()).to_string(), "-X");
        // H Y H† = -Y
        assert_eq!(CliffordGate::hadamard().conjugate(&"Y".parse().unwrap()).to_string(), "-Y");
    }

    #[test]
    fn every_class_is_symplectic() {
        assert!(CliffordTable::global().gates().iter().all(is_symplectic));
    }

    #[test]
    fn sampling_is_reproducible() {
        let t = CliffordTable::global();
        let a: Vec<usize> = {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            (0..100).map(|_| t.sample_index(&mut rng)).collect()
        };
        let b: Vec<usize> = {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            (0..100).map(|_| t.sample_index(&mut rng)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn chi_square_uniform_over_classes() {
        let t = CliffordTable::global();
        let mut counts = vec![0u64; t.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000u64;
        for _ in 0..n {
            // identify the sampled gate by its images, not by the index drawn
            let g = t.sample(&mut rng);
            counts[t.index_of(g).unwrap()] += 1;
        }
        let expected = n as f64 / t.len() as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        let dist = ChiSquared::new((t.len() - 1) as f64).unwrap();
        let p_value = 1.0 - dist.cdf(chi2);
        assert!(p_value > 1e-3, "chi2 = {chi2}, p = {p_value}");
    }

    #[test]
    fn x0_image_marginals_match_enumeration() {
        // Every non-identity signed Pauli is an equally likely image of X0:
        // 11520 / 30 = 384 classes per image.
        let t = CliffordTable::global();
        let mut by_image: HashMap<String, usize> = HashMap::new();
        for g in t.gates() {
            *by_image.entry(g.images()[0].to_string()).or_default() += 1;
        }
        assert_eq!(by_image.len(), 30);
        assert!(by_image.values().all(|&c| c == 384));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 300_000usize;
        let mut hits: HashMap<String, usize> = HashMap::new();
        for _ in 0..n {
            *hits.entry(t.sample(&mut rng).images()[0].to_string()).or_default() += 1;
        }
        let p = 1.0 / 30.0;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for (img, &c) in &hits {
            assert!((c as f64 - n as f64 * p).abs() < 4.0 * sigma, "{img}: {c}");
        }
    }

    #[test]
    fn signature_dump_has_one_line_per_class() {
        let mut buf = Vec::new();
        CliffordTable::global().write_signatures(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 11520);
    }
}
