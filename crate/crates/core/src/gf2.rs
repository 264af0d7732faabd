//! Dense bit matrices over GF(2).
//!
//! Rows are packed into `u64` words, row-major, so the elimination inner loop
//! (row XOR) is a contiguous word-wise operation.

use std::fmt;

const WORD: usize = 64;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self { rows, cols, stride, data: vec![0; rows * stride] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from strings of `'0'`/`'1'`, one per row.
    ///
    /// Panics if rows have different lengths or contain other characters.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged bit rows");
            for (j, c) in r.chars().enumerate() {
                match c {
                    '0' => {}
                    '1' => m.set(i, j, true),
                    _ => panic!("invalid bit character {c:?}"),
                }
            }
        }
        m
    }

    /// Builds a matrix directly from packed row words. Bits past `cols` in the
    /// last word of each row are cleared.
    pub fn from_row_words(rows: usize, cols: usize, words: Vec<u64>) -> Self {
        let stride = words_for(cols);
        assert_eq!(words.len(), rows * stride, "packed length does not match shape");
        let mut m = Self { rows, cols, stride, data: words };
        m.clear_padding();
        m
    }

    fn clear_padding(&mut self) {
        let tail = self.cols % WORD;
        if tail == 0 || self.stride == 0 {
            return;
        }
        let mask = (1u64 << tail) - 1;
        for r in 0..self.rows {
            self.data[r * self.stride + self.stride - 1] &= mask;
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "bit ({r}, {c}) out of bounds");
        (self.data[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "bit ({r}, {c}) out of bounds");
        let w = &mut self.data[r * self.stride + c / WORD];
        let bit = 1u64 << (c % WORD);
        if value {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.stride {
            self.data.swap(a * self.stride + k, b * self.stride + k);
        }
    }

    /// `row[dst] ^= row[src]`
    pub fn xor_row_into(&mut self, src: usize, dst: usize) {
        assert_ne!(src, dst);
        let s = self.stride;
        let (src_row, dst_row) = if src < dst {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&lo[src * s..(src + 1) * s], &mut hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&hi[..s], &mut lo[dst * s..(dst + 1) * s])
        };
        for (d, v) in dst_row.iter_mut().zip(src_row) {
            *d ^= *v;
        }
    }

    fn row_is_zero(&self, r: usize) -> bool {
        self.row_words(r).iter().all(|&w| w == 0)
    }

    /// Forward elimination in place. Returns the rank; the first `rank` rows
    /// are the echelon rows, the remainder are zero.
    fn eliminate(&mut self) -> usize {
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let w = col / WORD;
            let bit = 1u64 << (col % WORD);
            let Some(pivot) = (rank..self.rows).find(|&r| self.data[r * self.stride + w] & bit != 0)
            else {
                continue;
            };
            self.swap_rows(pivot, rank);
            for r in rank + 1..self.rows {
                if self.data[r * self.stride + w] & bit != 0 {
                    self.xor_row_into(rank, r);
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn rank(&self) -> usize {
        self.clone().eliminate()
    }

    /// Consumes the matrix and returns its row-echelon form together with the
    /// rank. The echelon matrix has the same row space as the input.
    pub fn row_reduce(mut self) -> (BitMatrix, usize) {
        let rank = self.eliminate();
        debug_assert!((rank..self.rows).all(|r| self.row_is_zero(r)));
        (self, rank)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: String = (0..self.cols).map(|c| if self.get(r, c) { '1' } else { '0' }).collect();
            writeln!(f, "  {line}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Unpacked elimination on `Vec<Vec<bool>>`, independent of the packed path.
    fn naive_rank(mut m: Vec<Vec<bool>>) -> usize {
        let rows = m.len();
        let cols = m.first().map_or(0, Vec::len);
        let mut rank = 0;
        for c in 0..cols {
            let Some(p) = (rank..rows).find(|&r| m[r][c]) else { continue };
            m.swap(p, rank);
            for r in 0..rows {
                if r != rank && m[r][c] {
                    for k in 0..cols {
                        let v = m[rank][k];
                        m[r][k] ^= v;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn random_pair(rng: &mut impl Rng, rows: usize, cols: usize, density: f64) -> (BitMatrix, Vec<Vec<bool>>) {
        let mut m = BitMatrix::zeros(rows, cols);
        let mut v = vec![vec![false; cols]; rows];
        for r in 0..rows {
            for c in 0..cols {
                if rng.gen_bool(density) {
                    m.set(r, c, true);
                    v[r][c] = true;
                }
            }
        }
        (m, v)
    }

    #[test]
    fn identity_has_full_rank() {
        assert_eq!(BitMatrix::identity(4).rank(), 4);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        assert_eq!(BitMatrix::zeros(3, 5).rank(), 0);
    }

    #[test]
    fn dependent_rows() {
        assert_eq!(BitMatrix::from_rows(&["110", "011", "101"]).rank(), 2);
    }

    #[test]
    fn row_reduce_small_cases() {
        let (e, r) = BitMatrix::from_rows(&["11", "01"]).row_reduce();
        assert_eq!(r, 2);
        assert!(e == BitMatrix::from_rows(&["11", "01"]) || e == BitMatrix::from_rows(&["10", "01"]));
        let (_, r) = BitMatrix::from_rows(&["11", "11"]).row_reduce();
        assert_eq!(r, 1);
    }

    #[test]
    fn row_reduce_64_square_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        for _ in 0..20 {
            let (m, v) = random_pair(&mut rng, 64, 64, 0.5);
            let (e, r) = m.clone().row_reduce();
            assert_eq!(r, naive_rank(v));
            assert_eq!(r, m.rank());
            // row space preserved: stacking echelon rows onto the input adds no rank
            let mut stacked = BitMatrix::zeros(128, 64);
            for i in 0..64 {
                for c in 0..64 {
                    stacked.set(i, c, m.get(i, c));
                    stacked.set(64 + i, c, e.get(i, c));
                }
            }
            assert_eq!(stacked.rank(), r);
        }
    }

    #[test]
    fn packed_agrees_with_naive_on_1000_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let rows = rng.gen_range(1..=128);
            let cols = rng.gen_range(1..=128);
            let density = rng.gen_range(0.02..0.6);
            let (m, v) = random_pair(&mut rng, rows, cols, density);
            assert_eq!(m.rank(), naive_rank(v), "{rows}x{cols}");
        }
    }

    #[test]
    fn padding_bits_are_cleared() {
        let m = BitMatrix::from_row_words(1, 3, vec![u64::MAX]);
        assert_eq!(m.rank(), 1);
        assert_eq!(m.row_words(0), &[0b111]);
    }

    #[test]
    #[should_panic]
    fn out_of_bounds_access_panics() {
        BitMatrix::zeros(2, 2).get(2, 0);
    }

    proptest! {
        #[test]
        fn rank_bounded_and_invariant_under_row_ops(
            rows in 1usize..40,
            cols in 1usize..90,
            seed in any::<u64>(),
            ops in proptest::collection::vec((any::<bool>(), 0usize..40, 0usize..40), 0..30),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut m, _) = random_pair(&mut rng, rows, cols, 0.3);
            let r0 = m.rank();
            prop_assert!(r0 <= rows.min(cols));
            for (swap, a, b) in ops {
                let (a, b) = (a % rows, b % rows);
                if swap {
                    m.swap_rows(a, b);
                } else if a != b {
                    m.xor_row_into(a, b);
                }
            }
            prop_assert_eq!(m.rank(), r0);
        }
    }
}
