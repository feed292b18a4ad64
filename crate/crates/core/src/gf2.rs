//! Dense bit-vector and bit-matrix arithmetic over GF(2).
//!
//! Everything downstream (syndromes, Pauli frames, parity checks) is built
//! on these two types. Addition and subtraction over GF(2) are both XOR, so
//! all "−" arithmetic in syndrome bookkeeping is implemented as `xor`.
//!
//! Textual convention: bit index 0 is the leftmost printed character, so
//! `"1010101"` has bit 0 set, bit 1 clear, and so on. All fixtures and
//! reports use this order.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Errors from dimension-checked GF(2) operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix rows must all have {expected} columns, row {row} has {got}")]
    RaggedRows {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("matrix must have at least one row")]
    EmptyMatrix,
    #[error("invalid bit string: {0}")]
    ParseBits(String),
}

/// A fixed-length vector over GF(2), packed into 64-bit words.
///
/// The length is set at construction and never changes; all indexed access
/// is bounds-checked.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    /// The zero vector of the given length.
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    /// A vector with exactly one bit set (0-indexed position).
    pub fn unit(len: usize, bit: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(bit, true);
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range (len {})",
            self.len
        );
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range (len {})",
            self.len
        );
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range (len {})",
            self.len
        );
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    /// Number of set bits (the Hamming weight).
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// XOR-assign, i.e. addition (and subtraction) in GF(2).
    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(
            self.len, other.len,
            "xor length mismatch: {} vs {}",
            self.len, other.len
        );
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// GF(2) inner product: parity of the AND of the two vectors.
    pub fn dot(&self, other: &Self) -> bool {
        assert_eq!(
            self.len, other.len,
            "dot length mismatch: {} vs {}",
            self.len, other.len
        );
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() % 2 == 1
    }

    /// Index of the first set bit, if any.
    pub fn first_set(&self) -> Option<usize> {
        for (w, &word) in self.words.iter().enumerate() {
            if word != 0 {
                return Some(w * 64 + word.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Iterator over all bits, leftmost (index 0) first.
    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Uniformly random vector, one fair coin per bit.
    pub fn random<R: rand::Rng>(len: usize, rng: &mut R) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.set(i, rng.gen::<bool>());
        }
        v
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitVec {
    type Err = Gf2Error;

    fn from_str(s: &str) -> Result<Self, Gf2Error> {
        if s.is_empty() {
            return Err(Gf2Error::ParseBits("empty bit string".into()));
        }
        let mut v = BitVec::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                other => {
                    return Err(Gf2Error::ParseBits(format!(
                        "unexpected character {other:?} at position {i}"
                    )))
                }
            }
        }
        Ok(v)
    }
}

impl Serialize for BitVec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitVec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// A dense matrix over GF(2), stored as a list of row vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: Vec<BitVec>,
    cols: usize,
}

impl BitMatrix {
    /// Builds a matrix from row vectors, which must all share one length.
    pub fn from_rows(rows: Vec<BitVec>) -> Result<Self, Gf2Error> {
        let cols = rows.first().ok_or(Gf2Error::EmptyMatrix)?.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Gf2Error::RaggedRows {
                    row: i,
                    expected: cols,
                    got: r.len(),
                });
            }
        }
        Ok(Self { rows, cols })
    }

    /// Parses newline-separated 0/1 rows.
    pub fn parse_rows(text: &str) -> Result<Self, Gf2Error> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(BitVec::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(rows)
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    /// Matrix-vector product over GF(2). The result has one bit per row.
    pub fn mul_vec(&self, v: &BitVec) -> Result<BitVec, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        let mut out = BitVec::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            out.set(i, row.dot(v));
        }
        Ok(out)
    }

    /// True iff `v` is a GF(2) linear combination of the rows, decided by
    /// Gaussian elimination.
    pub fn row_space_contains(&self, v: &BitVec) -> Result<bool, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        // Reduce the rows to an independent pivot basis, then reduce v by it.
        let mut basis: Vec<(usize, BitVec)> = Vec::new();
        for row in &self.rows {
            let mut r = row.clone();
            for (pivot, b) in &basis {
                if r.get(*pivot) {
                    r.xor_assign(b);
                }
            }
            if let Some(pivot) = r.first_set() {
                basis.push((pivot, r));
            }
        }
        let mut r = v.clone();
        for (pivot, b) in &basis {
            if r.get(*pivot) {
                r.xor_assign(b);
            }
        }
        Ok(r.is_zero())
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{row}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn bv(s: &str) -> BitVec {
        s.parse().unwrap()
    }

    fn hamming_h() -> BitMatrix {
        BitMatrix::parse_rows("1010101\n0110011\n0001111").unwrap()
    }

    #[test]
    fn mul_vec_zero_vector() {
        let h = hamming_h();
        assert_eq!(h.mul_vec(&bv("0000000")).unwrap(), bv("000"));
    }

    #[test]
    fn mul_vec_unit_selects_column() {
        let h = hamming_h();
        // Unit vector at (1-indexed) position 3 picks column 3 of H.
        assert_eq!(h.mul_vec(&BitVec::unit(7, 2)).unwrap(), bv("110"));
    }

    #[test]
    fn mul_vec_column_xor() {
        let h = hamming_h();
        let v = BitVec::unit(7, 0).xor(&BitVec::unit(7, 1));
        assert_eq!(h.mul_vec(&v).unwrap(), bv("110"));
    }

    #[test]
    fn mul_vec_rejects_wrong_length() {
        let h = hamming_h();
        assert_eq!(
            h.mul_vec(&bv("101")),
            Err(Gf2Error::DimensionMismatch {
                expected: 7,
                got: 3
            })
        );
    }

    #[test]
    fn weight_counts_ones() {
        assert_eq!(bv("0000000").weight(), 0);
        assert_eq!(BitVec::unit(7, 2).weight(), 1);
        assert_eq!(bv("1010101").weight(), 4);
    }

    #[test]
    fn row_space_membership() {
        let single = BitMatrix::parse_rows("1010101").unwrap();
        assert!(single.row_space_contains(&bv("0000000")).unwrap());
        assert!(single.row_space_contains(&bv("1010101")).unwrap());
        assert!(!single.row_space_contains(&bv("1010100")).unwrap());

        let two = BitMatrix::parse_rows("1010101\n0110011").unwrap();
        assert!(two.row_space_contains(&bv("1100110")).unwrap());
    }

    #[test]
    fn row_space_contains_every_row() {
        let h = hamming_h();
        for row in h.rows() {
            assert!(h.row_space_contains(row).unwrap());
        }
    }

    #[test]
    fn mul_vec_is_linear() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..1000 {
            let rows = rng.gen_range(1..=8);
            let cols = rng.gen_range(1..=80);
            let m =
                BitMatrix::from_rows((0..rows).map(|_| BitVec::random(cols, &mut rng)).collect())
                    .unwrap();
            let u = BitVec::random(cols, &mut rng);
            let v = BitVec::random(cols, &mut rng);
            let lhs = m.mul_vec(&u.xor(&v)).unwrap();
            let rhs = m.mul_vec(&u).unwrap().xor(&m.mul_vec(&v).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn weight_subadditive_under_xor() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..1000 {
            let len = rng.gen_range(1..=100);
            let u = BitVec::random(len, &mut rng);
            let v = BitVec::random(len, &mut rng);
            assert!(u.xor(&v).weight() <= u.weight() + v.weight());
        }
    }

    #[test]
    fn xor_self_is_zero() {
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..100 {
            let v = BitVec::random(rng.gen_range(1..=100), &mut rng);
            assert!(v.xor(&v).is_zero());
        }
    }

    #[test]
    fn display_roundtrip_leftmost_is_bit_zero() {
        let v = bv("1000010");
        assert!(v.get(0));
        assert!(v.get(5));
        assert!(!v.get(1));
        assert_eq!(v.to_string(), "1000010");
        assert_eq!(v.to_string().parse::<BitVec>().unwrap(), v);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("10a1".parse::<BitVec>().is_err());
        assert!("".parse::<BitVec>().is_err());
    }

    #[test]
    fn matrix_display_is_newline_separated() {
        let h = hamming_h();
        assert_eq!(h.to_string(), "1010101\n0110011\n0001111");
        assert_eq!(BitMatrix::parse_rows(&h.to_string()).unwrap(), h);
    }
}
