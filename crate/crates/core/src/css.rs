//! CSS code construction, validation, syndrome extraction, and
//! bounded-distance decoding.
//!
//! A code is described by two parity-check matrices: `H1` detects bit
//! errors and `H2` detects phase errors. Construction verifies the
//! classical containment (every generator row of C2 is a codeword of C1)
//! and that syndromes of all error vectors of weight at most `t` are
//! pairwise distinct, which is exactly the one-to-one mapping bounded
//! decoding relies on.
//!
//! Decoding is realized as a precomputed syndrome-to-coset-leader table
//! built by enumerating every vector of weight at most `t`. That keeps the
//! decoder auditable and makes the capability assumption executable.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BitMatrix, BitVec, Gf2Error};

/// Which error species a parity check targets: `Bit` selects H1,
/// `Phase` selects H2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckType {
    Bit,
    Phase,
}

impl fmt::Display for CheckType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckType::Bit => "bit",
            CheckType::Phase => "phase",
        })
    }
}

#[derive(Debug, Error)]
pub enum CodeError {
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error("H1 has {h1} columns but H2 has {h2}")]
    CheckColumnMismatch { h1: usize, h2: usize },
    #[error("G2 has {g2} columns but the checks have {n}")]
    GeneratorColumnMismatch { g2: usize, n: usize },
    #[error("capability t must be at least 1")]
    ZeroCapability,
    #[error("G2 row {row} ({word}) is not a codeword of C1")]
    DualContainment { row: usize, word: String },
    #[error("{which} syndrome collision within weight {t}: {a} and {b} share syndrome {syndrome}")]
    SyndromeCollision {
        which: CheckType,
        t: usize,
        a: String,
        b: String,
        syndrome: String,
    },
    #[error("decode table would need {entries} entries (limit {limit}); n or t too large")]
    TableTooLarge { entries: u128, limit: u128 },
    #[error("syndrome length {got} does not match the {which} check row count {expected}")]
    SyndromeLength {
        which: CheckType,
        expected: usize,
        got: usize,
    },
    #[error("error vector length {got} does not match code length {expected}")]
    VectorLength { expected: usize, got: usize },
    #[error("code file: {0}")]
    Fixture(String),
    #[error("reading code file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

const TABLE_LIMIT: u128 = 1 << 22;

/// A validated CSS code: length, both check matrices, generator rows of
/// the inner code, capability `t`, and the two coset-leader tables.
#[derive(Debug, Clone)]
pub struct CssCode {
    n: usize,
    t: usize,
    h1: BitMatrix,
    h2: BitMatrix,
    g2: BitMatrix,
    bit_table: HashMap<BitVec, BitVec>,
    phase_table: HashMap<BitVec, BitVec>,
}

impl CssCode {
    /// Builds and fully validates a code from its parity checks, the C2
    /// generators, and the claimed capability `t`.
    pub fn build(h1: BitMatrix, h2: BitMatrix, g2: BitMatrix, t: usize) -> Result<Self, CodeError> {
        if h1.col_count() != h2.col_count() {
            return Err(CodeError::CheckColumnMismatch {
                h1: h1.col_count(),
                h2: h2.col_count(),
            });
        }
        let n = h1.col_count();
        if g2.col_count() != n {
            return Err(CodeError::GeneratorColumnMismatch {
                g2: g2.col_count(),
                n,
            });
        }
        if t == 0 {
            return Err(CodeError::ZeroCapability);
        }
        for (i, g) in g2.rows().iter().enumerate() {
            if !h1.mul_vec(g)?.is_zero() {
                return Err(CodeError::DualContainment {
                    row: i,
                    word: g.to_string(),
                });
            }
        }
        let bit_table = build_table(&h1, n, t, CheckType::Bit)?;
        let phase_table = build_table(&h2, n, t, CheckType::Phase)?;
        Ok(Self {
            n,
            t,
            h1,
            h2,
            g2,
            bit_table,
            phase_table,
        })
    }

    /// The Steane seven-qubit code: both checks are the Hamming(7,4)
    /// parity-check matrix and the same rows generate C2.
    pub fn steane() -> Self {
        let h = BitMatrix::parse_rows("1010101\n0110011\n0001111").expect("static rows");
        Self::build(h.clone(), h.clone(), h, 1).expect("Steane fixture is valid")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn capability(&self) -> usize {
        self.t
    }

    pub fn check_matrix(&self, which: CheckType) -> &BitMatrix {
        match which {
            CheckType::Bit => &self.h1,
            CheckType::Phase => &self.h2,
        }
    }

    pub fn generators(&self) -> &BitMatrix {
        &self.g2
    }

    /// Syndrome of an error vector under the selected check matrix.
    pub fn syndrome(&self, which: CheckType, e: &BitVec) -> Result<BitVec, CodeError> {
        if e.len() != self.n {
            return Err(CodeError::VectorLength {
                expected: self.n,
                got: e.len(),
            });
        }
        Ok(self.check_matrix(which).mul_vec(e)?)
    }

    /// Bounded-distance decode: the unique error of weight at most `t`
    /// with the given syndrome, or `None` when no such error exists.
    pub fn decode_bdd(&self, which: CheckType, s: &BitVec) -> Result<Option<BitVec>, CodeError> {
        let expected = self.check_matrix(which).row_count();
        if s.len() != expected {
            return Err(CodeError::SyndromeLength {
                which,
                expected,
                got: s.len(),
            });
        }
        let table = match which {
            CheckType::Bit => &self.bit_table,
            CheckType::Phase => &self.phase_table,
        };
        Ok(table.get(s).cloned())
    }
}

/// Enumerates every vector of weight <= t, mapping syndromes to coset
/// leaders and rejecting the construction on any collision.
fn build_table(
    h: &BitMatrix,
    n: usize,
    t: usize,
    which: CheckType,
) -> Result<HashMap<BitVec, BitVec>, CodeError> {
    let entries = count_low_weight(n, t);
    if entries > TABLE_LIMIT {
        return Err(CodeError::TableTooLarge {
            entries,
            limit: TABLE_LIMIT,
        });
    }
    let mut table = HashMap::with_capacity(entries as usize);
    let mut insert = |e: BitVec| -> Result<(), CodeError> {
        let s = h.mul_vec(&e)?;
        if let Some(prev) = table.insert(s.clone(), e.clone()) {
            return Err(CodeError::SyndromeCollision {
                which,
                t,
                a: prev.to_string(),
                b: e.to_string(),
                syndrome: s.to_string(),
            });
        }
        Ok(())
    };
    insert(BitVec::zeros(n))?;
    for w in 1..=t.min(n) {
        let mut positions: Vec<usize> = (0..w).collect();
        loop {
            let mut e = BitVec::zeros(n);
            for &p in &positions {
                e.set(p, true);
            }
            insert(e)?;
            if !next_combination(&mut positions, n) {
                break;
            }
        }
    }
    Ok(table)
}

/// Advances a sorted combination of positions in lexicographic order.
fn next_combination(positions: &mut [usize], n: usize) -> bool {
    let w = positions.len();
    let mut i = w;
    while i > 0 {
        i -= 1;
        if positions[i] < n - (w - i) {
            positions[i] += 1;
            for j in i + 1..w {
                positions[j] = positions[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn count_low_weight(n: usize, t: usize) -> u128 {
    let mut total: u128 = 1;
    let mut binom: u128 = 1;
    for w in 1..=t.min(n) {
        binom = binom * (n - w + 1) as u128 / w as u128;
        total += binom;
    }
    total
}

/// Loads a plain-text code fixture: a line `n t`, then H1, H2, and G2 as
/// 0/1 row blocks separated by blank lines.
pub fn load_code(path: impl AsRef<Path>) -> Result<CssCode, CodeError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CodeError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_code(&text)
}

/// Parses the fixture format accepted by [`load_code`].
pub fn parse_code(text: &str) -> Result<CssCode, CodeError> {
    let mut blocks: Vec<Vec<&str>> = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    if blocks.len() != 4 {
        return Err(CodeError::Fixture(format!(
            "expected 4 blocks (header, H1, H2, G2) separated by blank lines, found {}",
            blocks.len()
        )));
    }
    let header = &blocks[0];
    if header.len() != 1 {
        return Err(CodeError::Fixture(
            "header block must be a single line `n t`".into(),
        ));
    }
    let mut fields = header[0].split_whitespace();
    let n: usize = fields
        .next()
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| CodeError::Fixture("header must start with integer n".into()))?;
    let t: usize = fields
        .next()
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| CodeError::Fixture("header must contain integer t after n".into()))?;
    if fields.next().is_some() {
        return Err(CodeError::Fixture("header has trailing fields".into()));
    }
    let parse_block = |lines: &[&str], name: &str| -> Result<BitMatrix, CodeError> {
        let m = BitMatrix::parse_rows(&lines.join("\n"))?;
        if m.col_count() != n {
            return Err(CodeError::Fixture(format!(
                "{name} rows have {} columns, header says n={n}",
                m.col_count()
            )));
        }
        Ok(m)
    };
    let h1 = parse_block(&blocks[1], "H1")?;
    let h2 = parse_block(&blocks[2], "H2")?;
    let g2 = parse_block(&blocks[3], "G2")?;
    CssCode::build(h1, h2, g2, t)
}
