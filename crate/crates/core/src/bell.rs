//! Bell-state labels and the Pauli-frame algebra for entanglement
//! swapping, plus a small dense-state oracle for checking the swap rule
//! at amplitude level.
//!
//! A [`PauliFrame`] records which sigma-x / sigma-z operators are pending
//! on the receiver-side halves of a block of shared pairs; all frame
//! updates are XOR, with global phases discarded. Swapping two blocks at
//! a midpoint composes frames as `f1 XOR f2 XOR outcome`, which the
//! oracle verifies exhaustively for single pairs.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::BitVec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("frame/outcome length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// The four Bell states, in bijection with flag pairs (x, z):
/// PhiPlus is (0,0), PsiPlus (1,0), PhiMinus (0,1), PsiMinus (1,1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PsiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiMinus,
    ];

    /// Label for a flag pair: x flips the parity, z flips the sign.
    pub fn from_flags(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => BellLabel::PhiPlus,
            (true, false) => BellLabel::PsiPlus,
            (false, true) => BellLabel::PhiMinus,
            (true, true) => BellLabel::PsiMinus,
        }
    }

    pub fn flags(self) -> (bool, bool) {
        match self {
            BellLabel::PhiPlus => (false, false),
            BellLabel::PsiPlus => (true, false),
            BellLabel::PhiMinus => (false, true),
            BellLabel::PsiMinus => (true, true),
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
        })
    }
}

/// Pending Pauli record on a block of `n` shared pairs: `a` holds the
/// sigma-x exponents (bit flips), `b` the sigma-z exponents (phase flips).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliFrame {
    a: BitVec,
    b: BitVec,
}

impl PauliFrame {
    pub fn new(a: BitVec, b: BitVec) -> Result<Self, FrameError> {
        if a.len() != b.len() {
            return Err(FrameError::LengthMismatch(a.len(), b.len()));
        }
        Ok(Self { a, b })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            a: BitVec::zeros(n),
            b: BitVec::zeros(n),
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn a(&self) -> &BitVec {
        &self.a
    }

    pub fn b(&self) -> &BitVec {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn flip_x(&mut self, i: usize) {
        self.a.flip(i);
    }

    pub fn flip_z(&mut self, i: usize) {
        self.b.flip(i);
    }

    pub fn xor_a(&mut self, e: &BitVec) {
        self.a.xor_assign(e);
    }

    pub fn xor_b(&mut self, e: &BitVec) {
        self.b.xor_assign(e);
    }

    pub fn xor_assign(&mut self, other: &Self) {
        self.a.xor_assign(&other.a);
        self.b.xor_assign(&other.b);
    }

    pub fn xor(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }
}

/// Per-qubit Bell-measurement flags recorded at one swap midpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EsOutcome {
    pub mx: BitVec,
    pub mz: BitVec,
}

impl EsOutcome {
    pub fn new(mx: BitVec, mz: BitVec) -> Result<Self, FrameError> {
        if mx.len() != mz.len() {
            return Err(FrameError::LengthMismatch(mx.len(), mz.len()));
        }
        Ok(Self { mx, mz })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            mx: BitVec::zeros(n),
            mz: BitVec::zeros(n),
        }
    }

    pub fn len(&self) -> usize {
        self.mx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mx.is_empty()
    }

    /// Label of the outcome on a single-pair outcome (n = 1).
    pub fn label(&self) -> BellLabel {
        assert_eq!(self.len(), 1, "label is defined for single-pair outcomes");
        BellLabel::from_flags(self.mx.get(0), self.mz.get(0))
    }
}

/// Frame of the joined block after a midpoint Bell measurement: qubit i
/// of the left block connects to qubit i of the right block, and the
/// result is plain XOR of both frames with the outcome flags.
pub fn compose_es(
    f1: &PauliFrame,
    f2: &PauliFrame,
    m: &EsOutcome,
) -> Result<PauliFrame, FrameError> {
    if f1.len() != f2.len() {
        return Err(FrameError::LengthMismatch(f1.len(), f2.len()));
    }
    if f1.len() != m.len() {
        return Err(FrameError::LengthMismatch(f1.len(), m.len()));
    }
    let mut out = f1.xor(f2);
    out.a.xor_assign(&m.mx);
    out.b.xor_assign(&m.mz);
    Ok(out)
}

/// One projected branch of the dense swap oracle.
#[derive(Debug, Clone)]
pub struct EsProjection {
    pub outcome: EsOutcome,
    pub result: BellLabel,
    pub probability: f64,
}

/// Amplitude-level oracle for a single swap. Builds the four-qubit state
/// with frame `f1` on the receiver half of pair (1,2) and `f2` on the
/// receiver half of pair (3,4), projects qubits 2 and 3 onto each Bell
/// basis element, and reports the probability and the resulting Bell
/// label of qubits 1 and 4 (up to global phase).
///
/// Panics unless both frames have length 1. All Pauli operators used here
/// are real matrices, so the state is tracked with real amplitudes.
pub fn dense_oracle_es(f1: &PauliFrame, f2: &PauliFrame) -> Vec<EsProjection> {
    assert_eq!(f1.len(), 1, "dense oracle is defined for single pairs");
    assert_eq!(f2.len(), 1, "dense oracle is defined for single pairs");

    // Basis index is q1*8 + q2*4 + q3*2 + q4.
    let mut state = [0.0f64; 16];
    let half = 0.5;
    for q1 in 0..2usize {
        for q3 in 0..2usize {
            state[q1 * 8 + q1 * 4 + q3 * 2 + q3] = half;
        }
    }
    // Frames sit on the transmitted halves: qubit 2 for the left pair,
    // qubit 4 for the right pair.
    apply_pauli(&mut state, 2, f1.a().get(0), f1.b().get(0));
    apply_pauli(&mut state, 4, f2.a().get(0), f2.b().get(0));

    let mut projections = Vec::with_capacity(4);
    for label in BellLabel::ALL {
        let (x, z) = label.flags();
        // Contract qubits 2 and 3 against the Bell bra, leaving a
        // two-qubit vector over (q1, q4).
        let mut reduced = [0.0f64; 4];
        for q1 in 0..2usize {
            for q4 in 0..2usize {
                let mut amp = 0.0;
                for c in 0..2usize {
                    let coeff = bell_coeff(z, c);
                    let idx = q1 * 8 + c * 4 + (c ^ usize::from(x)) * 2 + q4;
                    amp += coeff * state[idx];
                }
                reduced[q1 * 2 + q4] = amp;
            }
        }
        let probability: f64 = reduced.iter().map(|a| a * a).sum();
        let result = identify_bell(&reduced, probability);
        projections.push(EsProjection {
            outcome: EsOutcome {
                mx: flag_vec(x),
                mz: flag_vec(z),
            },
            result,
            probability,
        });
    }
    projections
}

fn flag_vec(flag: bool) -> BitVec {
    let mut v = BitVec::zeros(1);
    v.set(0, flag);
    v
}

/// Amplitude of |B_(x,z)> at its support state (c, c^x): the coefficient
/// is (-1)^(z*c) / sqrt(2).
fn bell_coeff(z: bool, c: usize) -> f64 {
    let sign = if z && c == 1 { -1.0 } else { 1.0 };
    sign * std::f64::consts::FRAC_1_SQRT_2
}

/// Applies sigma_x^a sigma_z^b to one qubit (1-indexed from the left) of
/// the four-qubit state: sigma_x^a sigma_z^b |c> = (-1)^(b*c) |c^a>.
fn apply_pauli(state: &mut [f64; 16], qubit: usize, a: bool, b: bool) {
    if !a && !b {
        return;
    }
    let shift = 4 - qubit;
    let mask = 1usize << shift;
    let mut next = [0.0f64; 16];
    for (idx, &amp) in state.iter().enumerate() {
        if amp == 0.0 {
            continue;
        }
        let c = (idx & mask) != 0;
        let sign = if b && c { -1.0 } else { 1.0 };
        let target = if a { idx ^ mask } else { idx };
        next[target] += sign * amp;
    }
    *state = next;
}

/// Matches a two-qubit vector against the four Bell states up to a global
/// sign, panicking if it is none of them (the oracle only ever produces
/// Bell states).
fn identify_bell(reduced: &[f64; 4], probability: f64) -> BellLabel {
    let norm = probability.sqrt();
    assert!(norm > 1e-9, "projection produced a null branch");
    for label in BellLabel::ALL {
        let (x, z) = label.flags();
        for sign in [1.0, -1.0] {
            let mut matches = true;
            for q1 in 0..2usize {
                for q4 in 0..2usize {
                    let expected = if q4 == (q1 ^ usize::from(x)) {
                        sign * bell_coeff(z, q1) * norm
                    } else {
                        0.0
                    };
                    if (reduced[q1 * 2 + q4] - expected).abs() > 1e-9 {
                        matches = false;
                    }
                }
            }
            if matches {
                return label;
            }
        }
    }
    panic!("post-measurement state is not a Bell state: {reduced:?}");
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn frame1(a: bool, b: bool) -> PauliFrame {
        PauliFrame::new(flag_vec(a), flag_vec(b)).unwrap()
    }

    fn outcome1(x: bool, z: bool) -> EsOutcome {
        EsOutcome::new(flag_vec(x), flag_vec(z)).unwrap()
    }

    /// Two-qubit check that the flag convention matches the usual Bell
    /// state definitions: apply sigma_x^x sigma_z^z to the second half of
    /// phi+ and compare amplitudes directly.
    #[test]
    fn flag_convention_matches_two_qubit_amplitudes() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // Amplitudes over |q1 q2> in order 00, 01, 10, 11.
        let expected = [
            (BellLabel::PhiPlus, [s, 0.0, 0.0, s]),
            (BellLabel::PhiMinus, [s, 0.0, 0.0, -s]),
            (BellLabel::PsiPlus, [0.0, s, s, 0.0]),
            (BellLabel::PsiMinus, [0.0, s, -s, 0.0]),
        ];
        for (label, reference) in expected {
            let (x, z) = label.flags();
            let mut state = [s, 0.0, 0.0, s]; // phi+
                                              // sigma_x^x sigma_z^z on qubit 2: |c> -> (-1)^(z c) |c ^ x>.
            let mut next = [0.0f64; 4];
            for (idx, &amp) in state.iter().enumerate() {
                let c = idx & 1;
                let sign = if z && c == 1 { -1.0 } else { 1.0 };
                next[idx ^ usize::from(x)] += sign * amp;
            }
            state = next;
            for i in 0..4 {
                assert!(
                    (state[i] - reference[i]).abs() < 1e-12,
                    "{label}: amplitude {i} is {} expected {}",
                    state[i],
                    reference[i]
                );
            }
        }
    }

    #[test]
    fn from_flags_bijection() {
        assert_eq!(BellLabel::from_flags(false, false), BellLabel::PhiPlus);
        assert_eq!(BellLabel::from_flags(true, false), BellLabel::PsiPlus);
        assert_eq!(BellLabel::from_flags(false, true), BellLabel::PhiMinus);
        assert_eq!(BellLabel::from_flags(true, true), BellLabel::PsiMinus);
        for label in BellLabel::ALL {
            let (x, z) = label.flags();
            assert_eq!(BellLabel::from_flags(x, z), label);
        }
    }

    #[test]
    fn compose_es_zero_case() {
        let z = PauliFrame::zero(3);
        let m = EsOutcome::zero(3);
        assert!(compose_es(&z, &z, &m).unwrap().is_zero());
    }

    #[test]
    fn compose_es_psi_minus_branch() {
        // With zero frames, the (1,1) outcome on a qubit leaves a (1,1)
        // frame on that qubit: the psi- branch yields a psi- pair.
        let z = PauliFrame::zero(2);
        let mut m = EsOutcome::zero(2);
        m.mx.set(1, true);
        m.mz.set(1, true);
        let out = compose_es(&z, &z, &m).unwrap();
        assert!(!out.a().get(0) && !out.b().get(0));
        assert!(out.a().get(1) && out.b().get(1));
    }

    #[test]
    fn compose_es_single_qubit_example() {
        let f1 = frame1(true, false);
        let f2 = frame1(false, true);
        let m = outcome1(true, false);
        let out = compose_es(&f1, &f2, &m).unwrap();
        assert!(!out.a().get(0));
        assert!(out.b().get(0));
    }

    #[test]
    fn compose_es_rejects_length_mismatch() {
        let f1 = PauliFrame::zero(2);
        let f2 = PauliFrame::zero(3);
        assert!(compose_es(&f1, &f2, &EsOutcome::zero(2)).is_err());
        assert!(compose_es(&f1, &f1, &EsOutcome::zero(3)).is_err());
    }

    #[test]
    fn oracle_identity_frames_reproduce_diagonal_branches() {
        let zero = PauliFrame::zero(1);
        for p in dense_oracle_es(&zero, &zero) {
            assert_eq!(p.outcome.label(), p.result);
            assert!((p.probability - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_agrees_with_compose_es_on_all_64_cases() {
        for a1 in 0..4u8 {
            for a2 in 0..4u8 {
                let f1 = frame1(a1 & 1 == 1, a1 & 2 == 2);
                let f2 = frame1(a2 & 1 == 1, a2 & 2 == 2);
                let projections = dense_oracle_es(&f1, &f2);
                assert_eq!(projections.len(), 4);
                for p in &projections {
                    assert!((p.probability - 0.25).abs() < 1e-12);
                    let composed = compose_es(&f1, &f2, &p.outcome).unwrap();
                    let label = BellLabel::from_flags(composed.a().get(0), composed.b().get(0));
                    assert_eq!(label, p.result, "f1={f1:?} f2={f2:?} m={:?}", p.outcome);
                }
            }
        }
    }

    #[test]
    fn folding_outcomes_is_order_independent() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(1..=9);
            let frames: Vec<PauliFrame> = (0..6)
                .map(|_| {
                    PauliFrame::new(BitVec::random(n, &mut rng), BitVec::random(n, &mut rng))
                        .unwrap()
                })
                .collect();
            let outcomes: Vec<EsOutcome> = (0..5)
                .map(|_| {
                    EsOutcome::new(BitVec::random(n, &mut rng), BitVec::random(n, &mut rng))
                        .unwrap()
                })
                .collect();
            let mut left = frames[0].clone();
            for (f, m) in frames[1..].iter().zip(&outcomes) {
                left = compose_es(&left, f, m).unwrap();
            }
            let mut right = frames[5].clone();
            for (f, m) in frames[..5].iter().zip(&outcomes).rev() {
                right = compose_es(f, &right, m).unwrap();
            }
            assert_eq!(left, right);
        }
    }
}
