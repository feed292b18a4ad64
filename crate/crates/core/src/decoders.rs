//! Posterior-decomposition decoding, the conventional single-syndrome
//! baseline, per-level integration of section results, and success
//! judgment.
//!
//! Because swaps connect qubit index i to qubit index i, integrating the
//! per-section measurements of one level onto end-to-end coordinates is a
//! plain XOR. The posterior decoder then isolates the noise of each
//! purification interval as
//!
//! ```text
//! d_j = s_epp(j) XOR H * es_shift(j) XOR s_epp(j-1)
//! ```
//!
//! with `s_epp(0)` the zero vector, decodes every `d_j` independently,
//! and accumulates the decoded interval errors together with the swap
//! base shifts. The conventional baseline decodes only the final
//! integrated syndrome, so it fails as soon as the accumulated error
//! exceeds the code capability even though each interval stayed below it.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bell::{EsOutcome, PauliFrame};
use crate::chain::{MeasurementRecord, TruthFrame};
use crate::css::{CheckType, CssCode};
use crate::gf2::BitVec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("level {level} out of range 1..={gamma}")]
    LevelOutOfRange { level: usize, gamma: usize },
}

/// Per-interval decode parts; `None` marks a bounded-distance failure for
/// that interval and check type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalDecode {
    pub bit_part: Option<BitVec>,
    pub phase_part: Option<BitVec>,
}

/// Decoder output: the estimated end-to-end frame, the decoded interval
/// errors it was assembled from, and any intervals whose syndrome had no
/// error within the code capability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub estimate: PauliFrame,
    pub per_interval: Vec<IntervalDecode>,
    pub failed_intervals: Vec<(usize, CheckType)>,
}

impl DecodeResult {
    pub fn has_failures(&self) -> bool {
        !self.failed_intervals.is_empty()
    }
}

/// Outcome of comparing an estimate against the ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Judgment {
    ExactSuccess,
    LogicalSuccess,
    Failure,
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Judgment::ExactSuccess => "exact_success",
            Judgment::LogicalSuccess => "logical_success",
            Judgment::Failure => "failure",
        })
    }
}

/// XOR of all level-`j` swap outcomes: the level's total base shift on
/// end-to-end coordinates.
pub fn integrate_es(record: &MeasurementRecord, j: usize) -> Result<EsOutcome, DecodeError> {
    let level = record.level(j).ok_or(DecodeError::LevelOutOfRange {
        level: j,
        gamma: record.gamma(),
    })?;
    let mut folded = EsOutcome::zero(record.n());
    for m in &level.es_outcomes {
        folded.mx.xor_assign(&m.mx);
        folded.mz.xor_assign(&m.mz);
    }
    Ok(folded)
}

/// XOR of the level-`j` per-pair relative syndromes: the level's
/// integrated syndrome pair (bit, phase) on end-to-end coordinates.
pub fn integrate_epp(
    record: &MeasurementRecord,
    j: usize,
) -> Result<(BitVec, BitVec), DecodeError> {
    let level = record.level(j).ok_or(DecodeError::LevelOutOfRange {
        level: j,
        gamma: record.gamma(),
    })?;
    let mut bit: Option<BitVec> = None;
    let mut phase: Option<BitVec> = None;
    for s in &level.epp_rel_syndromes {
        match &mut bit {
            Some(acc) => acc.xor_assign(&s.bit),
            None => bit = Some(s.bit.clone()),
        }
        match &mut phase {
            Some(acc) => acc.xor_assign(&s.phase),
            None => phase = Some(s.phase.clone()),
        }
    }
    Ok((
        bit.expect("level holds at least one pair"),
        phase.expect("level holds at least one pair"),
    ))
}

fn integrated_part(record: &MeasurementRecord, j: usize, which: CheckType) -> BitVec {
    let (bit, phase) = integrate_epp(record, j).expect("validated level");
    match which {
        CheckType::Bit => bit,
        CheckType::Phase => phase,
    }
}

/// The isolated interval-`j` syndrome: integrated level syndrome, minus
/// the level's base shift seen through H, minus the previous level's
/// integrated syndrome (zero for j = 1).
pub fn interval_syndrome(
    record: &MeasurementRecord,
    code: &CssCode,
    j: usize,
    which: CheckType,
) -> Result<BitVec, DecodeError> {
    if j == 0 || j > record.gamma() {
        return Err(DecodeError::LevelOutOfRange {
            level: j,
            gamma: record.gamma(),
        });
    }
    let mut d = integrated_part(record, j, which);
    let shift = integrate_es(record, j)?;
    let shift_part = match which {
        CheckType::Bit => &shift.mx,
        CheckType::Phase => &shift.mz,
    };
    let through_h = code
        .check_matrix(which)
        .mul_vec(shift_part)
        .expect("record length matches code length");
    d.xor_assign(&through_h);
    if j > 1 {
        d.xor_assign(&integrated_part(record, j - 1, which));
    }
    Ok(d)
}

/// Posterior-decomposition decoder: bounded-distance decode every
/// interval syndrome independently, then accumulate the decoded interval
/// errors and all base shifts. A failed interval decode contributes zero
/// and is reported in `failed_intervals`.
pub fn decode_posterior(record: &MeasurementRecord, code: &CssCode) -> DecodeResult {
    let gamma = record.gamma();
    let mut estimate = PauliFrame::zero(code.len());
    let mut per_interval = Vec::with_capacity(gamma);
    let mut failed_intervals = Vec::new();
    for j in 1..=gamma {
        let mut parts = IntervalDecode {
            bit_part: None,
            phase_part: None,
        };
        for which in [CheckType::Bit, CheckType::Phase] {
            let d = interval_syndrome(record, code, j, which).expect("level in range");
            match code.decode_bdd(which, &d).expect("syndrome length matches") {
                Some(e) => {
                    match which {
                        CheckType::Bit => {
                            estimate.xor_a(&e);
                            parts.bit_part = Some(e);
                        }
                        CheckType::Phase => {
                            estimate.xor_b(&e);
                            parts.phase_part = Some(e);
                        }
                    };
                }
                None => failed_intervals.push((j, which)),
            }
        }
        per_interval.push(parts);
    }
    for j in 1..=gamma {
        let shift = integrate_es(record, j).expect("level in range");
        estimate.xor_a(&shift.mx);
        estimate.xor_b(&shift.mz);
    }
    DecodeResult {
        estimate,
        per_interval,
        failed_intervals,
    }
}

/// Conventional blind baseline: one bounded-distance decode of the final
/// integrated syndrome (with all base shifts removed through H), plus the
/// total base shift. `per_interval` holds the single lumped decode; a
/// failure is reported against the final level.
pub fn decode_conventional(record: &MeasurementRecord, code: &CssCode) -> DecodeResult {
    let gamma = record.gamma();
    let mut total_shift = EsOutcome::zero(record.n());
    for j in 1..=gamma {
        let shift = integrate_es(record, j).expect("level in range");
        total_shift.mx.xor_assign(&shift.mx);
        total_shift.mz.xor_assign(&shift.mz);
    }
    let mut estimate = PauliFrame::zero(code.len());
    let mut parts = IntervalDecode {
        bit_part: None,
        phase_part: None,
    };
    let mut failed_intervals = Vec::new();
    for which in [CheckType::Bit, CheckType::Phase] {
        let shift_part = match which {
            CheckType::Bit => &total_shift.mx,
            CheckType::Phase => &total_shift.mz,
        };
        let mut d = integrated_part(record, gamma, which);
        d.xor_assign(
            &code
                .check_matrix(which)
                .mul_vec(shift_part)
                .expect("record length matches code length"),
        );
        match code.decode_bdd(which, &d).expect("syndrome length matches") {
            Some(e) => match which {
                CheckType::Bit => {
                    estimate.xor_a(&e);
                    parts.bit_part = Some(e);
                }
                CheckType::Phase => {
                    estimate.xor_b(&e);
                    parts.phase_part = Some(e);
                }
            },
            None => failed_intervals.push((gamma, which)),
        }
    }
    estimate.xor_a(&total_shift.mx);
    estimate.xor_b(&total_shift.mz);
    DecodeResult {
        estimate,
        per_interval: vec![parts],
        failed_intervals,
    }
}

/// Compares an estimate against the ground truth. The residual is their
/// XOR; an all-zero residual is an exact success. With `allow_logical`,
/// a residual whose bit and phase parts both lie in the row space of the
/// C2 generators counts as a harmless degenerate success.
pub fn judge(
    result: &DecodeResult,
    truth: &TruthFrame,
    code: &CssCode,
    allow_logical: bool,
) -> Judgment {
    let residual = result.estimate.xor(&truth.frame);
    if residual.is_zero() {
        return Judgment::ExactSuccess;
    }
    if allow_logical {
        let g2 = code.generators();
        let a_ok = g2
            .row_space_contains(residual.a())
            .expect("residual length matches code length");
        let b_ok = g2
            .row_space_contains(residual.b())
            .expect("residual length matches code length");
        if a_ok && b_ok {
            return Judgment::LogicalSuccess;
        }
    }
    Judgment::Failure
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{run_with_injections, zero_outcomes, ChainConfig, Injection};
    use crate::css::CssCode;

    fn bv(s: &str) -> BitVec {
        s.parse().unwrap()
    }

    fn u(pos1: usize) -> BitVec {
        // 1-indexed unit vector, matching the column numbering of H.
        BitVec::unit(7, pos1 - 1)
    }

    fn steane_chain(gamma: u32) -> ChainConfig {
        ChainConfig::new(gamma, CssCode::steane()).unwrap()
    }

    fn inject(interval: usize, which: CheckType, e: BitVec) -> Injection {
        Injection {
            interval,
            which,
            error: e,
        }
    }

    #[test]
    fn integrate_es_folds_level_outcomes() {
        let cfg = steane_chain(2);
        let mut outcomes = zero_outcomes(2, 7);
        outcomes[0][0].mx = u(1);
        outcomes[0][1].mx = u(2);
        let (record, _) = run_with_injections(&cfg, &[], Some(&outcomes)).unwrap();
        assert_eq!(integrate_es(&record, 1).unwrap().mx, u(1).xor(&u(2)));
        assert!(integrate_es(&record, 1).unwrap().mz.is_zero());
        // Single midpoint at the top level folds to itself.
        assert!(integrate_es(&record, 2).unwrap().mx.is_zero());
        assert!(integrate_es(&record, 3).is_err());
    }

    #[test]
    fn integrate_epp_folds_level_syndromes() {
        let cfg = steane_chain(2);
        let (record, _) = run_with_injections(&cfg, &[], None).unwrap();
        let (bit, phase) = integrate_epp(&record, 1).unwrap();
        assert!(bit.is_zero() && phase.is_zero());

        let injections = vec![
            inject(1, CheckType::Bit, u(1)),
            inject(2, CheckType::Bit, u(2)),
        ];
        let (record, _) = run_with_injections(&cfg, &injections, None).unwrap();
        assert_eq!(integrate_epp(&record, 1).unwrap().0, bv("100"));
        assert_eq!(integrate_epp(&record, 2).unwrap().0, bv("110"));
        assert!(integrate_epp(&record, 0).is_err());
    }

    #[test]
    fn interval_syndrome_isolates_each_interval() {
        let cfg = steane_chain(2);
        let code = cfg.code();
        let injections = vec![
            inject(1, CheckType::Bit, u(1)),
            inject(2, CheckType::Bit, u(2)),
        ];
        let (record, _) = run_with_injections(&cfg, &injections, None).unwrap();
        assert_eq!(
            interval_syndrome(&record, code, 1, CheckType::Bit).unwrap(),
            bv("100")
        );
        assert_eq!(
            interval_syndrome(&record, code, 2, CheckType::Bit).unwrap(),
            bv("010")
        );
        assert!(interval_syndrome(&record, code, 1, CheckType::Phase)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn interval_syndrome_cancels_base_shifts() {
        let cfg = steane_chain(2);
        let code = cfg.code();
        let mut outcomes = zero_outcomes(2, 7);
        outcomes[0][1].mx = u(4);
        outcomes[1][0].mz = u(6);
        let (record, _) = run_with_injections(&cfg, &[], Some(&outcomes)).unwrap();
        for j in 1..=2 {
            for which in [CheckType::Bit, CheckType::Phase] {
                assert!(
                    interval_syndrome(&record, code, j, which)
                        .unwrap()
                        .is_zero(),
                    "level {j} {which}"
                );
            }
        }
    }

    #[test]
    fn posterior_reconstructs_per_interval_errors() {
        let cfg = steane_chain(2);
        let injections = vec![
            inject(1, CheckType::Bit, u(1)),
            inject(2, CheckType::Bit, u(2)),
        ];
        let (record, truth) = run_with_injections(&cfg, &injections, None).unwrap();
        let result = decode_posterior(&record, cfg.code());
        assert!(!result.has_failures());
        assert_eq!(result.estimate.a(), &bv("1100000"));
        assert_eq!(
            judge(&result, &truth, cfg.code(), false),
            Judgment::ExactSuccess
        );
    }

    #[test]
    fn posterior_zero_record_decodes_to_zero() {
        let cfg = steane_chain(3);
        let (record, truth) = run_with_injections(&cfg, &[], None).unwrap();
        let result = decode_posterior(&record, cfg.code());
        assert!(result.estimate.is_zero());
        assert!(!result.has_failures());
        assert_eq!(
            judge(&result, &truth, cfg.code(), false),
            Judgment::ExactSuccess
        );
    }

    #[test]
    fn posterior_weight_two_interval_miscorrects_without_flag() {
        // A weight-2 interval error has the syndrome of some weight-1
        // vector on a perfect code, so the decode reports no failure but
        // the judgment exposes the miscorrection.
        let cfg = steane_chain(2);
        let injections = vec![inject(1, CheckType::Bit, u(1).xor(&u(2)))];
        let (record, truth) = run_with_injections(&cfg, &injections, None).unwrap();
        let result = decode_posterior(&record, cfg.code());
        assert!(!result.has_failures());
        assert_eq!(result.per_interval[0].bit_part, Some(u(3)));
        assert_eq!(judge(&result, &truth, cfg.code(), false), Judgment::Failure);
        assert_eq!(judge(&result, &truth, cfg.code(), true), Judgment::Failure);
    }

    #[test]
    fn conventional_handles_small_errors_only() {
        let cfg = steane_chain(2);
        let (record, truth) =
            run_with_injections(&cfg, &[inject(1, CheckType::Bit, u(3))], None).unwrap();
        let result = decode_conventional(&record, cfg.code());
        assert_eq!(result.estimate.a(), &u(3));
        assert_eq!(
            judge(&result, &truth, cfg.code(), false),
            Judgment::ExactSuccess
        );

        // Accumulated weight two across intervals decodes to the wrong
        // single-qubit error: H(u1 ^ u2) = H(u3).
        let injections = vec![
            inject(1, CheckType::Bit, u(1)),
            inject(2, CheckType::Bit, u(2)),
        ];
        let (record, truth) = run_with_injections(&cfg, &injections, None).unwrap();
        let conventional = decode_conventional(&record, cfg.code());
        assert_eq!(conventional.estimate.a(), &u(3));
        assert_eq!(
            judge(&conventional, &truth, cfg.code(), false),
            Judgment::Failure
        );
        let posterior = decode_posterior(&record, cfg.code());
        assert_eq!(
            judge(&posterior, &truth, cfg.code(), false),
            Judgment::ExactSuccess
        );
    }

    #[test]
    fn judge_examples() {
        let cfg = steane_chain(1);
        let code = cfg.code();
        let (record, truth) = run_with_injections(&cfg, &[], None).unwrap();
        let result = decode_posterior(&record, code);
        assert_eq!(judge(&result, &truth, code, false), Judgment::ExactSuccess);

        // Residual u3: not a C2 generator combination, fails either way.
        let mut shifted = result.clone();
        shifted.estimate.xor_a(&u(3));
        assert_eq!(judge(&shifted, &truth, code, false), Judgment::Failure);
        assert_eq!(judge(&shifted, &truth, code, true), Judgment::Failure);

        // Residual equal to a full generator row is logical-only success.
        let mut degenerate = result.clone();
        degenerate.estimate.xor_a(&bv("1010101"));
        assert_eq!(judge(&degenerate, &truth, code, false), Judgment::Failure);
        assert_eq!(
            judge(&degenerate, &truth, code, true),
            Judgment::LogicalSuccess
        );
    }

    #[test]
    fn es_outcomes_are_transparent_to_decoding() {
        // Arbitrary swap outcomes change neither any interval syndrome nor
        // the judgment: they enter estimate and truth identically.
        let cfg = steane_chain(3);
        let code = cfg.code();
        let injections = vec![
            inject(1, CheckType::Bit, u(5)),
            inject(2, CheckType::Phase, u(2)),
            inject(3, CheckType::Bit, u(1)),
        ];
        let (plain_record, plain_truth) = run_with_injections(&cfg, &injections, None).unwrap();
        let outcomes = crate::chain::random_outcomes(3, 7, 777);
        let (shifted_record, shifted_truth) =
            run_with_injections(&cfg, &injections, Some(&outcomes)).unwrap();
        for j in 1..=3 {
            for which in [CheckType::Bit, CheckType::Phase] {
                assert_eq!(
                    interval_syndrome(&plain_record, code, j, which).unwrap(),
                    interval_syndrome(&shifted_record, code, j, which).unwrap()
                );
            }
        }
        for decode in [decode_posterior, decode_conventional] {
            let plain = decode(&plain_record, code);
            let shifted = decode(&shifted_record, code);
            assert_eq!(
                judge(&plain, &plain_truth, code, false),
                judge(&shifted, &shifted_truth, code, false)
            );
        }
    }

    #[test]
    fn posterior_is_exact_for_every_bounded_interval_pattern_gamma_two() {
        // Exhaustive over gamma=2: zero or one flip per interval per check
        // type; every pattern must reconstruct exactly.
        let cfg = steane_chain(2);
        let code = cfg.code();
        let choices: Vec<Option<BitVec>> = std::iter::once(None)
            .chain((1..=7).map(|i| Some(u(i))))
            .collect();
        let mut checked = 0u32;
        for b1 in &choices {
            for b2 in &choices {
                for p1 in &choices {
                    for p2 in &choices {
                        let mut injections = Vec::new();
                        if let Some(e) = b1 {
                            injections.push(inject(1, CheckType::Bit, e.clone()));
                        }
                        if let Some(e) = b2 {
                            injections.push(inject(2, CheckType::Bit, e.clone()));
                        }
                        if let Some(e) = p1 {
                            injections.push(inject(1, CheckType::Phase, e.clone()));
                        }
                        if let Some(e) = p2 {
                            injections.push(inject(2, CheckType::Phase, e.clone()));
                        }
                        let (record, truth) = run_with_injections(&cfg, &injections, None).unwrap();
                        let result = decode_posterior(&record, code);
                        assert_eq!(judge(&result, &truth, code, false), Judgment::ExactSuccess);
                        checked += 1;
                    }
                }
            }
        }
        assert_eq!(checked, 8u32.pow(4));
    }

    #[test]
    fn decode_is_interval_order_independent() {
        let cfg = steane_chain(3);
        let code = cfg.code();
        let injections = vec![
            inject(1, CheckType::Bit, u(1)),
            inject(2, CheckType::Bit, u(4)),
            inject(3, CheckType::Phase, u(6)),
        ];
        let outcomes = crate::chain::random_outcomes(3, 7, 5);
        let (record, _) = run_with_injections(&cfg, &injections, Some(&outcomes)).unwrap();
        let forward = decode_posterior(&record, code);
        // Reassemble the estimate by folding levels in descending order.
        let mut reversed = PauliFrame::zero(7);
        for j in (1..=3).rev() {
            for which in [CheckType::Bit, CheckType::Phase] {
                let d = interval_syndrome(&record, code, j, which).unwrap();
                if let Some(e) = code.decode_bdd(which, &d).unwrap() {
                    match which {
                        CheckType::Bit => reversed.xor_a(&e),
                        CheckType::Phase => reversed.xor_b(&e),
                    }
                }
            }
            let shift = integrate_es(&record, j).unwrap();
            reversed.xor_a(&shift.mx);
            reversed.xor_b(&shift.mz);
        }
        assert_eq!(forward.estimate, reversed);
    }

    #[test]
    fn both_decoders_agree_below_capability() {
        let cfg = steane_chain(3);
        let code = cfg.code();
        for interval in 1..=3usize {
            for pos in 1..=7usize {
                for which in [CheckType::Bit, CheckType::Phase] {
                    let (record, truth) =
                        run_with_injections(&cfg, &[inject(interval, which, u(pos))], None)
                            .unwrap();
                    for decode in [decode_posterior, decode_conventional] {
                        let result = decode(&record, code);
                        assert_eq!(judge(&result, &truth, code, false), Judgment::ExactSuccess);
                    }
                }
            }
        }
    }

    #[test]
    fn decode_result_serializes_with_bit_strings() {
        let cfg = steane_chain(1);
        let (record, _) =
            run_with_injections(&cfg, &[inject(1, CheckType::Bit, u(2))], None).unwrap();
        let result = decode_posterior(&record, cfg.code());
        let json = serde_json::to_string(&result).unwrap();
        assert!(json.contains("\"0100000\""));
        let back: DecodeResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back, result);
    }
}
