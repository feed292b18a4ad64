//! Stabilizer-level simulator and decoder suite for blind-mode quantum
//! repeater chains purified with a single-encoded CSS code.
//!
//! A chain of `N = 2^gamma` segments shares `n` Bell pairs per segment,
//! swaps them level by level at the midpoints, and measures CSS syndromes
//! after every level. In blind mode nothing is corrected in-flight; the
//! decoders reconstruct the accumulated end-to-end error afterwards from
//! the measurement record alone:
//!
//! * [`decoders::decode_posterior`] isolates the error of each
//!   purification interval from adjacent syndrome differences and decodes
//!   the intervals independently, so errors far beyond the code capability
//!   are corrected as long as each interval stays within it.
//! * [`decoders::decode_conventional`] decodes only the final syndrome and
//!   works only while the total accumulated error is small.
//!
//! [`harness`] drives Monte Carlo sweeps and exhaustive bounded-weight
//! enumerations over both decoders and writes CSV/JSON reports.

pub mod bell;
pub mod chain;
pub mod css;
pub mod decoders;
pub mod gf2;
pub mod harness;

pub use bell::{compose_es, dense_oracle_es, BellLabel, EsOutcome, PauliFrame};
pub use chain::{
    build_schedule, load_run_config, run_trial, run_with_injections, ChainConfig, Injection,
    MeasurementRecord, Mode, NoiseModel, Schedule, TrialMeta, TruthFrame,
};
pub use css::{load_code, parse_code, CheckType, CssCode};
pub use decoders::{
    decode_conventional, decode_posterior, integrate_epp, integrate_es, interval_syndrome, judge,
    DecodeResult, Judgment,
};
pub use gf2::{BitMatrix, BitVec};
pub use harness::{
    emit_report, enumerate_bounded, monte_carlo, resource_count, wilson_halfwidth, DecoderKind,
    EnumRow, Report, ReportFormat, ResourceReport, SweepRow, SweepStats,
};
