//! Experiment driver: Monte Carlo sweeps over noise grids, exhaustive
//! bounded-weight enumeration, resource accounting, and CSV/JSON report
//! emission.
//!
//! Sweeps are reproducible bit-exact: trial `i` at grid point `g` uses
//! seed `master + g * trials + i`, trials fan out to a rayon worker pool
//! (`RAYON_NUM_THREADS` controls the width), and aggregation is a plain
//! count reduction, so thread scheduling never changes the result.

use std::io::{self, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{
    run_trial, run_with_injections, storage_exposure, ChainConfig, ChainError, Injection, Mode,
    NoiseModel,
};
use crate::css::CheckType;
use crate::decoders::{decode_conventional, decode_posterior, judge, DecodeResult, Judgment};
use crate::gf2::BitVec;

/// Guard on exhaustive enumeration size.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// 95% normal quantile used for Wilson interval halfwidths.
const Z95: f64 = 1.959963984540054;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("enumeration would cover {patterns} patterns (limit {limit})")]
    EnumerationTooLarge { patterns: u128, limit: u128 },
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("{n_segments} segments is not 2^{gamma}")]
    ResourceMismatch { n_segments: u64, gamma: u32 },
    #[error("resource count overflows for n={code_length}, gamma={gamma}")]
    ResourceOverflow { code_length: u64, gamma: u32 },
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("writing report to {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("serializing report: {0}")]
    Json(#[from] serde_json::Error),
}

/// Which blind-record decoder a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    Posterior,
    Conventional,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 2] = [DecoderKind::Posterior, DecoderKind::Conventional];

    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Posterior => "posterior",
            DecoderKind::Conventional => "conventional",
        }
    }

    fn run(
        self,
        record: &crate::chain::MeasurementRecord,
        code: &crate::css::CssCode,
    ) -> DecodeResult {
        match self {
            DecoderKind::Posterior => decode_posterior(record, code),
            DecoderKind::Conventional => decode_conventional(record, code),
        }
    }
}

/// One aggregated sweep row: a (noise point, decoder) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub decoder: String,
    pub gamma: u32,
    pub n: usize,
    pub p_ch_x: f64,
    pub p_ch_z: f64,
    pub p_mem_x: f64,
    pub p_mem_z: f64,
    pub trials: u64,
    pub exact_success: f64,
    pub logical_success: f64,
    pub bdd_failures: f64,
    pub wilson_halfwidth: f64,
    pub duration_steps: u64,
    pub storage_qubit_steps: u64,
}

/// Full sweep result, one row per (noise point, decoder).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepStats {
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    exact: u64,
    logical: u64,
    bdd: u64,
}

impl Tally {
    fn add(self, other: Tally) -> Tally {
        Tally {
            exact: self.exact + other.exact,
            logical: self.logical + other.logical,
            bdd: self.bdd + other.bdd,
        }
    }

    fn of(judgment: Judgment, bdd_failed: bool) -> Tally {
        Tally {
            exact: u64::from(judgment == Judgment::ExactSuccess),
            logical: u64::from(judgment != Judgment::Failure),
            bdd: u64::from(bdd_failed),
        }
    }
}

/// Wilson 95% interval halfwidth for a binomial rate estimate. Preferred
/// over the normal approximation because the rates of interest sit near
/// 0 and 1.
pub fn wilson_halfwidth(successes: u64, trials: u64) -> f64 {
    assert!(trials > 0, "wilson interval needs at least one trial");
    assert!(successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    (Z95 / (1.0 + z2 / n)) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

/// Runs `trials` seeded trials per grid point and aggregates judgments
/// per decoder. In blind mode every decoder sees the same trials; in
/// interleaved mode the in-protocol corrections themselves are evaluated
/// and the row is labeled `interleaved`.
pub fn monte_carlo(
    cfg: &ChainConfig,
    noise_grid: &[NoiseModel],
    trials: usize,
    decoders: &[DecoderKind],
    seed: u64,
    mode: Mode,
) -> Result<SweepStats, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::InvalidSweep(
            "trials must be at least 1".into(),
        ));
    }
    if noise_grid.is_empty() {
        return Err(HarnessError::InvalidSweep("noise grid is empty".into()));
    }
    for noise in noise_grid {
        noise.validate()?;
    }
    if mode == Mode::Blind && decoders.is_empty() {
        return Err(HarnessError::InvalidSweep(
            "blind sweeps need at least one decoder".into(),
        ));
    }
    let code = cfg.code();
    let duration = cfg.duration_steps() as u64;
    let storage = storage_exposure(cfg);
    let mut rows = Vec::new();
    for (point, noise) in noise_grid.iter().enumerate() {
        let base = (point * trials) as u64;
        let make_row = |decoder: &str, tally: Tally| SweepRow {
            decoder: decoder.to_string(),
            gamma: cfg.gamma(),
            n: code.len(),
            p_ch_x: noise.p_ch_x,
            p_ch_z: noise.p_ch_z,
            p_mem_x: noise.p_mem_x,
            p_mem_z: noise.p_mem_z,
            trials: trials as u64,
            exact_success: tally.exact as f64 / trials as f64,
            logical_success: tally.logical as f64 / trials as f64,
            bdd_failures: tally.bdd as f64 / trials as f64,
            wilson_halfwidth: wilson_halfwidth(tally.exact, trials as u64),
            duration_steps: duration,
            storage_qubit_steps: storage,
        };
        match mode {
            Mode::Blind => {
                let zero = || vec![Tally::default(); decoders.len()];
                let tallies = (0..trials)
                    .into_par_iter()
                    .map(|i| {
                        let trial_seed = seed.wrapping_add(base + i as u64);
                        let (record, truth, _) = run_trial(cfg, noise, trial_seed, Mode::Blind);
                        decoders
                            .iter()
                            .map(|d| {
                                let result = d.run(&record, code);
                                let verdict = judge(&result, &truth, code, true);
                                Tally::of(verdict, result.has_failures())
                            })
                            .collect::<Vec<_>>()
                    })
                    .reduce(zero, |a, b| {
                        a.into_iter().zip(b).map(|(x, y)| x.add(y)).collect()
                    });
                for (decoder, tally) in decoders.iter().zip(tallies) {
                    rows.push(make_row(decoder.name(), tally));
                }
            }
            Mode::Interleaved => {
                let tally = (0..trials)
                    .into_par_iter()
                    .map(|i| {
                        let trial_seed = seed.wrapping_add(base + i as u64);
                        let (_, truth, meta) = run_trial(cfg, noise, trial_seed, Mode::Interleaved);
                        // The protocol already applied its corrections, so
                        // the estimate is trivial and the residual is the
                        // truth frame itself.
                        let zero_estimate = DecodeResult {
                            estimate: crate::bell::PauliFrame::zero(code.len()),
                            per_interval: Vec::new(),
                            failed_intervals: Vec::new(),
                        };
                        let verdict = judge(&zero_estimate, &truth, code, true);
                        Tally::of(verdict, meta.bdd_failures > 0)
                    })
                    .reduce(Tally::default, Tally::add);
                rows.push(make_row("interleaved", tally));
            }
        }
    }
    Ok(SweepStats { rows })
}

/// One exhaustively enumerated injection pattern and both verdicts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumRow {
    pub pattern: String,
    pub posterior: Judgment,
    pub conventional: Judgment,
}

/// Exhaustively enumerates all per-interval, per-check-type error vectors
/// of weight at most `max_weight`, runs each pattern through a noise-free
/// trial, and judges both decoders. With an `outcome_seed`, every pattern
/// additionally gets its own fixed random swap outcomes; otherwise
/// outcomes are zero.
///
/// Refuses grids larger than [`ENUMERATION_LIMIT`] patterns.
pub fn enumerate_bounded(
    cfg: &ChainConfig,
    max_weight: usize,
    outcome_seed: Option<u64>,
) -> Result<Vec<EnumRow>, HarnessError> {
    let n = cfg.code().len();
    let gamma = cfg.gamma() as usize;
    let choices = low_weight_vectors(n, max_weight);
    let digits = 2 * gamma;
    let patterns = (choices.len() as u128)
        .checked_pow(digits as u32)
        .unwrap_or(u128::MAX);
    if patterns > ENUMERATION_LIMIT {
        return Err(HarnessError::EnumerationTooLarge {
            patterns,
            limit: ENUMERATION_LIMIT,
        });
    }
    let code = cfg.code();
    let total = patterns as u64;
    let rows = (0..total)
        .into_par_iter()
        .map(|index| {
            // Digit order: bit intervals 1..gamma, then phase intervals,
            // with the last digit varying fastest.
            let mut rem = index as usize;
            let mut sel = vec![0usize; digits];
            for d in (0..digits).rev() {
                sel[d] = rem % choices.len();
                rem /= choices.len();
            }
            let mut injections = Vec::new();
            let mut pattern_parts = Vec::new();
            for (d, &choice) in sel.iter().enumerate() {
                let e = &choices[choice];
                if e.is_zero() {
                    continue;
                }
                let (which, interval) = if d < gamma {
                    (CheckType::Bit, d + 1)
                } else {
                    (CheckType::Phase, d - gamma + 1)
                };
                pattern_parts.push(format!("{interval}:{which}:{e}"));
                injections.push(Injection {
                    interval,
                    which,
                    error: e.clone(),
                });
            }
            let outcomes = outcome_seed
                .map(|s| crate::chain::random_outcomes(cfg.gamma(), n, s.wrapping_add(index)));
            let (record, truth) = run_with_injections(cfg, &injections, outcomes.as_ref())
                .expect("enumerated injections are well formed");
            let posterior = judge(&decode_posterior(&record, code), &truth, code, true);
            let conventional = judge(&decode_conventional(&record, code), &truth, code, true);
            EnumRow {
                pattern: if pattern_parts.is_empty() {
                    "-".to_string()
                } else {
                    pattern_parts.join("+")
                },
                posterior,
                conventional,
            }
        })
        .collect();
    Ok(rows)
}

/// All vectors of weight <= max_weight, zero first, then ascending weight
/// in lexicographic position order.
fn low_weight_vectors(n: usize, max_weight: usize) -> Vec<BitVec> {
    let mut out = vec![BitVec::zeros(n)];
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for _ in 1..=max_weight.min(n) {
        let mut next = Vec::new();
        for positions in &frontier {
            let start = positions.last().map_or(0, |p| p + 1);
            for extra in start..n {
                let mut with = positions.clone();
                with.push(extra);
                let mut v = BitVec::zeros(n);
                for &p in &with {
                    v.set(p, true);
                }
                out.push(v);
                next.push(with);
            }
        }
        frontier = next;
    }
    out
}

/// Pair counts for a chain: `N * n` for single encoding versus `N * n^gamma`
/// for the concatenated-code baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub n_segments: u64,
    pub code_length: u64,
    pub gamma: u32,
    pub pairs_single: u64,
    pub pairs_concatenated: u64,
}

pub fn resource_count(
    n_segments: u64,
    code_length: u64,
    gamma: u32,
) -> Result<ResourceReport, HarnessError> {
    if gamma >= 64 || n_segments != 1u64 << gamma {
        return Err(HarnessError::ResourceMismatch { n_segments, gamma });
    }
    let overflow = || HarnessError::ResourceOverflow { code_length, gamma };
    let pairs_single = n_segments.checked_mul(code_length).ok_or_else(overflow)?;
    let pairs_concatenated = code_length
        .checked_pow(gamma)
        .and_then(|p| n_segments.checked_mul(p))
        .ok_or_else(overflow)?;
    Ok(ResourceReport {
        n_segments,
        code_length,
        gamma,
        pairs_single,
        pairs_concatenated,
    })
}

/// Output format for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown format {other:?}, expected csv or json")),
        }
    }
}

/// Anything the harness can write out.
#[derive(Debug, Clone, Copy)]
pub enum Report<'a> {
    Sweep(&'a SweepStats),
    Enumeration(&'a [EnumRow]),
}

/// Fixed CSV column order for sweep reports.
const SWEEP_COLUMNS: [&str; 13] = [
    "decoder",
    "gamma",
    "n",
    "p_ch_x",
    "p_ch_z",
    "p_mem_x",
    "p_mem_z",
    "trials",
    "exact_success",
    "logical_success",
    "bdd_failures",
    "wilson_halfwidth",
    "duration_steps",
];

/// Writes a report to any sink. CSV sweep output uses the fixed column
/// order above; JSON carries every row field.
pub fn write_report<W: Write>(
    report: Report<'_>,
    format: ReportFormat,
    mut sink: W,
) -> Result<(), HarnessError> {
    match (report, format) {
        (Report::Sweep(stats), ReportFormat::Csv) => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(SWEEP_COLUMNS)?;
            for r in &stats.rows {
                w.write_record([
                    r.decoder.clone(),
                    r.gamma.to_string(),
                    r.n.to_string(),
                    r.p_ch_x.to_string(),
                    r.p_ch_z.to_string(),
                    r.p_mem_x.to_string(),
                    r.p_mem_z.to_string(),
                    r.trials.to_string(),
                    r.exact_success.to_string(),
                    r.logical_success.to_string(),
                    r.bdd_failures.to_string(),
                    r.wilson_halfwidth.to_string(),
                    r.duration_steps.to_string(),
                ])?;
            }
            w.flush().map_err(|e| HarnessError::Io {
                path: "<writer>".into(),
                source: e,
            })?;
        }
        (Report::Sweep(stats), ReportFormat::Json) => {
            serde_json::to_writer_pretty(&mut sink, &stats.rows)?;
            sink.write_all(b"\n").map_err(|e| HarnessError::Io {
                path: "<writer>".into(),
                source: e,
            })?;
        }
        (Report::Enumeration(rows), ReportFormat::Csv) => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(["pattern", "posterior", "conventional"])?;
            for r in rows {
                w.write_record([
                    r.pattern.clone(),
                    r.posterior.to_string(),
                    r.conventional.to_string(),
                ])?;
            }
            w.flush().map_err(|e| HarnessError::Io {
                path: "<writer>".into(),
                source: e,
            })?;
        }
        (Report::Enumeration(rows), ReportFormat::Json) => {
            serde_json::to_writer_pretty(&mut sink, rows)?;
            sink.write_all(b"\n").map_err(|e| HarnessError::Io {
                path: "<writer>".into(),
                source: e,
            })?;
        }
    }
    Ok(())
}

/// Writes a report to a file, surfacing the path on I/O failure.
pub fn emit_report(
    report: Report<'_>,
    format: ReportFormat,
    path: impl AsRef<Path>,
) -> Result<(), HarnessError> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_report(report, format, io::BufWriter::new(file)).map_err(|e| match e {
        HarnessError::Io { source, .. } => HarnessError::Io {
            path: path.display().to_string(),
            source,
        },
        other => other,
    })
}
