//! Chain topology, the timed command schedule, Pauli noise injection, and
//! execution of the blind (or interleaved baseline) protocol.
//!
//! A chain of `N = 2^gamma` segments runs `gamma` rounds of swapping and
//! purification on a uniform time grid: generation at time 0, transmission
//! at time 1, then for each level `x` a Bell-measurement step at `2x` and a
//! syndrome-measurement step at `2x + 1`. Blocks are tracked as Pauli
//! frames on the receiver-side halves; swaps merge adjacent blocks by XOR
//! (qubit index i connects to qubit index i), and purification records the
//! relative syndromes `H1 * a` and `H2 * b` of each live block.
//!
//! Blind mode applies no corrections. Interleaved mode reproduces the
//! non-blind baseline: swap outcomes are corrected as soon as they are
//! measured and each round's syndromes are corrected by bounded-distance
//! decoding before the next round.
//!
//! Noise model: every transmitted qubit takes independent X/Z channel
//! flips once, and every qubit sitting in a memory takes independent X/Z
//! flips each time step it is stored (both halves of a live pair count;
//! the transmitted half is in the channel during step 1 and takes channel
//! noise instead). Noise stops at the final syndrome measurement.

use std::fmt;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bell::{EsOutcome, PauliFrame};
use crate::css::{CheckType, CodeError, CssCode};
use crate::gf2::BitVec;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("gamma must be in 1..=24, got {0}")]
    InvalidGamma(u32),
    #[error("code length must be at least 1")]
    EmptyCode,
    #[error("probability {name} must lie in [0, 1], got {value}")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("bad injection: {0}")]
    Injection(String),
    #[error("bad fixed outcomes: {0}")]
    Outcomes(String),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("config file {path}: {message}")]
    Config { path: String, message: String },
    #[error("reading config file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Execution mode: blind defers all corrections, interleaved applies them
/// round by round (the non-blind baseline).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Blind,
    Interleaved,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Blind => "blind",
            Mode::Interleaved => "interleaved",
        })
    }
}

/// Per-qubit Pauli error rates: channel flips per transmission, memory
/// flips per stored time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p_ch_x: f64,
    pub p_ch_z: f64,
    pub p_mem_x: f64,
    pub p_mem_z: f64,
}

impl NoiseModel {
    pub fn zero() -> Self {
        Self {
            p_ch_x: 0.0,
            p_ch_z: 0.0,
            p_mem_x: 0.0,
            p_mem_z: 0.0,
        }
    }

    /// Same rate for every knob.
    pub fn uniform(p: f64) -> Self {
        Self {
            p_ch_x: p,
            p_ch_z: p,
            p_mem_x: p,
            p_mem_z: p,
        }
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        for (name, value) in [
            ("p_ch_x", self.p_ch_x),
            ("p_ch_z", self.p_ch_z),
            ("p_mem_x", self.p_mem_x),
            ("p_mem_z", self.p_mem_z),
        ] {
            if !(0.0..=1.0).contains(&value) || value.is_nan() {
                return Err(ChainError::InvalidProbability { name, value });
            }
        }
        Ok(())
    }
}

/// Chain topology: `N = 2^gamma` segments purified with the given code.
#[derive(Debug, Clone)]
pub struct ChainConfig {
    gamma: u32,
    code: CssCode,
}

impl ChainConfig {
    pub fn new(gamma: u32, code: CssCode) -> Result<Self, ChainError> {
        if gamma == 0 || gamma > 24 {
            return Err(ChainError::InvalidGamma(gamma));
        }
        if code.is_empty() {
            return Err(ChainError::EmptyCode);
        }
        Ok(Self { gamma, code })
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    /// Number of segments, `N = 2^gamma`. Relay points run 0..=N.
    pub fn segments(&self) -> usize {
        1usize << self.gamma
    }

    pub fn code(&self) -> &CssCode {
        &self.code
    }

    pub fn duration_steps(&self) -> usize {
        2 * self.gamma as usize + 1
    }
}

/// One timed instruction for one relay point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Generate,
    TransmitRight,
    BellMeasure { level: u32 },
    SyndromeMeasure { level: u32 },
    Idle,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Generate => f.write_str("generate"),
            Op::TransmitRight => f.write_str("transmit_right"),
            Op::BellMeasure { level } => write!(f, "bell_measure({level})"),
            Op::SyndromeMeasure { level } => write!(f, "syndrome_measure({level})"),
            Op::Idle => f.write_str("idle"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Command {
    pub relay: usize,
    pub time: usize,
    pub op: Op,
}

/// The full command grid: one command per relay per time step.
#[derive(Debug, Clone)]
pub struct Schedule {
    gamma: u32,
    commands: Vec<Command>,
}

impl Schedule {
    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn commands(&self) -> &[Command] {
        &self.commands
    }

    pub fn duration_steps(&self) -> usize {
        2 * self.gamma as usize + 1
    }

    /// Audit form: one `relay,time,op` line per command.
    pub fn to_table(&self) -> String {
        let mut out = String::from("relay,time,op\n");
        for c in &self.commands {
            out.push_str(&format!("{},{},{}\n", c.relay, c.time, c.op));
        }
        out
    }
}

/// Operation scheduled for a relay at one time step, or `Idle`.
fn op_at(gamma: u32, n_segments: usize, relay: usize, time: usize) -> Op {
    match time {
        0 if relay < n_segments => Op::Generate,
        1 if relay < n_segments => Op::TransmitRight,
        t if t >= 2 && t % 2 == 0 => {
            let level = (t / 2) as u32;
            if level > gamma {
                return Op::Idle;
            }
            let stride = 1usize << (level - 1);
            if relay.is_multiple_of(stride) && (relay / stride) % 2 == 1 {
                Op::BellMeasure { level }
            } else {
                Op::Idle
            }
        }
        t if t >= 3 => {
            let level = ((t - 1) / 2) as u32;
            if level > gamma {
                return Op::Idle;
            }
            let stride = 1usize << level;
            if relay.is_multiple_of(stride) {
                Op::SyndromeMeasure { level }
            } else {
                Op::Idle
            }
        }
        _ => Op::Idle,
    }
}

/// Builds the command grid for a chain of `2^gamma` segments: generation,
/// transmission, then alternating swap and purification steps per level.
pub fn build_schedule(gamma: u32) -> Result<Schedule, ChainError> {
    if gamma == 0 || gamma > 24 {
        return Err(ChainError::InvalidGamma(gamma));
    }
    let n_segments = 1usize << gamma;
    let duration = 2 * gamma as usize + 1;
    let mut commands = Vec::with_capacity((n_segments + 1) * (duration + 1));
    for time in 0..=duration {
        for relay in 0..=n_segments {
            commands.push(Command {
                relay,
                time,
                op: op_at(gamma, n_segments, relay, time),
            });
        }
    }
    Ok(Schedule { gamma, commands })
}

/// Relative syndromes recorded for one block at one purification round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelSyndrome {
    pub bit: BitVec,
    pub phase: BitVec,
}

/// Everything measured at one level: swap outcomes per midpoint and
/// relative syndromes per block, both in left-to-right order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub es_outcomes: Vec<EsOutcome>,
    pub epp_rel_syndromes: Vec<RelSyndrome>,
}

/// The decoder's only input: per-level swap outcomes and relative
/// syndromes for the whole run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    n: usize,
    levels: Vec<LevelRecord>,
}

impl MeasurementRecord {
    fn empty(gamma: u32, n: usize) -> Self {
        Self {
            n,
            levels: (0..gamma)
                .map(|_| LevelRecord {
                    es_outcomes: Vec::new(),
                    epp_rel_syndromes: Vec::new(),
                })
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of levels recorded (gamma).
    pub fn gamma(&self) -> usize {
        self.levels.len()
    }

    /// Level access, 1-based as levels are counted in the protocol.
    pub fn level(&self, j: usize) -> Option<&LevelRecord> {
        if j == 0 {
            return None;
        }
        self.levels.get(j - 1)
    }

    fn level_mut(&mut self, j: usize) -> &mut LevelRecord {
        &mut self.levels[j - 1]
    }
}

/// Ground-truth end-to-end frame at the end of a run (receiver-side
/// convention). In blind mode this is the full accumulated error; in
/// interleaved mode it is the residual after in-protocol corrections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthFrame {
    pub frame: PauliFrame,
}

/// Run metadata: completion time, storage exposure, and how many
/// in-protocol bounded-distance decodes failed (interleaved mode only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialMeta {
    pub duration_steps: usize,
    pub storage_qubit_steps: u64,
    pub bdd_failures: usize,
}

/// Total memory exposure of a run in qubit-steps: the kept halves during
/// the transmission step, then both halves of every live pair per step.
/// Equals `TrialMeta::storage_qubit_steps` for any trial on this chain.
pub fn storage_exposure(cfg: &ChainConfig) -> u64 {
    let n = cfg.code().len() as u64;
    let mut blocks = cfg.segments() as u64;
    let mut total = blocks * n;
    for t in 2..=cfg.duration_steps() {
        total += blocks * n * 2;
        if t % 2 == 0 {
            blocks /= 2;
        }
    }
    total
}

/// A deterministic error planted into one purification interval.
#[derive(Debug, Clone)]
pub struct Injection {
    pub interval: usize,
    pub which: CheckType,
    pub error: BitVec,
}

/// Fixed swap outcomes, indexed `[level - 1][midpoint]` left to right.
pub type FixedOutcomes = Vec<Vec<EsOutcome>>;

/// All-zero swap outcomes for a chain.
pub fn zero_outcomes(gamma: u32, n: usize) -> FixedOutcomes {
    (1..=gamma)
        .map(|level| {
            let midpoints = (1usize << gamma) >> level;
            (0..midpoints).map(|_| EsOutcome::zero(n)).collect()
        })
        .collect()
}

/// Uniformly random swap outcomes drawn from a seeded stream.
pub fn random_outcomes(gamma: u32, n: usize, seed: u64) -> FixedOutcomes {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=gamma)
        .map(|level| {
            let midpoints = (1usize << gamma) >> level;
            (0..midpoints)
                .map(|_| {
                    EsOutcome::new(BitVec::random(n, &mut rng), BitVec::random(n, &mut rng))
                        .expect("equal lengths")
                })
                .collect()
        })
        .collect()
}

/// Runs one noisy trial. The seed fixes every random draw, so identical
/// inputs give bit-identical outputs.
pub fn run_trial(
    cfg: &ChainConfig,
    noise: &NoiseModel,
    seed: u64,
    mode: Mode,
) -> (MeasurementRecord, TruthFrame, TrialMeta) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    walk(cfg, Some((noise, &mut rng)), None, &[], mode)
}

/// Runs a noise-free trial with deterministic planted errors and fixed
/// (default all-zero) swap outcomes. Interval `j` errors are applied just
/// before the level-`j` syndrome measurement.
pub fn run_with_injections(
    cfg: &ChainConfig,
    injections: &[Injection],
    outcomes: Option<&FixedOutcomes>,
) -> Result<(MeasurementRecord, TruthFrame), ChainError> {
    let gamma = cfg.gamma() as usize;
    let n = cfg.code().len();
    for inj in injections {
        if inj.interval == 0 || inj.interval > gamma {
            return Err(ChainError::Injection(format!(
                "interval {} out of range 1..={gamma}",
                inj.interval
            )));
        }
        if inj.error.len() != n {
            return Err(ChainError::Injection(format!(
                "error vector has length {}, code length is {n}",
                inj.error.len()
            )));
        }
    }
    let zeros;
    let fixed = match outcomes {
        Some(o) => {
            validate_outcomes(cfg, o)?;
            o
        }
        None => {
            zeros = zero_outcomes(cfg.gamma(), n);
            &zeros
        }
    };
    let (record, truth, _) = walk(cfg, None, Some(fixed), injections, Mode::Blind);
    Ok((record, truth))
}

fn validate_outcomes(cfg: &ChainConfig, outcomes: &FixedOutcomes) -> Result<(), ChainError> {
    let gamma = cfg.gamma() as usize;
    let n = cfg.code().len();
    if outcomes.len() != gamma {
        return Err(ChainError::Outcomes(format!(
            "expected {gamma} levels of outcomes, got {}",
            outcomes.len()
        )));
    }
    for (idx, level) in outcomes.iter().enumerate() {
        let expected = cfg.segments() >> (idx + 1);
        if level.len() != expected {
            return Err(ChainError::Outcomes(format!(
                "level {} expects {expected} midpoint outcomes, got {}",
                idx + 1,
                level.len()
            )));
        }
        for m in level {
            if m.len() != n {
                return Err(ChainError::Outcomes(format!(
                    "level {} outcome has length {}, code length is {n}",
                    idx + 1,
                    m.len()
                )));
            }
        }
    }
    Ok(())
}

/// Shared schedule walker. `noise` supplies the model and the random
/// stream for both noise draws and (when `fixed` is `None`) swap
/// outcomes. Draw order is fixed: blocks left to right, qubit index
/// ascending, X before Z, left half before right half.
fn walk(
    cfg: &ChainConfig,
    mut noise: Option<(&NoiseModel, &mut ChaCha8Rng)>,
    fixed: Option<&FixedOutcomes>,
    injections: &[Injection],
    mode: Mode,
) -> (MeasurementRecord, TruthFrame, TrialMeta) {
    let n = cfg.code().len();
    let gamma = cfg.gamma();
    let code = cfg.code();
    let mut frames: Vec<PauliFrame> = (0..cfg.segments()).map(|_| PauliFrame::zero(n)).collect();
    let mut record = MeasurementRecord::empty(gamma, n);
    let mut storage: u64 = 0;
    let mut bdd_failures = 0usize;
    let duration = cfg.duration_steps();

    for t in 1..=duration {
        // Memory exposure during this step; the transmitted halves spend
        // step 1 in the channel rather than in a memory.
        let stored_qubits = if t == 1 {
            frames.len() * n
        } else {
            frames.len() * n * 2
        };
        storage += stored_qubits as u64;

        if let Some((model, rng)) = noise.as_mut() {
            for frame in &mut frames {
                for i in 0..n {
                    if t == 1 {
                        apply_flip(frame, i, model.p_mem_x, model.p_mem_z, rng);
                        apply_flip(frame, i, model.p_ch_x, model.p_ch_z, rng);
                    } else {
                        apply_flip(frame, i, model.p_mem_x, model.p_mem_z, rng);
                        apply_flip(frame, i, model.p_mem_x, model.p_mem_z, rng);
                    }
                }
            }
        }

        if t >= 2 && t % 2 == 0 {
            // Swap step: merge adjacent blocks at every level midpoint.
            let level = (t / 2) as u32;
            let mut merged = Vec::with_capacity(frames.len() / 2);
            for (k, pair) in frames.chunks_exact(2).enumerate() {
                let outcome = match fixed {
                    Some(levels) => levels[level as usize - 1][k].clone(),
                    None => {
                        let (_, rng) = noise.as_mut().expect("random outcomes need a stream");
                        EsOutcome::new(BitVec::random(n, rng), BitVec::random(n, rng))
                            .expect("equal lengths")
                    }
                };
                let mut f = pair[0].xor(&pair[1]);
                if mode == Mode::Blind {
                    // Blind mode keeps the base shift pending in the frame.
                    f.xor_a(&outcome.mx);
                    f.xor_b(&outcome.mz);
                }
                record.level_mut(level as usize).es_outcomes.push(outcome);
                merged.push(f);
            }
            frames = merged;
        } else if t >= 3 {
            // Purification step: record relative syndromes per block.
            let level = (t - 1) / 2;
            for inj in injections.iter().filter(|i| i.interval == level) {
                match inj.which {
                    CheckType::Bit => frames[0].xor_a(&inj.error),
                    CheckType::Phase => frames[0].xor_b(&inj.error),
                }
            }
            for frame in &mut frames {
                let bit = code.syndrome(CheckType::Bit, frame.a()).expect("length");
                let phase = code.syndrome(CheckType::Phase, frame.b()).expect("length");
                if mode == Mode::Interleaved {
                    match code.decode_bdd(CheckType::Bit, &bit).expect("length") {
                        Some(e) => frame.xor_a(&e),
                        None => bdd_failures += 1,
                    }
                    match code.decode_bdd(CheckType::Phase, &phase).expect("length") {
                        Some(e) => frame.xor_b(&e),
                        None => bdd_failures += 1,
                    }
                }
                record
                    .level_mut(level)
                    .epp_rel_syndromes
                    .push(RelSyndrome { bit, phase });
            }
        }
    }

    debug_assert_eq!(frames.len(), 1);
    let truth = TruthFrame {
        frame: frames.pop().expect("single end-to-end block"),
    };
    let meta = TrialMeta {
        duration_steps: duration,
        storage_qubit_steps: storage,
        bdd_failures,
    };
    (record, truth, meta)
}

fn apply_flip(frame: &mut PauliFrame, i: usize, p_x: f64, p_z: f64, rng: &mut ChaCha8Rng) {
    if rng.gen_bool(p_x) {
        frame.flip_x(i);
    }
    if rng.gen_bool(p_z) {
        frame.flip_z(i);
    }
}

/// One simulation request as stored in a JSON config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub gamma: u32,
    pub code_file: String,
    pub p_ch_x: f64,
    pub p_ch_z: f64,
    pub p_mem_x: f64,
    pub p_mem_z: f64,
    pub mode: Mode,
    pub seed: u64,
    pub trials: usize,
}

/// A parsed and validated run: topology, noise point, mode, seeding.
#[derive(Debug, Clone)]
pub struct LoadedRun {
    pub config: ChainConfig,
    pub noise: NoiseModel,
    pub mode: Mode,
    pub seed: u64,
    pub trials: usize,
}

/// Loads a JSON run config. `code_file` is resolved relative to the
/// config file's directory unless absolute.
pub fn load_run_config(path: impl AsRef<Path>) -> Result<LoadedRun, ChainError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ChainError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let raw: RunConfig = serde_json::from_str(&text).map_err(|e| ChainError::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let code_path = {
        let candidate = Path::new(&raw.code_file);
        if candidate.is_absolute() {
            candidate.to_path_buf()
        } else {
            path.parent()
                .unwrap_or_else(|| Path::new("."))
                .join(candidate)
        }
    };
    let code = crate::css::load_code(code_path)?;
    let config = ChainConfig::new(raw.gamma, code)?;
    let noise = NoiseModel {
        p_ch_x: raw.p_ch_x,
        p_ch_z: raw.p_ch_z,
        p_mem_x: raw.p_mem_x,
        p_mem_z: raw.p_mem_z,
    };
    noise.validate()?;
    if raw.trials == 0 {
        return Err(ChainError::Config {
            path: path.display().to_string(),
            message: "trials must be at least 1".into(),
        });
    }
    Ok(LoadedRun {
        config,
        noise,
        mode: raw.mode,
        seed: raw.seed,
        trials: raw.trials,
    })
}
