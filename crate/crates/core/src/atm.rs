//! Autonomous Turing machine simulator with an exact energy ledger.
//!
//! Energies inside the machine are integer micro-bits (10⁻⁶ of kT ln 2), so
//! every balance is the exact sum of the recorded deltas.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::f64::consts::LN_2;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::refinery::{RefinerKind, StreamRefiner};
use crate::rng::{replicate_rng, stream, stream_rng, Rng};
use crate::thermo::{outcome_yield, EngineConfig, ThermalContext, ThermoError};

/// Micro-bits per bit.
pub const MICRO_PER_BIT: i64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AtmError {
    #[error("machine is dead (balance {0} micro-bits)")]
    Dead(i64),
    #[error("invalid world: {0}")]
    InvalidWorld(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
}

/// Rounds an energy in bits to micro-bits.
pub fn bits_to_micro(bits: f64) -> i64 {
    (bits * MICRO_PER_BIT as f64).round() as i64
}

pub fn micro_to_bits(micro: i64) -> f64 {
    micro as f64 / MICRO_PER_BIT as f64
}

/// Exact decimal rendering of a micro-bit amount, e.g. `-0.050000`.
pub fn format_micro(micro: i64) -> String {
    let sign = if micro < 0 { "-" } else { "" };
    let abs = micro.unsigned_abs();
    format!("{sign}{}.{:06}", abs / MICRO_PER_BIT as u64, abs % MICRO_PER_BIT as u64)
}

/// How band lengths are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandLengths {
    /// Each cell ends the band with probability `1/N`, so lengths are
    /// geometric with mean `N`.
    Geometric,
    /// Every band has exactly `N` cells.
    Fixed,
}

/// Source of cell contents.
#[derive(Clone, Debug, PartialEq)]
pub enum WorldGenerator {
    Constant(bool),
    /// Each cell is 1 with probability `p`.
    Iid(f64),
    /// Alternating bands, each cell flipped with probability `noise`.
    /// Geometric rows start with a random color, fixed rows with 0.
    Band { mean: f64, lengths: BandLengths, noise: f64 },
    /// Toroidal binary image, row-major; `true` is black / 1.
    Image { rows: usize, cols: usize, cells: Vec<bool> },
}

impl WorldGenerator {
    pub fn band(mean: f64) -> Self {
        WorldGenerator::Band { mean, lengths: BandLengths::Geometric, noise: 0.0 }
    }

    pub fn band_with_noise(mean: f64, noise: f64) -> Self {
        WorldGenerator::Band { mean, lengths: BandLengths::Geometric, noise }
    }

    fn validate(&self) -> Result<(), AtmError> {
        let bad = |m: &str| Err(AtmError::InvalidWorld(m.to_string()));
        match self {
            WorldGenerator::Constant(_) => Ok(()),
            WorldGenerator::Iid(p) if !(0.0..=1.0).contains(p) => bad("iid probability outside [0, 1]"),
            WorldGenerator::Iid(_) => Ok(()),
            WorldGenerator::Band { mean, noise, .. } => {
                if !(*mean >= 1.0 && mean.is_finite()) {
                    bad("band mean must be >= 1")
                } else if !(0.0..1.0).contains(noise) {
                    bad("band noise outside [0, 1)")
                } else {
                    Ok(())
                }
            }
            WorldGenerator::Image { rows, cols, cells } => {
                if *rows == 0 || *cols == 0 || cells.len() != rows * cols {
                    bad("image dimensions do not match its cells")
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Sequential band/iid generator for one half-line of cells.
#[derive(Clone, Debug)]
struct LineGen {
    rng: Rng,
    color: bool,
    left_in_band: u64,
}

impl LineGen {
    fn next(&mut self, gen: &WorldGenerator) -> bool {
        match *gen {
            WorldGenerator::Constant(b) => b,
            WorldGenerator::Iid(p) => self.rng.gen::<f64>() < p,
            WorldGenerator::Band { mean, lengths, noise } => {
                let color = self.color;
                match lengths {
                    BandLengths::Geometric => {
                        if self.rng.gen::<f64>() < 1.0 / mean {
                            self.color = !self.color;
                        }
                    }
                    BandLengths::Fixed => {
                        if self.left_in_band == 0 {
                            self.left_in_band = mean.round() as u64;
                        }
                        self.left_in_band -= 1;
                        if self.left_in_band == 0 {
                            self.color = !self.color;
                        }
                    }
                }
                let flip = noise > 0.0 && self.rng.gen::<f64>() < noise;
                color ^ flip
            }
            WorldGenerator::Image { .. } => unreachable!("images are not generated lazily"),
        }
    }
}

#[derive(Clone, Debug)]
struct Line {
    forward: LineGen,
    backward: LineGen,
    pos: Vec<bool>,
    neg: Vec<bool>,
}

/// Cell coordinate; `y` is 0 in one-dimensional worlds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub x: i64,
    pub y: i64,
}

impl Pos {
    pub fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }
}

/// One-bit-per-cell memory space of dimension 1 or 2, generated lazily.
#[derive(Clone, Debug)]
pub struct MemoryWorld {
    dim: u8,
    generator: WorldGenerator,
    seed: u64,
    lines: HashMap<i64, Line>,
    consumed: HashSet<Pos>,
    fair: Rng,
}

impl MemoryWorld {
    pub fn new(dim: u8, generator: WorldGenerator, seed: u64) -> Result<Self, AtmError> {
        if dim != 1 && dim != 2 {
            return Err(AtmError::InvalidWorld(format!("dimension must be 1 or 2, got {dim}")));
        }
        generator.validate()?;
        Ok(Self {
            dim,
            generator,
            seed,
            lines: HashMap::new(),
            consumed: HashSet::new(),
            // replicate index u64::MAX - 1 keeps this clear of per-row streams
            fair: replicate_rng(seed, stream::WORLD, u64::MAX - 1),
        })
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn generator(&self) -> &WorldGenerator {
        &self.generator
    }

    pub fn is_consumed(&self, pos: Pos) -> bool {
        self.consumed.contains(&pos)
    }

    pub fn consume(&mut self, pos: Pos) {
        self.consumed.insert(pos);
    }

    /// Original content of a cell, ignoring consumption.
    pub fn pristine(&mut self, pos: Pos) -> bool {
        if let WorldGenerator::Image { rows, cols, cells } = &self.generator {
            let r = pos.y.rem_euclid(*rows as i64) as usize;
            let c = pos.x.rem_euclid(*cols as i64) as usize;
            return cells[r * cols + c];
        }
        let gen = &self.generator;
        let seed = self.seed;
        let line = self.lines.entry(pos.y).or_insert_with(|| {
            // zigzag row index so every row owns a distinct stream
            let row = if pos.y >= 0 { 2 * pos.y as u64 } else { 2 * pos.y.unsigned_abs() - 1 };
            let mut rng = replicate_rng(seed, stream::WORLD, 2 * row);
            let color = match gen {
                WorldGenerator::Band { lengths: BandLengths::Geometric, .. } => rng.gen(),
                _ => false,
            };
            let forward = LineGen { rng, color, left_in_band: 0 };
            let backward = LineGen { rng: replicate_rng(seed, stream::WORLD, 2 * row + 1), color, left_in_band: 0 };
            Line { forward, backward, pos: Vec::new(), neg: Vec::new() }
        });
        if pos.x >= 0 {
            let i = pos.x as usize;
            while line.pos.len() <= i {
                let b = line.forward.next(gen);
                line.pos.push(b);
            }
            line.pos[i]
        } else {
            let i = (-pos.x - 1) as usize;
            while line.neg.len() <= i {
                let b = line.backward.next(gen);
                line.neg.push(b);
            }
            line.neg[i]
        }
    }

    /// Reads a cell. Consumed cells return a fresh fair bit and `true`.
    pub fn read(&mut self, pos: Pos) -> (bool, bool) {
        if self.is_consumed(pos) {
            (self.fair.gen(), true)
        } else {
            (self.pristine(pos), false)
        }
    }

    pub fn format_pos(&self, pos: Pos) -> String {
        if self.dim == 1 {
            pos.x.to_string()
        } else {
            format!("{}:{}", pos.x, pos.y)
        }
    }
}

/// Energy store with an optional capacity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reservoir {
    balance: i64,
    capacity: Option<i64>,
}

impl Reservoir {
    pub fn new(balance: i64, capacity: Option<i64>) -> Self {
        Self { balance, capacity }
    }

    pub fn balance(&self) -> i64 {
        self.balance
    }

    pub fn capacity(&self) -> Option<i64> {
        self.capacity
    }

    pub fn is_alive(&self) -> bool {
        self.balance > 0
    }

    /// Applies a credit and a debit; returns the amount spilled over
    /// capacity, which has already been included in the debit side.
    fn apply(&mut self, e_in: i64, e_out: i64) -> i64 {
        let raw = self.balance + e_in - e_out;
        let spill = self.capacity.map_or(0, |cap| (raw - cap).max(0));
        self.balance = raw - spill;
        spill
    }
}

/// Unit displacement of the head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub dx: i64,
    pub dy: i64,
}

impl Move {
    pub const RIGHT: Move = Move { dx: 1, dy: 0 };
    pub const LEFT: Move = Move { dx: -1, dy: 0 };
    pub const UP: Move = Move { dx: 0, dy: 1 };
    pub const DOWN: Move = Move { dx: 0, dy: -1 };
    pub const STAY: Move = Move { dx: 0, dy: 0 };

    /// Displacement encoded by actuator bits: bit 0 `+x`, bit 1 `-x`,
    /// bit 2 `+y`, bit 3 `-y`. Higher bits drive no motion.
    pub fn from_actuators(bits: u32) -> Self {
        let b = |k: u32| i64::from((bits >> k) & 1);
        Move { dx: b(0) - b(1), dy: b(2) - b(3) }
    }
}

/// Maps the last `context_bits` raw symbols (most recent in bit 0) to an
/// action vector of `width` actuator bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionTable {
    context_bits: u32,
    width: u32,
    entries: Vec<u32>,
}

impl DecisionTable {
    pub fn new(context_bits: u32, width: u32, entries: Vec<u32>) -> Result<Self, AtmError> {
        if context_bits > 16 || width > 32 {
            return Err(AtmError::InvalidConfig("decision table too wide".into()));
        }
        if entries.len() != 1usize << context_bits {
            return Err(AtmError::InvalidConfig(format!(
                "decision table needs {} entries, got {}",
                1usize << context_bits,
                entries.len()
            )));
        }
        if width < 32 && entries.iter().any(|&e| e >> width != 0) {
            return Err(AtmError::InvalidConfig("action vector wider than declared".into()));
        }
        Ok(Self { context_bits, width, entries })
    }

    /// Table that never acts: the passive machine.
    pub fn passive() -> Self {
        Self { context_bits: 0, width: 0, entries: vec![0] }
    }

    pub fn context_bits(&self) -> u32 {
        self.context_bits
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn lookup(&self, context: u32) -> u32 {
        let mask = (1u32 << self.context_bits) - 1;
        self.entries[(context & mask) as usize]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AtmConfig {
    pub refiner: RefinerKind,
    pub engine: EngineConfig,
    pub decisions: DecisionTable,
    /// Cyclic motion followed while no decision is taken.
    pub default_motion: Vec<Move>,
    /// Fixed debit charged every step, in micro-bits.
    pub overhead: i64,
    pub initial_balance: i64,
    pub capacity: Option<i64>,
    pub start: Pos,
}

impl AtmConfig {
    /// Forward-only machine with no decisions.
    pub fn passive(refiner: RefinerKind, engine: EngineConfig, initial_bits: f64) -> Self {
        Self {
            refiner,
            engine,
            decisions: DecisionTable::passive(),
            default_motion: vec![Move::RIGHT],
            overhead: 0,
            initial_balance: bits_to_micro(initial_bits),
            capacity: None,
            start: Pos::default(),
        }
    }

    pub fn validate(&self) -> Result<(), AtmError> {
        if self.default_motion.is_empty() {
            return Err(AtmError::InvalidConfig("default motion must not be empty".into()));
        }
        if self.overhead < 0 {
            return Err(AtmError::InvalidConfig("overhead must be nonnegative".into()));
        }
        if let Some(cap) = self.capacity {
            if cap <= 0 || cap < self.initial_balance {
                return Err(AtmError::InvalidConfig("capacity must be positive and hold the initial balance".into()));
            }
        }
        Ok(())
    }
}

/// What the actuator did on a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    Default(Move),
    Decided { vector: u32, motion: Move },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepEvent {
    pub step: u64,
    pub pos: Pos,
    pub x: bool,
    pub eps: bool,
    /// The cell had already been consumed.
    pub revisit: bool,
    /// Signed engine yield; zero on revisits.
    pub engine: i64,
    pub decision_cost: i64,
    pub overhead: i64,
    pub spill: i64,
    pub e_in: i64,
    pub e_out: i64,
    pub action: Action,
    pub balance: i64,
}

/// Machine state: position, refiner, reservoir and context register.
#[derive(Clone, Debug)]
pub struct Atm {
    config: AtmConfig,
    refiner: StreamRefiner,
    reservoir: Reservoir,
    pos: Pos,
    context: u32,
    steps: u64,
    yields: [i64; 2],
}

impl Atm {
    pub fn new(config: AtmConfig) -> Result<Self, AtmError> {
        config.validate()?;
        let unit = ThermalContext::unit();
        // engine yields in bits for eps = 0 and eps = 1
        let y = |b| bits_to_micro(outcome_yield(&unit, &config.engine, b) / LN_2);
        let yields = [y(false), y(true)];
        Ok(Self {
            refiner: StreamRefiner::new(config.refiner.clone()),
            reservoir: Reservoir::new(config.initial_balance, config.capacity),
            pos: config.start,
            context: 0,
            steps: 0,
            yields,
            config,
        })
    }

    pub fn reservoir(&self) -> Reservoir {
        self.reservoir
    }

    pub fn position(&self) -> Pos {
        self.pos
    }

    pub fn is_alive(&self) -> bool {
        self.reservoir.is_alive()
    }

    /// Engine yield in micro-bits for a refined symbol.
    pub fn engine_yield(&self, eps: bool) -> i64 {
        self.yields[usize::from(eps)]
    }

    /// Reads the cell under the head, refines it, runs the engine, acts
    /// and settles the ledger.
    pub fn step(&mut self, world: &mut MemoryWorld) -> Result<StepEvent, AtmError> {
        if !self.reservoir.is_alive() {
            return Err(AtmError::Dead(self.reservoir.balance()));
        }
        let pos = self.pos;
        let (x, revisit) = world.read(pos);
        let eps = self.refiner.refine(x);
        world.consume(pos);
        let engine = if revisit { 0 } else { self.engine_yield(eps) };

        self.context = (self.context << 1) | u32::from(x);
        let vector = if eps { self.config.decisions.lookup(self.context) } else { 0 };
        let action = if vector != 0 {
            Action::Decided { vector, motion: Move::from_actuators(vector) }
        } else {
            let pattern = &self.config.default_motion;
            Action::Default(pattern[(self.steps % pattern.len() as u64) as usize])
        };
        let decision_cost = i64::from(vector.count_ones()) * MICRO_PER_BIT;
        let overhead = self.config.overhead;

        let e_in = engine.max(0);
        let base_out = (-engine).max(0) + decision_cost + overhead;
        let spill = self.reservoir.apply(e_in, base_out);
        let e_out = base_out + spill;

        let motion = match action {
            Action::Default(m) => m,
            Action::Decided { motion, .. } => motion,
        };
        self.pos = Pos::new(self.pos.x + motion.dx, if world.dim() == 2 { self.pos.y + motion.dy } else { 0 });
        let event = StepEvent {
            step: self.steps,
            pos,
            x,
            eps,
            revisit,
            engine,
            decision_cost,
            overhead,
            spill,
            e_in,
            e_out,
            action,
            balance: self.reservoir.balance(),
        };
        self.steps += 1;
        Ok(event)
    }
}

/// Ledger totals of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: u64,
    pub died: bool,
    pub death_step: Option<u64>,
    pub initial_balance: i64,
    pub final_balance: i64,
    /// Σ engine yields.
    pub understanding: i64,
    /// Σ decision costs and overhead.
    pub action: i64,
    /// `understanding - action`.
    pub net: i64,
    pub spilled: i64,
    pub errors: u64,
    pub decisions: u64,
    pub revisits: u64,
    pub mean_net_bits_per_step: f64,
}

impl RunSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub trace: Vec<StepEvent>,
    pub summary: RunSummary,
}

/// Runs until `max_steps` or death. The world is created from `generator`
/// with `seed`, so the run is a pure function of its arguments.
pub fn run(
    config: &AtmConfig,
    dim: u8,
    generator: WorldGenerator,
    max_steps: u64,
    seed: u64,
) -> Result<RunOutcome, AtmError> {
    let mut world = MemoryWorld::new(dim, generator, seed)?;
    run_in(config, &mut world, max_steps)
}

/// Runs against an existing world.
pub fn run_in(config: &AtmConfig, world: &mut MemoryWorld, max_steps: u64) -> Result<RunOutcome, AtmError> {
    let mut atm = Atm::new(config.clone())?;
    let mut trace = Vec::with_capacity(max_steps.min(1 << 20) as usize);
    while (trace.len() as u64) < max_steps && atm.is_alive() {
        trace.push(atm.step(world)?);
    }
    let summary = summarize(config.initial_balance, &trace);
    Ok(RunOutcome { trace, summary })
}

/// Recomputes ledger totals from a trace.
pub fn summarize(initial_balance: i64, trace: &[StepEvent]) -> RunSummary {
    let understanding: i64 = trace.iter().map(|e| e.engine).sum();
    let action: i64 = trace.iter().map(|e| e.decision_cost + e.overhead).sum();
    let final_balance = trace.last().map_or(initial_balance, |e| e.balance);
    let died = final_balance <= 0;
    let steps = trace.len() as u64;
    RunSummary {
        steps,
        died,
        death_step: died.then(|| steps.saturating_sub(1)),
        initial_balance,
        final_balance,
        understanding,
        action,
        net: understanding - action,
        spilled: trace.iter().map(|e| e.spill).sum(),
        errors: trace.iter().filter(|e| e.eps).count() as u64,
        decisions: trace.iter().filter(|e| matches!(e.action, Action::Decided { .. })).count() as u64,
        revisits: trace.iter().filter(|e| e.revisit).count() as u64,
        mean_net_bits_per_step: if steps == 0 { 0.0 } else { micro_to_bits(understanding - action) / steps as f64 },
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Default(m) => write!(f, "default({} {})", m.dx, m.dy),
            Action::Decided { vector, motion } => write!(f, "decide[{vector:b}]({} {})", motion.dx, motion.dy),
        }
    }
}

pub const TRACE_HEADER: &str = "step,pos,x,eps,e_in,e_out,action,balance";

/// Trace as CSV; energies in bits with six decimals, exactly.
pub fn trace_csv(world: &MemoryWorld, trace: &[StepEvent]) -> String {
    let mut out = String::with_capacity(48 * (trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for e in trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            e.step,
            world.format_pos(e.pos),
            u8::from(e.x),
            u8::from(e.eps),
            format_micro(e.e_in),
            format_micro(e.e_out),
            e.action,
            format_micro(e.balance)
        );
    }
    out
}

/// Settings for [`band_strategy_eval`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandEvalConfig {
    pub lengths: BandLengths,
    /// Per-cell flip probability inside bands.
    pub noise: f64,
    /// Probability the engine commits to its current symbol.
    pub strategy: f64,
    /// Measurement phase; `None` averages over all phases `0..I`.
    pub phase: Option<u32>,
    /// Independent tapes averaged together.
    pub replicates: u32,
}

impl Default for BandEvalConfig {
    fn default() -> Self {
        // q = 2/3 makes a wrong cell cost exactly one bit against a right one
        Self { lengths: BandLengths::Geometric, noise: 0.0, strategy: 2.0 / 3.0, phase: None, replicates: 1 }
    }
}

/// Measured losses of the measure-every-I policy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandEvalReport {
    pub mean_band_length: f64,
    pub period: u32,
    pub cells: u64,
    pub bands: u64,
    pub measurements_per_band: f64,
    /// Yield lost to a stale engine symbol, per band, in bits.
    pub mismatch_bits_per_band: f64,
    /// Measurements plus mismatch loss per band, as energy.
    pub loss_per_band: f64,
    /// Shortfall against kT ln 2 per cell for a correctly set engine, as
    /// energy.
    pub in_band_loss_per_bit: f64,
}

impl BandEvalReport {
    /// Loss per band in bits.
    pub fn loss_bits_per_band(&self) -> f64 {
        self.measurements_per_band + self.mismatch_bits_per_band
    }
}

#[derive(Default)]
struct BandTally {
    cells: u64,
    bands: u64,
    measurements: f64,
    mismatch_bits: f64,
    in_band_nats: f64,
}

fn band_tape(n: f64, cfg: &BandEvalConfig, steps: u64, rng: &mut Rng) -> (Vec<bool>, Vec<bool>, u64) {
    let gen = WorldGenerator::Band { mean: n, lengths: cfg.lengths, noise: 0.0 };
    let mut line = LineGen { rng: rng.clone(), color: false, left_in_band: 0 };
    let colors: Vec<bool> = (0..steps).map(|_| line.next(&gen)).collect();
    *rng = line.rng;
    let observed = colors.iter().map(|&c| c ^ (cfg.noise > 0.0 && rng.gen::<f64>() < cfg.noise)).collect();
    let bands = 1 + colors.windows(2).filter(|w| w[0] != w[1]).count() as u64;
    (colors, observed, bands)
}

fn tally_phase(colors: &[bool], observed: &[bool], period: u32, phase: u32, q: f64, tally: &mut BandTally) {
    let yield_bits = |sym: bool, v: bool| if sym == v { (2.0 * q).log2() } else { (2.0 * (1.0 - q)).log2() };
    let mut symbol = colors[0];
    let mut measurements = 1u64;
    let mut mismatch = 0.0;
    let mut in_band = 0.0;
    for (t, (&c, &v)) in colors.iter().zip(observed).enumerate() {
        if t > 0 && (t as u64) % u64::from(period) == u64::from(phase % period) {
            symbol = c;
            measurements += 1;
        }
        mismatch += yield_bits(c, v) - yield_bits(symbol, v);
        in_band += LN_2 - yield_bits(c, v) * LN_2;
    }
    tally.measurements += measurements as f64;
    tally.mismatch_bits += mismatch;
    tally.in_band_nats += in_band;
}

/// Simulates an engine whose favored symbol is re-measured every `period`
/// cells at one bit per measurement, on random band tapes with mean band
/// length `mean_band_length` over `steps` cells per replicate.
pub fn band_strategy_eval(
    ctx: &ThermalContext,
    mean_band_length: f64,
    period: u32,
    steps: u64,
    seed: u64,
    cfg: &BandEvalConfig,
) -> Result<BandEvalReport, AtmError> {
    band_sweep_with(ctx, mean_band_length, &[period], steps, seed, cfg, Exec::Sequential).map(|mut v| v.remove(0))
}

/// Evaluates several periods on the same tapes, so differences between
/// periods are not swamped by tape-to-tape noise.
pub fn band_sweep(
    ctx: &ThermalContext,
    mean_band_length: f64,
    periods: &[u32],
    steps: u64,
    seed: u64,
    cfg: &BandEvalConfig,
) -> Result<Vec<BandEvalReport>, AtmError> {
    band_sweep_with(ctx, mean_band_length, periods, steps, seed, cfg, Exec::default())
}

pub fn band_sweep_with(
    ctx: &ThermalContext,
    mean_band_length: f64,
    periods: &[u32],
    steps: u64,
    seed: u64,
    cfg: &BandEvalConfig,
    exec: Exec,
) -> Result<Vec<BandEvalReport>, AtmError> {
    WorldGenerator::Band { mean: mean_band_length, lengths: cfg.lengths, noise: cfg.noise }.validate()?;
    if periods.contains(&0) || steps == 0 || cfg.replicates == 0 {
        return Err(AtmError::InvalidConfig("period, steps and replicates must be >= 1".into()));
    }
    if !(0.5..1.0).contains(&cfg.strategy) {
        return Err(AtmError::InvalidConfig("strategy must lie in [0.5, 1)".into()));
    }
    let tapes: Vec<_> = (0..cfg.replicates)
        .map(|r| band_tape(mean_band_length, cfg, steps, &mut replicate_rng(seed, stream::BANDS, u64::from(r))))
        .collect();
    let jobs: Vec<(usize, usize)> =
        (0..periods.len()).flat_map(|p| (0..tapes.len()).map(move |r| (p, r))).collect();
    let tallies = exec.map_slice(&jobs, |&(p, r)| {
        let period = periods[p];
        let (colors, observed, bands) = &tapes[r];
        let phases: Vec<u32> = match cfg.phase {
            Some(ph) => vec![ph],
            None => (0..period).collect(),
        };
        let mut t = BandTally::default();
        for &ph in &phases {
            tally_phase(colors, observed, period, ph, cfg.strategy, &mut t);
        }
        let k = phases.len() as f64;
        (t.measurements / k, t.mismatch_bits / k, t.in_band_nats / k, *bands, colors.len() as u64)
    });
    Ok(periods
        .iter()
        .enumerate()
        .map(|(p, &period)| {
            let mut t = BandTally::default();
            for (meas, mism, inb, bands, cells) in &tallies[p * tapes.len()..(p + 1) * tapes.len()] {
                t.measurements += meas;
                t.mismatch_bits += mism;
                t.in_band_nats += inb;
                t.bands += bands;
                t.cells += cells;
            }
            let bands = t.bands as f64;
            BandEvalReport {
                mean_band_length,
                period,
                cells: t.cells,
                bands: t.bands,
                measurements_per_band: t.measurements / bands,
                mismatch_bits_per_band: t.mismatch_bits / bands,
                loss_per_band: (t.measurements + t.mismatch_bits) / bands * ctx.bit_energy(),
                in_band_loss_per_bit: t.in_band_nats / t.cells as f64 * ctx.kt(),
            }
        })
        .collect())
}

/// Index of the smallest loss per band.
pub fn sweep_argmin(reports: &[BandEvalReport]) -> Option<u32> {
    reports
        .iter()
        .min_by(|a, b| a.loss_per_band.total_cmp(&b.loss_per_band))
        .map(|r| r.period)
}

/// Convenience for callers that only need a seeded machine-side generator.
pub fn machine_rng(seed: u64) -> Rng {
    stream_rng(seed, stream::MACHINE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::{Handedness, ProbPair};

    fn engine(q: f64) -> EngineConfig {
        EngineConfig::symmetric(Handedness::FavorsZero, q).unwrap()
    }

    #[test]
    fn micro_formatting() {
        assert_eq!(format_micro(0), "0.000000");
        assert_eq!(format_micro(-50_000), "-0.050000");
        assert_eq!(format_micro(12_345_678), "12.345678");
        assert_eq!(bits_to_micro(0.01), 10_000);
    }

    #[test]
    fn worlds_are_deterministic_and_validated() {
        let mut a = MemoryWorld::new(1, WorldGenerator::band(5.0), 3).unwrap();
        let mut b = MemoryWorld::new(1, WorldGenerator::band(5.0), 3).unwrap();
        // different query orders must not change contents
        let fwd: Vec<bool> = (-20..20).map(|x| a.pristine(Pos::new(x, 0))).collect();
        let rev: Vec<bool> = (-20..20).rev().map(|x| b.pristine(Pos::new(x, 0))).collect();
        assert_eq!(fwd, rev.into_iter().rev().collect::<Vec<_>>());
        assert!(MemoryWorld::new(3, WorldGenerator::Constant(false), 0).is_err());
        assert!(MemoryWorld::new(1, WorldGenerator::Iid(1.5), 0).is_err());
        let img = WorldGenerator::Image { rows: 2, cols: 2, cells: vec![true, false, false, true] };
        let mut w = MemoryWorld::new(2, img, 0).unwrap();
        assert!(w.pristine(Pos::new(2, 2)));
        assert!(!w.pristine(Pos::new(-1, 0)));
        assert_eq!(w.format_pos(Pos::new(-1, 3)), "-1:3");
    }

    #[test]
    fn fixed_bands_alternate() {
        let gen = WorldGenerator::Band { mean: 3.0, lengths: BandLengths::Fixed, noise: 0.0 };
        let mut w = MemoryWorld::new(1, gen, 0).unwrap();
        let cells: String = (0..9).map(|x| if w.pristine(Pos::new(x, 0)) { '1' } else { '0' }).collect();
        assert_eq!(cells, "000111000");
    }

    #[test]
    fn passive_machine_on_zero_tape_grows() {
        let cfg = AtmConfig::passive(RefinerKind::Identity, engine(0.999), 1.0);
        let out = run(&cfg, 1, WorldGenerator::Constant(false), 1000, 0).unwrap();
        assert!(!out.summary.died);
        assert!(out.trace.windows(2).all(|w| w[1].balance >= w[0].balance));
        let per_step = micro_to_bits(out.trace[0].e_in);
        assert!((per_step - (2.0 * 0.999f64).log2()).abs() < 1e-6);
        assert!(out.trace.iter().all(|e| e.e_out == 0));
    }

    #[test]
    fn dead_machine_refuses_to_step() {
        let mut cfg = AtmConfig::passive(RefinerKind::Identity, engine(0.5), 0.0);
        cfg.initial_balance = 0;
        let mut atm = Atm::new(cfg).unwrap();
        let mut w = MemoryWorld::new(1, WorldGenerator::Constant(false), 0).unwrap();
        assert_eq!(atm.step(&mut w), Err(AtmError::Dead(0)));
    }

    #[test]
    fn fair_tape_with_overhead_dies_on_schedule() {
        let strategy = EngineConfig::new(Handedness::FavorsZero, ProbPair::uniform(), ProbPair::uniform()).unwrap();
        let mut cfg = AtmConfig::passive(RefinerKind::DelayXor, strategy, 100.0);
        cfg.overhead = bits_to_micro(0.01);
        let out = run(&cfg, 1, WorldGenerator::Iid(0.5), 1_000_000, 4).unwrap();
        assert!(out.summary.died);
        assert_eq!(out.summary.steps, 10_000);
        assert_eq!(out.summary.final_balance, 0);
    }

    #[test]
    fn capacity_spills_explicitly() {
        let mut cfg = AtmConfig::passive(RefinerKind::Identity, engine(0.75), 1.0);
        cfg.capacity = Some(bits_to_micro(2.0));
        let out = run(&cfg, 1, WorldGenerator::Constant(false), 50, 0).unwrap();
        assert!(out.trace.iter().all(|e| e.balance <= bits_to_micro(2.0)));
        assert!(out.summary.spilled > 0);
        let s = &out.summary;
        assert_eq!(s.final_balance, s.initial_balance + s.net - s.spilled);
    }

    #[test]
    fn decisions_cost_one_bit_per_set_bit() {
        // context = last raw bit; on an error after reading 1 go left with a
        // 3-bit vector (left motor plus two idle actuators)
        let table = DecisionTable::new(1, 4, vec![0b0001, 0b0010 | 0b0100 | 0b1000]).unwrap();
        let mut cfg = AtmConfig::passive(RefinerKind::DelayXor, engine(0.9), 50.0);
        cfg.decisions = table;
        let img = WorldGenerator::Image { rows: 1, cols: 8, cells: vec![false, false, false, true, true, false, false, false] };
        let out = run(&cfg, 1, img, 20, 0).unwrap();
        for e in &out.trace {
            match e.action {
                Action::Decided { vector, .. } => {
                    assert!(e.eps);
                    assert_eq!(e.decision_cost, i64::from(vector.count_ones()) * MICRO_PER_BIT);
                    assert!(e.e_out > 0);
                }
                Action::Default(_) => assert_eq!(e.decision_cost, 0),
            }
        }
        assert!(out.summary.decisions > 0);
        assert!(out.summary.revisits > 0);
        assert!(out.trace.iter().filter(|e| e.revisit).all(|e| e.engine == 0));
        assert!(DecisionTable::new(1, 2, vec![0]).is_err());
        assert!(DecisionTable::new(0, 1, vec![2]).is_err());
    }

    #[test]
    fn trace_csv_shape() {
        let cfg = AtmConfig::passive(RefinerKind::Identity, engine(0.75), 1.0);
        let mut w = MemoryWorld::new(1, WorldGenerator::Constant(false), 0).unwrap();
        let out = run_in(&cfg, &mut w, 2).unwrap();
        let csv = trace_csv(&w, &out.trace);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], TRACE_HEADER);
        assert_eq!(lines[1], "0,0,0,0,0.584963,0.000000,default(1 0),1.584963");
        assert!(out.summary.to_json().contains("\"final_balance\""));
    }

    #[test]
    fn periodic_bands_cost_only_measurements() {
        let ctx = ThermalContext::unit();
        let cfg = BandEvalConfig { lengths: BandLengths::Fixed, phase: Some(0), ..BandEvalConfig::default() };
        let r = band_strategy_eval(&ctx, 8.0, 8, 8_000, 1, &cfg).unwrap();
        assert_eq!(r.mismatch_bits_per_band, 0.0);
        assert!((r.measurements_per_band - 1.0).abs() < 1e-12);
        assert!((r.loss_per_band - LN_2).abs() < 1e-12);
    }

    #[test]
    fn band_eval_rejects_bad_input() {
        let ctx = ThermalContext::unit();
        let cfg = BandEvalConfig::default();
        assert!(band_strategy_eval(&ctx, 10.0, 0, 100, 0, &cfg).is_err());
        assert!(band_strategy_eval(&ctx, 0.5, 3, 100, 0, &cfg).is_err());
        let bad = BandEvalConfig { strategy: 0.2, ..cfg };
        assert!(band_strategy_eval(&ctx, 10.0, 3, 100, 0, &bad).is_err());
    }
}
