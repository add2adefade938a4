//! Register swap dynamics, uniformity objectives, trajectory search and
//! streaming refiners.
//!
//! A swap trajectory acts on a register as a permutation. Throughout, a
//! permutation `perm` maps a register `psi` to `psi'[i] = psi[perm[i]]`.

use std::collections::VecDeque;
use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use thiserror::Error;

use crate::exec::Exec;
use crate::rng::{replicate_rng, stream};
use crate::thermo::{binary_entropy_bits, ThermalContext};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RefineryError {
    #[error("address {addr} out of range for register width {width}")]
    AddressOutOfRange { addr: usize, width: usize },
    #[error("step addresses must be pairwise distinct")]
    AddressCollision,
    #[error("register must have at least 2 bits")]
    TooShort,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("objective requires schedule-controlled steps only")]
    DataControlledStep,
    #[error("no samples supplied")]
    EmptySamples,
    #[error("empty stream")]
    EmptyStream,
    #[error("refiner needs an initial window of {expected} bits, got {got:?}")]
    BadInitialWindow { expected: usize, got: Option<usize> },
    #[error("lookup table must have 2^{k} entries, got {got}")]
    BadTable { k: usize, got: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Register content with conserved 0/1 counts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RegisterVector {
    bits: Vec<bool>,
}

impl RegisterVector {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_str_bits(s: &str) -> Result<Self, RefineryError> {
        parse_bits(s, 1).map(Self::new)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn zeros(&self) -> usize {
        self.len() - self.ones()
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self::new(perm.iter().map(|&j| self.bits[j]).collect())
    }
}

impl fmt::Display for RegisterVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// One controlled swap of bits `x` and `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SwapStep {
    /// Swap iff the register bit at `z` is 1.
    Data { x: usize, y: usize, z: usize },
    /// Swap iff `apply`; the control depends on time only.
    Schedule { x: usize, y: usize, apply: bool },
}

impl SwapStep {
    pub fn validate(&self, width: usize) -> Result<(), RefineryError> {
        let addrs: &[usize] = match self {
            SwapStep::Data { x, y, z } => &[*x, *y, *z],
            SwapStep::Schedule { x, y, .. } => &[*x, *y],
        };
        for (i, &a) in addrs.iter().enumerate() {
            if a >= width {
                return Err(RefineryError::AddressOutOfRange { addr: a, width });
            }
            if addrs[..i].contains(&a) {
                return Err(RefineryError::AddressCollision);
            }
        }
        Ok(())
    }

    fn swaps(&self, bits: &[bool]) -> Option<(usize, usize)> {
        match *self {
            SwapStep::Data { x, y, z } => bits[z].then_some((x, y)),
            SwapStep::Schedule { x, y, apply } => apply.then_some((x, y)),
        }
    }

    /// The N×N 0/1 matrix this step realizes on `psi`: the identity, or the
    /// identity with rows `x` and `y` exchanged.
    pub fn matrix(&self, psi: &RegisterVector) -> Result<Vec<Vec<i8>>, RefineryError> {
        let n = psi.len();
        self.validate(n)?;
        let mut m: Vec<Vec<i8>> = (0..n).map(|i| (0..n).map(|j| i8::from(i == j)).collect()).collect();
        if let Some((x, y)) = self.swaps(psi.bits()) {
            m.swap(x, y);
        }
        Ok(m)
    }
}

impl fmt::Display for SwapStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SwapStep::Data { x, y, z } => write!(f, "DATA {x} {y} {z}"),
            SwapStep::Schedule { x, y, apply } => write!(f, "SWAP {x} {y} {}", u8::from(apply)),
        }
    }
}

/// Ordered list of swap steps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trajectory {
    pub steps: Vec<SwapStep>,
}

impl Trajectory {
    pub fn new(steps: Vec<SwapStep>) -> Self {
        Self { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn validate(&self, width: usize) -> Result<(), RefineryError> {
        self.steps.iter().try_for_each(|s| s.validate(width))
    }

    pub fn apply(&self, psi: &RegisterVector) -> Result<RegisterVector, RefineryError> {
        self.steps.iter().try_fold(psi.clone(), |acc, s| swap_step(&acc, s))
    }

    /// Permutation realized by a schedule-controlled trajectory.
    pub fn permutation(&self, width: usize) -> Result<Vec<usize>, RefineryError> {
        self.validate(width)?;
        let mut perm: Vec<usize> = (0..width).collect();
        for step in &self.steps {
            match *step {
                SwapStep::Schedule { x, y, apply } => {
                    if apply {
                        perm.swap(x, y);
                    }
                }
                SwapStep::Data { .. } => return Err(RefineryError::DataControlledStep),
            }
        }
        Ok(perm)
    }

    pub fn to_text(&self) -> String {
        self.steps.iter().map(|s| format!("{s}\n")).collect()
    }
}

impl FromStr for Trajectory {
    type Err = RefineryError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut steps = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| RefineryError::Parse { line: idx + 1, msg: msg.to_string() };
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 {
                return Err(err("expected `SWAP x y apply` or `DATA x y z`"));
            }
            let num = |s: &str| s.parse::<usize>().map_err(|_| err("expected an address"));
            let step = match parts[0] {
                "SWAP" => SwapStep::Schedule {
                    x: num(parts[1])?,
                    y: num(parts[2])?,
                    apply: match parts[3] {
                        "0" => false,
                        "1" => true,
                        _ => return Err(err("apply flag must be 0 or 1")),
                    },
                },
                "DATA" => SwapStep::Data { x: num(parts[1])?, y: num(parts[2])?, z: num(parts[3])? },
                _ => return Err(err("unknown step kind")),
            };
            steps.push(step);
        }
        Ok(Self { steps })
    }
}

/// Applies one swap step.
pub fn swap_step(psi: &RegisterVector, step: &SwapStep) -> Result<RegisterVector, RefineryError> {
    step.validate(psi.len())?;
    let mut out = psi.clone();
    if let Some((x, y)) = step.swaps(psi.bits()) {
        out.bits.swap(x, y);
    }
    Ok(out)
}

/// `Z = ½ ‖Cψ − ψ‖²` with `C` the cyclic shift `(Cψ)_i = ψ_{i−1}`.
pub fn uniformity_defect(psi: &RegisterVector) -> f64 {
    let n = psi.len();
    if n == 0 {
        return 0.0;
    }
    let b = psi.bits();
    let flips = (0..n).filter(|&i| b[(i + n - 1) % n] != b[i]).count();
    0.5 * flips as f64
}

/// `Q̂ = (1/M) Σ ψ ψᵀ` over equal-width samples.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleCovariance {
    n: usize,
    data: Vec<f64>,
}

impl SampleCovariance {
    pub fn from_samples(samples: &[RegisterVector]) -> Result<Self, RefineryError> {
        let first = samples.first().ok_or(RefineryError::EmptySamples)?;
        let n = first.len();
        if n < 2 {
            return Err(RefineryError::TooShort);
        }
        let mut data = vec![0.0; n * n];
        for s in samples {
            if s.len() != n {
                return Err(RefineryError::DimensionMismatch { expected: n, got: s.len() });
            }
            let ones: Vec<usize> = (0..n).filter(|&i| s.bits[i]).collect();
            for &i in &ones {
                for &j in &ones {
                    data[i * n + j] += 1.0;
                }
            }
        }
        let m = samples.len() as f64;
        data.iter_mut().for_each(|v| *v /= m);
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `Tr(H P Q̂ Pᵀ)` for the permutation matrix `P` of `perm`, with
    /// `H = ½(C + Cᵀ)`.
    pub fn objective_for_permutation(&self, perm: &[usize]) -> f64 {
        let n = self.n;
        let mut f = 0.0;
        for i in 0..n {
            let pi = perm[i];
            f += self.get(pi, perm[(i + n - 1) % n]) + self.get(pi, perm[(i + 1) % n]);
        }
        0.5 * f
    }
}

/// `F = Tr(H U Q̂ Uᵀ)` for a schedule-controlled trajectory.
pub fn avg_objective(cov: &SampleCovariance, traj: &Trajectory) -> Result<f64, RefineryError> {
    let perm = traj.permutation(cov.dim())?;
    Ok(cov.objective_for_permutation(&perm))
}

/// Search effort for [`optimize_trajectory`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub restarts: usize,
    pub iterations: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { restarts: 8, iterations: 4000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub trajectory: Trajectory,
    pub objective: f64,
    /// Objective of the incumbent after each accepted improvement, starting
    /// with the empty trajectory.
    pub history: Vec<f64>,
}

pub fn optimize_trajectory(
    samples: &[RegisterVector],
    max_len: usize,
    budget: SearchBudget,
    seed: u64,
) -> Result<SearchOutcome, RefineryError> {
    optimize_trajectory_with(samples, max_len, budget, seed, Exec::default())
}

/// Greedy best-improvement over appended steps, followed by seeded
/// simulated-annealing restarts around the greedy result. Only strict
/// improvements replace the incumbent.
pub fn optimize_trajectory_with(
    samples: &[RegisterVector],
    max_len: usize,
    budget: SearchBudget,
    seed: u64,
    exec: Exec,
) -> Result<SearchOutcome, RefineryError> {
    let cov = SampleCovariance::from_samples(samples)?;
    let n = cov.dim();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).collect();
    let eval = |steps: &[(usize, usize)]| {
        let mut perm: Vec<usize> = (0..n).collect();
        for &(x, y) in steps {
            perm.swap(x, y);
        }
        cov.objective_for_permutation(&perm)
    };

    let mut best: Vec<(usize, usize)> = Vec::new();
    let mut best_f = eval(&best);
    let mut history = vec![best_f];

    while best.len() < max_len {
        let (idx, f) = exec
            .argmax_range(pairs.len(), |k| {
                let mut cand = best.clone();
                cand.push(pairs[k]);
                eval(&cand)
            })
            .expect("at least one pair for n >= 2");
        if f > best_f {
            best.push(pairs[idx]);
            best_f = f;
            history.push(f);
        } else {
            break;
        }
    }

    if max_len > 0 && budget.restarts > 0 && budget.iterations > 0 {
        let start = best.clone();
        let runs = exec.map_range(budget.restarts, |r| {
            anneal(&start, &pairs, max_len, budget.iterations, seed, r as u64, &eval)
        });
        for (steps, f) in runs {
            if f > best_f {
                best = steps;
                best_f = f;
                history.push(f);
            }
        }
    }

    let trajectory = Trajectory::new(
        best.into_iter().map(|(x, y)| SwapStep::Schedule { x, y, apply: true }).collect(),
    );
    Ok(SearchOutcome { trajectory, objective: best_f, history })
}

fn anneal<F>(
    start: &[(usize, usize)],
    pairs: &[(usize, usize)],
    max_len: usize,
    iterations: usize,
    seed: u64,
    restart: u64,
    eval: &F,
) -> (Vec<(usize, usize)>, f64)
where
    F: Fn(&[(usize, usize)]) -> f64,
{
    let mut rng = replicate_rng(seed, stream::SEARCH, restart);
    // odd restarts begin from scratch, even ones refine the greedy result
    let mut cur: Vec<(usize, usize)> = if restart.is_multiple_of(2) { start.to_vec() } else { Vec::new() };
    let mut cur_f = eval(&cur);
    let mut best = (cur.clone(), cur_f);
    let (t0, t1) = (1.0f64, 1e-3f64);
    for it in 0..iterations {
        let temp = t0 * (t1 / t0).powf(it as f64 / iterations as f64);
        let mut cand = cur.clone();
        let pick = pairs[rng.gen_range(0..pairs.len())];
        match rng.gen_range(0..3) {
            0 if cand.len() < max_len => {
                let at = rng.gen_range(0..=cand.len());
                cand.insert(at, pick);
            }
            1 if !cand.is_empty() => {
                let at = rng.gen_range(0..cand.len());
                cand.remove(at);
            }
            _ if !cand.is_empty() => {
                let at = rng.gen_range(0..cand.len());
                cand[at] = pick;
            }
            _ => cand.push(pick),
        }
        let f = eval(&cand);
        if f >= cur_f || rng.gen::<f64>() < ((f - cur_f) / temp).exp() {
            cur = cand;
            cur_f = f;
            if cur_f > best.1 {
                best = (cur.clone(), cur_f);
            }
        }
    }
    best
}

/// Refiner variants. The table predictor maps the last `k` inputs
/// (most recent in bit 0 of the index) to a predicted bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefinerKind {
    Identity,
    Negation,
    DelayXor,
    TablePredictor { k: usize, table: Vec<bool> },
}

impl RefinerKind {
    pub fn table_predictor(k: usize, table: Vec<bool>) -> Result<Self, RefineryError> {
        if table.len() != 1 << k {
            return Err(RefineryError::BadTable { k, got: table.len() });
        }
        Ok(RefinerKind::TablePredictor { k, table })
    }

    /// Predicts the majority of the last `k` inputs.
    pub fn majority(k: usize) -> Self {
        let table = (0..1usize << k).map(|i| 2 * i.count_ones() as usize > k).collect();
        RefinerKind::TablePredictor { k, table }
    }

    /// History length the refiner keeps.
    pub fn window(&self) -> usize {
        match self {
            RefinerKind::Identity | RefinerKind::Negation => 0,
            RefinerKind::DelayXor => 1,
            RefinerKind::TablePredictor { k, .. } => *k,
        }
    }

    fn predict(&self, history: &VecDeque<bool>) -> bool {
        match self {
            RefinerKind::Identity => false,
            RefinerKind::Negation => true,
            RefinerKind::DelayXor => history[0],
            RefinerKind::TablePredictor { table, .. } => {
                let idx = history.iter().enumerate().fold(0usize, |a, (i, &b)| a | (usize::from(b) << i));
                table[idx]
            }
        }
    }
}

/// Stateful reversible stream transform `ε_n = x_n ⊕ prediction(history)`.
#[derive(Clone, Debug)]
pub struct StreamRefiner {
    kind: RefinerKind,
    history: VecDeque<bool>,
    seen: usize,
}

/// Output of a refiner over a whole stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinedStream {
    pub bits: Vec<bool>,
    /// Leading outputs produced before the history window filled.
    pub warmup: usize,
}

impl StreamRefiner {
    /// Refiner with an all-zero initial window.
    pub fn new(kind: RefinerKind) -> Self {
        let history = VecDeque::from(vec![false; kind.window()]);
        Self { kind, history, seen: 0 }
    }

    /// Refiner with an explicit initial window, most recent bit first.
    pub fn with_window(kind: RefinerKind, window: &[bool]) -> Result<Self, RefineryError> {
        if window.len() != kind.window() {
            return Err(RefineryError::BadInitialWindow { expected: kind.window(), got: Some(window.len()) });
        }
        Ok(Self { history: window.iter().copied().collect(), kind, seen: 0 })
    }

    pub fn kind(&self) -> &RefinerKind {
        &self.kind
    }

    /// Current history, most recent first.
    pub fn window(&self) -> Vec<bool> {
        self.history.iter().copied().collect()
    }

    pub fn is_warm(&self) -> bool {
        self.seen >= self.kind.window()
    }

    /// Consumes one input bit and returns the refined bit.
    pub fn refine(&mut self, x: bool) -> bool {
        let eps = x ^ self.kind.predict(&self.history);
        self.push(x);
        eps
    }

    fn push(&mut self, x: bool) {
        if self.kind.window() > 0 {
            self.history.pop_back();
            self.history.push_front(x);
        }
        self.seen += 1;
    }

    pub fn refine_stream(&mut self, xs: &[bool]) -> RefinedStream {
        let warmup = self.kind.window().saturating_sub(self.seen).min(xs.len());
        RefinedStream { bits: xs.iter().map(|&x| self.refine(x)).collect(), warmup }
    }
}

/// Free-function form of [`StreamRefiner::refine`].
pub fn refine(r: &mut StreamRefiner, x: bool) -> bool {
    r.refine(x)
}

/// Reconstructs the input stream from refined bits and the initial window
/// the forward refiner started with.
pub fn invert_refinement(
    kind: &RefinerKind,
    eps: &[bool],
    initial_window: Option<&[bool]>,
) -> Result<Vec<bool>, RefineryError> {
    let window: Vec<bool> = match initial_window {
        Some(w) => w.to_vec(),
        None if kind.window() == 0 => Vec::new(),
        None => return Err(RefineryError::BadInitialWindow { expected: kind.window(), got: None }),
    };
    let mut state = StreamRefiner::with_window(kind.clone(), &window)?;
    Ok(eps
        .iter()
        .map(|&e| {
            let x = e ^ state.kind.predict(&state.history);
            state.push(x);
            x
        })
        .collect())
}

/// Fraction of zeros in a refined stream.
pub fn purity(eps: &[bool]) -> Result<f64, RefineryError> {
    if eps.is_empty() {
        return Err(RefineryError::EmptyStream);
    }
    Ok(eps.iter().filter(|&&b| !b).count() as f64 / eps.len() as f64)
}

/// Purity excluding warm-up outputs.
pub fn stream_purity(stream: &RefinedStream) -> Result<f64, RefineryError> {
    purity(&stream.bits[stream.warmup..])
}

/// Extractable energy per bit at purity `q`: `kT ln 2 · (1 − H₂(q))`.
pub fn energy_rate(ctx: &ThermalContext, q: f64) -> f64 {
    ctx.kt() * LN_2 * (1.0 - binary_entropy_bits(q))
}

fn parse_bits(s: &str, line: usize) -> Result<Vec<bool>, RefineryError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(RefineryError::Parse { line, msg: format!("unexpected character {other:?}") }),
        })
        .collect()
}

/// Parses raw bit text: one record per line of `0`/`1` characters.
pub fn parse_bit_records(text: &str) -> Result<Vec<Vec<bool>>, RefineryError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_bits(l.trim(), i + 1))
        .collect()
}

pub fn format_bit_records(records: &[Vec<bool>]) -> String {
    let mut out = String::new();
    for r in records {
        out.extend(r.iter().map(|&b| if b { '1' } else { '0' }));
        out.push('\n');
    }
    out
}
