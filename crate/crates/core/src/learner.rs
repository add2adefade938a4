//! Pattern learning by statistical sorting over symbol streams, and the
//! action-oriented gaze walk over a black-and-white image.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{replicate_rng, stream};
use crate::thermo::ThermalContext;

pub const DEFAULT_THETA: f64 = 3.0;
pub const DEFAULT_PHI: f64 = 1e-4;
pub const DEFAULT_MIN_SUPPORT: u64 = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnerError {
    #[error("unknown token {0}")]
    UnknownToken(usize),
    #[error("image line {line}: {msg}")]
    Image { line: usize, msg: String },
    #[error("dictionary json: {0}")]
    Json(String),
    #[error("invalid dictionary: {0}")]
    Invalid(String),
}

/// Whether a symbol describes what was seen or what was done.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Data,
    Action,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub id: usize,
    pub role: Role,
    pub primitive: bool,
    /// Child pattern ids; empty for primitives.
    pub parts: Vec<usize>,
    /// Primitive symbol ids this pattern stands for.
    pub expansion: Vec<usize>,
    pub count: u64,
    pub probability: f64,
    /// Lift measured when the pattern was promoted.
    pub lift: Option<f64>,
    pub pruned: bool,
}

/// Primitive alphabet plus promoted composites, in promotion order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternDictionary {
    pub names: Vec<String>,
    pub patterns: Vec<Pattern>,
    pub theta: f64,
    pub phi: f64,
    pub min_support: u64,
}

impl PatternDictionary {
    pub fn new(primitives: &[(&str, Role)]) -> Self {
        let patterns = primitives
            .iter()
            .enumerate()
            .map(|(id, &(_, role))| Pattern {
                id,
                role,
                primitive: true,
                parts: Vec::new(),
                expansion: vec![id],
                count: 0,
                probability: 0.0,
                lift: None,
                pruned: false,
            })
            .collect();
        Self {
            names: primitives.iter().map(|(n, _)| n.to_string()).collect(),
            patterns,
            theta: DEFAULT_THETA,
            phi: DEFAULT_PHI,
            min_support: DEFAULT_MIN_SUPPORT,
        }
    }

    /// Data-only alphabet from single-character names.
    pub fn from_alphabet(chars: &str) -> Self {
        let names: Vec<String> = chars.chars().map(String::from).collect();
        let prims: Vec<(&str, Role)> = names.iter().map(|n| (n.as_str(), Role::Data)).collect();
        Self::new(&prims)
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_min_support(mut self, min_support: u64) -> Self {
        self.min_support = min_support;
        self
    }

    pub fn primitive_count(&self) -> usize {
        self.names.len()
    }

    pub fn get(&self, id: usize) -> Option<&Pattern> {
        self.patterns.get(id).filter(|p| !p.pruned)
    }

    pub fn active(&self) -> impl Iterator<Item = &Pattern> {
        self.patterns.iter().filter(|p| !p.pruned)
    }

    /// Live composites in promotion order.
    pub fn composites(&self) -> impl Iterator<Item = &Pattern> {
        self.active().filter(|p| !p.primitive)
    }

    pub fn find(&self, expansion: &[usize]) -> Option<usize> {
        self.active().find(|p| p.expansion == expansion).map(|p| p.id)
    }

    pub fn name_of(&self, id: usize) -> String {
        self.patterns[id].expansion.iter().map(|&s| self.names[s].as_str()).collect::<Vec<_>>().join("-")
    }

    pub fn symbol(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn promote(&mut self, parts: Vec<usize>, lift: f64, count: u64) -> usize {
        let expansion: Vec<usize> = parts.iter().flat_map(|&p| self.patterns[p].expansion.clone()).collect();
        let id = self.patterns.len();
        let role = self.patterns[parts[0]].role;
        self.patterns.push(Pattern {
            id,
            role,
            primitive: false,
            parts,
            expansion,
            count,
            probability: 0.0,
            lift: Some(lift),
            pruned: false,
        });
        id
    }

    /// Counts overlapping occurrences of every live pattern in a primitive
    /// string and refreshes probabilities.
    pub fn recount(&mut self, primitives: &[usize]) {
        let index: HashMap<Vec<usize>, usize> = self.active().map(|p| (p.expansion.clone(), p.id)).collect();
        let max_len = self.active().map(|p| p.expansion.len()).max().unwrap_or(1);
        let mut counts = vec![0u64; self.patterns.len()];
        for start in 0..primitives.len() {
            for len in 1..=max_len.min(primitives.len() - start) {
                if let Some(&id) = index.get(&primitives[start..start + len]) {
                    counts[id] += 1;
                }
            }
        }
        let total: u64 = counts.iter().sum();
        for p in self.patterns.iter_mut().filter(|p| !p.pruned) {
            p.count = counts[p.id];
            p.probability = if total == 0 { 0.0 } else { p.count as f64 / total as f64 };
        }
    }

    /// Removes composites whose probability fell below `phi`, expanding
    /// them in place inside the composites that reference them.
    pub fn prune(&mut self) -> Vec<usize> {
        let doomed: Vec<usize> = self
            .composites()
            .filter(|p| p.probability < self.phi)
            .map(|p| p.id)
            .collect();
        for &d in &doomed {
            self.patterns[d].pruned = true;
        }
        for &d in &doomed {
            let inner = self.patterns[d].parts.clone();
            for p in self.patterns.iter_mut().filter(|p| !p.primitive) {
                if p.parts.contains(&d) {
                    p.parts = p.parts.iter().flat_map(|&c| if c == d { inner.clone() } else { vec![c] }).collect();
                }
            }
        }
        doomed
    }

    /// Greedy longest-match tokenization of a primitive string.
    pub fn tokenize(&self, primitives: &[usize]) -> Vec<usize> {
        let index: HashMap<&[usize], usize> = self.active().map(|p| (p.expansion.as_slice(), p.id)).collect();
        let max_len = self.active().map(|p| p.expansion.len()).max().unwrap_or(1);
        let mut out = Vec::new();
        let mut i = 0;
        while i < primitives.len() {
            let len = (1..=max_len.min(primitives.len() - i))
                .rev()
                .find(|&l| index.contains_key(&primitives[i..i + l]))
                .expect("primitives always match");
            out.push(index[&primitives[i..i + len]]);
            i += len;
        }
        out
    }

    /// Expands pattern ids to primitive symbols.
    pub fn expand(&self, tokens: &[usize]) -> Result<Vec<usize>, LearnerError> {
        let mut out = Vec::new();
        for &t in tokens {
            out.extend_from_slice(&self.get(t).ok_or(LearnerError::UnknownToken(t))?.expansion);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dictionary serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LearnerError> {
        let dict: Self = serde_json::from_str(text).map_err(|e| LearnerError::Json(e.to_string()))?;
        dict.check()?;
        Ok(dict)
    }

    /// Verifies ids, primitive layout and that every live composite expands
    /// through live parts to its recorded expansion.
    pub fn check(&self) -> Result<(), LearnerError> {
        let bad = |m: String| Err(LearnerError::Invalid(m));
        for (i, p) in self.patterns.iter().enumerate() {
            if p.id != i {
                return bad(format!("pattern at index {i} has id {}", p.id));
            }
            if p.primitive != (i < self.names.len()) {
                return bad(format!("pattern {i} misplaced relative to the primitives"));
            }
            if p.primitive && (p.pruned || p.expansion != vec![i]) {
                return bad(format!("primitive {i} altered"));
            }
            if !p.primitive && !p.pruned {
                let mut flat = Vec::new();
                for &c in &p.parts {
                    match self.get(c) {
                        Some(child) if c < i => flat.extend_from_slice(&child.expansion),
                        _ => return bad(format!("pattern {i} references missing part {c}")),
                    }
                }
                if flat != p.expansion {
                    return bad(format!("pattern {i} parts do not expand to its expansion"));
                }
            }
        }
        Ok(())
    }
}

/// Promotions made by one learning call.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LearnReport {
    pub promoted: Vec<usize>,
    pub pruned: Vec<usize>,
}

/// Observed/expected ratio for an adjacent token pair.
fn lift(observed: u64, count_a: u64, count_b: u64, total: u64) -> f64 {
    if count_a == 0 || count_b == 0 || total == 0 {
        return 0.0;
    }
    observed as f64 * total as f64 / (count_a as f64 * count_b as f64)
}

/// Runs `passes` rounds of recount, prune, re-tokenize and pair promotion
/// over a stream of pattern ids.
pub fn learn_pairs(
    stream: &[usize],
    dict: &mut PatternDictionary,
    passes: usize,
) -> Result<LearnReport, LearnerError> {
    let primitives = dict.expand(stream)?;
    let mut report = LearnReport::default();
    if primitives.is_empty() {
        return Ok(report);
    }
    for _ in 0..passes {
        dict.recount(&primitives);
        report.pruned.extend(dict.prune());
        let tokens = dict.tokenize(&primitives);
        let total: u64 = dict.active().map(|p| p.count).sum();
        let mut pairs: HashMap<(usize, usize), u64> = HashMap::new();
        for w in tokens.windows(2) {
            *pairs.entry((w[0], w[1])).or_default() += 1;
        }
        let mut candidates: Vec<((usize, usize), u64, f64)> = pairs
            .into_iter()
            .filter(|&(_, obs)| obs >= dict.min_support)
            .map(|((a, b), obs)| ((a, b), obs, lift(obs, dict.patterns[a].count, dict.patterns[b].count, total)))
            .filter(|&(_, _, l)| l >= dict.theta)
            .collect();
        candidates.sort_by(|x, y| y.2.total_cmp(&x.2).then(x.0.cmp(&y.0)));
        let mut any = false;
        for ((a, b), obs, l) in candidates {
            let mut expansion = dict.patterns[a].expansion.clone();
            expansion.extend_from_slice(&dict.patterns[b].expansion);
            if dict.find(&expansion).is_none() {
                report.promoted.push(dict.promote(vec![a, b], l, obs));
                any = true;
            }
        }
        if !any {
            break;
        }
    }
    dict.recount(&primitives);
    Ok(report)
}

/// Gaze moves, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GazeAction {
    Right,
    Below,
    Left,
    Up,
}

impl GazeAction {
    pub const ALL: [GazeAction; 4] = [GazeAction::Right, GazeAction::Below, GazeAction::Left, GazeAction::Up];

    pub fn name(self) -> &'static str {
        match self {
            GazeAction::Right => "right",
            GazeAction::Below => "below",
            GazeAction::Left => "left",
            GazeAction::Up => "up",
        }
    }

    fn delta(self) -> (isize, isize) {
        match self {
            GazeAction::Right => (0, 1),
            GazeAction::Below => (1, 0),
            GazeAction::Left => (0, -1),
            GazeAction::Up => (-1, 0),
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Symbol ids in a gaze dictionary.
pub const BLACK: usize = 0;
pub const WHITE: usize = 1;

fn action_symbol(a: GazeAction) -> usize {
    2 + a.index()
}

fn symbol_action(s: usize) -> Option<GazeAction> {
    s.checked_sub(2).and_then(|i| GazeAction::ALL.get(i).copied())
}

/// Binary image on a torus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GazeImage {
    rows: usize,
    cols: usize,
    black: Vec<bool>,
}

impl GazeImage {
    pub fn new(rows: usize, cols: usize, black: Vec<bool>) -> Result<Self, LearnerError> {
        if rows == 0 || cols == 0 || black.len() != rows * cols {
            return Err(LearnerError::Image { line: 0, msg: "dimensions do not match pixels".into() });
        }
        Ok(Self { rows, cols, black })
    }

    /// One-pixel black rows every `spacing` rows, starting at row 0.
    pub fn horizontal_lines(rows: usize, cols: usize, spacing: usize) -> Self {
        let black = (0..rows * cols).map(|i| (i / cols).is_multiple_of(spacing)).collect();
        Self { rows, cols, black }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_black(&self, r: usize, c: usize) -> bool {
        self.black[r * self.cols + c]
    }
}

impl FromStr for GazeImage {
    type Err = LearnerError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut black = Vec::new();
        let mut cols = None;
        let mut rows = 0;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let row: Vec<bool> = line
                .chars()
                .map(|c| match c {
                    '#' => Ok(true),
                    '.' => Ok(false),
                    other => Err(LearnerError::Image { line: i + 1, msg: format!("unexpected {other:?}") }),
                })
                .collect::<Result<_, _>>()?;
            if *cols.get_or_insert(row.len()) != row.len() {
                return Err(LearnerError::Image { line: i + 1, msg: "ragged row".into() });
            }
            black.extend(row);
            rows += 1;
        }
        Self::new(rows, cols.unwrap_or(0), black)
    }
}

impl fmt::Display for GazeImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                f.write_str(if self.is_black(r, c) { "#" } else { "." })?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}

/// Image plus gaze position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GazeWorld {
    image: GazeImage,
    row: usize,
    col: usize,
}

impl GazeWorld {
    pub fn new(image: GazeImage) -> Self {
        Self { image, row: 0, col: 0 }
    }

    pub fn image(&self) -> &GazeImage {
        &self.image
    }

    pub fn position(&self) -> (usize, usize) {
        (self.row, self.col)
    }

    pub fn set_position(&mut self, row: usize, col: usize) {
        self.row = row % self.image.rows;
        self.col = col % self.image.cols;
    }

    /// Color under the gaze as a symbol id.
    pub fn read(&self) -> usize {
        if self.image.is_black(self.row, self.col) {
            BLACK
        } else {
            WHITE
        }
    }

    pub fn apply(&mut self, a: GazeAction) {
        let (dr, dc) = a.delta();
        self.row = (self.row as isize + dr).rem_euclid(self.image.rows as isize) as usize;
        self.col = (self.col as isize + dc).rem_euclid(self.image.cols as isize) as usize;
    }

    /// Dictionary over {black, white} data and the four moves.
    pub fn dictionary() -> PatternDictionary {
        PatternDictionary::new(&[
            ("black", Role::Data),
            ("white", Role::Data),
            ("right", Role::Action),
            ("below", Role::Action),
            ("left", Role::Action),
            ("up", Role::Action),
        ])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub row: usize,
    pub col: usize,
    pub color: usize,
    pub action: GazeAction,
    pub deterministic: bool,
    /// Entropy of the choice distribution, in bits.
    pub entropy_bits: f64,
}

/// Next action dictated by the dictionary for the stream tail, if any:
/// the longest matching composite prefix wins, then the earliest promotion.
pub fn dictated_action(dict: &PatternDictionary, tail: &[usize]) -> Option<GazeAction> {
    let mut best: Option<(usize, usize, GazeAction)> = None;
    for p in dict.composites() {
        for k in 1..p.expansion.len() {
            let Some(action) = symbol_action(p.expansion[k]) else { continue };
            if k <= tail.len() && tail[tail.len() - k..] == p.expansion[..k] {
                let better = match best {
                    None => true,
                    Some((bk, bid, _)) => k > bk || (k == bk && p.id < bid),
                };
                if better {
                    best = Some((k, p.id, action));
                }
            }
        }
    }
    best.map(|(_, _, a)| a)
}

/// Random walk on a frozen dictionary. Returns the action log and the
/// interleaved data/action symbol stream.
pub fn evaluate_walk(
    world: &mut GazeWorld,
    steps: usize,
    dict: &PatternDictionary,
    seed: u64,
) -> (Vec<ActionRecord>, Vec<usize>) {
    let mut rng = replicate_rng(seed, stream::LEARNER, 0);
    let start = (rng.gen_range(0..world.image.rows), rng.gen_range(0..world.image.cols));
    world.set_position(start.0, start.1);
    let max_len = dict.composites().map(|p| p.expansion.len()).max().unwrap_or(0);
    let mut symbols = Vec::with_capacity(2 * steps + 1);
    let mut log = Vec::with_capacity(steps);
    for _ in 0..steps {
        let color = world.read();
        symbols.push(color);
        let tail = &symbols[symbols.len().saturating_sub(max_len)..];
        let (action, deterministic) = match dictated_action(dict, tail) {
            Some(a) => (a, true),
            None => (GazeAction::ALL[rng.gen_range(0..4)], false),
        };
        let (row, col) = world.position();
        log.push(ActionRecord {
            row,
            col,
            color,
            action,
            deterministic,
            entropy_bits: if deterministic { 0.0 } else { 2.0 },
        });
        symbols.push(action_symbol(action));
        world.apply(action);
    }
    symbols.push(world.read());
    (log, symbols)
}

/// One epoch: walk, then promote (D,A,D) triples followed by (A,D,A)
/// triples whose lift reaches `theta`, in canonical order.
pub fn act_learn(
    world: &mut GazeWorld,
    steps: usize,
    dict: &mut PatternDictionary,
    seed: u64,
) -> (Vec<ActionRecord>, LearnReport) {
    let (log, symbols) = evaluate_walk(world, steps, dict, seed);
    let mut report = LearnReport::default();
    for role in [Role::Data, Role::Action] {
        let offset = usize::from(role == Role::Action);
        let starts: Vec<usize> = (offset..symbols.len().saturating_sub(2)).step_by(2).collect();
        if starts.is_empty() {
            continue;
        }
        let mut triples: HashMap<[usize; 3], u64> = HashMap::new();
        let mut single = [vec![0u64; dict.primitive_count()], vec![0u64; dict.primitive_count()], vec![0u64; dict.primitive_count()]];
        for &s in &starts {
            let t = [symbols[s], symbols[s + 1], symbols[s + 2]];
            *triples.entry(t).or_default() += 1;
            for k in 0..3 {
                single[k][t[k]] += 1;
            }
        }
        let n = starts.len() as f64;
        let mut keys: Vec<[usize; 3]> = triples.keys().copied().collect();
        keys.sort_unstable();
        for t in keys {
            let obs = triples[&t];
            let expected = (0..3).map(|k| single[k][t[k]] as f64 / n).product::<f64>() * n;
            let l = obs as f64 / expected;
            if obs >= dict.min_support && l >= dict.theta && dict.find(&t).is_none() {
                report.promoted.push(dict.promote(t.to_vec(), l, obs));
            }
        }
    }
    dict.recount(&symbols);
    report.pruned = dict.prune();
    (log, report)
}

/// Total decision entropy of a log, in bits.
pub fn decision_bits(log: &[ActionRecord]) -> f64 {
    log.iter().map(|r| r.entropy_bits).sum()
}

/// `kT ln 2` times the summed per-action entropy.
pub fn decision_energy(log: &[ActionRecord], ctx: &ThermalContext) -> f64 {
    decision_bits(log) * ctx.bit_energy()
}

/// Fraction of actions taken on black pixels that were dictated.
pub fn deterministic_fraction_on(log: &[ActionRecord], color: usize) -> Option<f64> {
    let on: Vec<_> = log.iter().filter(|r| r.color == color).collect();
    if on.is_empty() {
        return None;
    }
    Some(on.iter().filter(|r| r.deterministic).count() as f64 / on.len() as f64)
}
