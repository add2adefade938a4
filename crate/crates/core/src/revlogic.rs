//! Reversible gates and circuits.
//!
//! Bit vectors are packed little-endian into a `u64`: wire `i` is bit `i`.
//! A [`Circuit`] declares constant ancilla wires (filled automatically on
//! input) and garbage wires (dropped from the projected output). The input
//! wires are the non-ancilla wires and the output wires the non-garbage
//! wires, both in ascending order.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::exec::Exec;
use crate::thermo::ThermalContext;

/// Widest circuit the exhaustive checks enumerate.
pub const EXHAUSTIVE_WIDTH_CAP: usize = 20;
/// Widest circuit representable at all.
pub const MAX_WIDTH: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("wire {wire} out of range for width {width}")]
    WireOutOfRange { wire: usize, width: usize },
    #[error("gate uses wire {0} more than once")]
    RepeatedWire(usize),
    #[error("width must be between 1 and {MAX_WIDTH}, got {0}")]
    BadWidth(usize),
    #[error("expected {expected} input bits, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("width {0} exceeds the exhaustive-check cap of {EXHAUSTIVE_WIDTH_CAP}")]
    TooWideForExhaustive(usize),
    #[error("input distribution has {got} entries, expected {expected}")]
    BadDistribution { expected: usize, got: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    Not { target: usize },
    Cnot { control: usize, target: usize },
    Fredkin { control: usize, a: usize, b: usize },
}

impl Gate {
    pub fn wires(&self) -> Vec<usize> {
        match *self {
            Gate::Not { target } => vec![target],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Fredkin { control, a, b } => vec![control, a, b],
        }
    }

    pub fn is_fredkin(&self) -> bool {
        matches!(self, Gate::Fredkin { .. })
    }

    /// Checks index range and distinctness against a register width.
    pub fn validate(&self, width: usize) -> Result<(), CircuitError> {
        let wires = self.wires();
        for (i, &w) in wires.iter().enumerate() {
            if w >= width {
                return Err(CircuitError::WireOutOfRange { wire: w, width });
            }
            if wires[..i].contains(&w) {
                return Err(CircuitError::RepeatedWire(w));
            }
        }
        Ok(())
    }

    /// Applies the gate to a packed word. Wires must already be validated.
    #[inline]
    pub fn apply_word(&self, word: u64) -> u64 {
        match *self {
            Gate::Not { target } => word ^ (1 << target),
            Gate::Cnot { control, target } => word ^ (((word >> control) & 1) << target),
            Gate::Fredkin { control, a, b } => {
                let swap = (word >> control) & ((word >> a) ^ (word >> b)) & 1;
                word ^ (swap << a) ^ (swap << b)
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Not { target } => write!(f, "NOT t={target}"),
            Gate::Cnot { control, target } => write!(f, "CNOT c={control} t={target}"),
            Gate::Fredkin { control, a, b } => write!(f, "FREDKIN c={control} a={a} b={b}"),
        }
    }
}

/// Applies one gate to an unpacked bit vector.
pub fn apply_gate(gate: &Gate, bits: &[bool]) -> Result<Vec<bool>, CircuitError> {
    gate.validate(bits.len())?;
    let mut out = bits.to_vec();
    match *gate {
        Gate::Not { target } => out[target] = !out[target],
        Gate::Cnot { control, target } => out[target] ^= out[control],
        Gate::Fredkin { control, a, b } => {
            if out[control] {
                out.swap(a, b);
            }
        }
    }
    Ok(out)
}

pub fn pack(bits: &[bool]) -> u64 {
    bits.iter().enumerate().fold(0, |w, (i, &b)| w | (u64::from(b) << i))
}

pub fn unpack(word: u64, width: usize) -> Vec<bool> {
    (0..width).map(|i| (word >> i) & 1 == 1).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    width: usize,
    gates: Vec<Gate>,
    ancillas: BTreeMap<usize, bool>,
    garbage: BTreeSet<usize>,
}

/// Output of [`run_circuit`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitOutput {
    pub full: Vec<bool>,
    pub projected: Vec<bool>,
}

impl Circuit {
    pub fn new(width: usize) -> Result<Self, CircuitError> {
        if width == 0 || width > MAX_WIDTH {
            return Err(CircuitError::BadWidth(width));
        }
        Ok(Self {
            width,
            gates: Vec::new(),
            ancillas: BTreeMap::new(),
            garbage: BTreeSet::new(),
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self, CircuitError> {
        gate.validate(self.width)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn with_gates(mut self, gates: impl IntoIterator<Item = Gate>) -> Result<Self, CircuitError> {
        for g in gates {
            self.push(g)?;
        }
        Ok(self)
    }

    pub fn ancilla(mut self, wire: usize, value: bool) -> Result<Self, CircuitError> {
        self.check_wire(wire)?;
        self.ancillas.insert(wire, value);
        Ok(self)
    }

    pub fn garbage(mut self, wire: usize) -> Result<Self, CircuitError> {
        self.check_wire(wire)?;
        self.garbage.insert(wire);
        Ok(self)
    }

    fn check_wire(&self, wire: usize) -> Result<(), CircuitError> {
        if wire >= self.width {
            Err(CircuitError::WireOutOfRange { wire, width: self.width })
        } else {
            Ok(())
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn ancillas(&self) -> &BTreeMap<usize, bool> {
        &self.ancillas
    }

    pub fn garbage_wires(&self) -> &BTreeSet<usize> {
        &self.garbage
    }

    pub fn input_wires(&self) -> Vec<usize> {
        (0..self.width).filter(|w| !self.ancillas.contains_key(w)).collect()
    }

    pub fn output_wires(&self) -> Vec<usize> {
        (0..self.width).filter(|w| !self.garbage.contains(w)).collect()
    }

    pub fn is_fredkin_only(&self) -> bool {
        self.gates.iter().all(Gate::is_fredkin)
    }

    /// Runs the gate list on a full-width packed state.
    #[inline]
    pub fn eval_word(&self, word: u64) -> u64 {
        self.gates.iter().fold(word, |w, g| g.apply_word(w))
    }

    /// Full-width state for an input word (bit `k` = k-th input wire).
    fn embed_input(&self, inputs: &[usize], input: u64) -> u64 {
        let mut word = 0u64;
        for (&wire, &value) in &self.ancillas {
            word |= u64::from(value) << wire;
        }
        for (k, &wire) in inputs.iter().enumerate() {
            word |= ((input >> k) & 1) << wire;
        }
        word
    }

    fn gather(word: u64, wires: &[usize]) -> u64 {
        wires
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &w)| acc | (((word >> w) & 1) << k))
    }

    /// Projected output word for a packed input word.
    pub fn eval_projected(&self, input: u64) -> u64 {
        let full = self.eval_word(self.embed_input(&self.input_wires(), input));
        Self::gather(full, &self.output_wires())
    }

    /// Projected truth table over all inputs, indexed by packed input.
    pub fn truth_table(&self) -> Result<Vec<u64>, CircuitError> {
        let inputs = self.input_wires();
        if inputs.len() > EXHAUSTIVE_WIDTH_CAP {
            return Err(CircuitError::TooWideForExhaustive(inputs.len()));
        }
        let outputs = self.output_wires();
        Ok((0..1u64 << inputs.len())
            .map(|x| Self::gather(self.eval_word(self.embed_input(&inputs, x)), &outputs))
            .collect())
    }

    /// Canonical line-oriented text form.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "width {}", self.width)?;
        for (wire, value) in &self.ancillas {
            writeln!(f, "ancilla {}={}", wire, u8::from(*value))?;
        }
        for wire in &self.garbage {
            writeln!(f, "garbage {wire}")?;
        }
        for gate in &self.gates {
            writeln!(f, "{gate}")?;
        }
        Ok(())
    }
}

impl FromStr for Circuit {
    type Err = CircuitError;

    /// Parses the text form; blank lines and `#` comments are skipped.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut circuit: Option<Circuit> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: String| CircuitError::Parse { line: line_no, msg };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap_or_default();
            let rest: Vec<&str> = parts.collect();
            if head == "width" {
                if circuit.is_some() {
                    return Err(err("duplicate width".into()));
                }
                let w = parse_usize(rest.first().copied(), line_no)?;
                circuit = Some(Circuit::new(w)?);
                continue;
            }
            let c = circuit.take().ok_or_else(|| err("width must come first".into()))?;
            let next = match head {
                "ancilla" => {
                    let (k, v) = rest
                        .first()
                        .and_then(|s| s.split_once('='))
                        .ok_or_else(|| err("expected ancilla i=const".into()))?;
                    let wire = parse_usize(Some(k), line_no)?;
                    let value = match v {
                        "0" => false,
                        "1" => true,
                        _ => return Err(err(format!("ancilla constant must be 0 or 1, got {v}"))),
                    };
                    c.ancilla(wire, value)?
                }
                "garbage" => {
                    let wire = parse_usize(rest.first().copied(), line_no)?;
                    c.garbage(wire)?
                }
                "NOT" | "CNOT" | "FREDKIN" => {
                    let fields = parse_fields(&rest, line_no)?;
                    let get = |k: &str| {
                        fields
                            .get(k)
                            .copied()
                            .ok_or_else(|| err(format!("missing field {k}")))
                    };
                    let gate = match head {
                        "NOT" => Gate::Not { target: get("t")? },
                        "CNOT" => Gate::Cnot { control: get("c")?, target: get("t")? },
                        _ => Gate::Fredkin { control: get("c")?, a: get("a")?, b: get("b")? },
                    };
                    let mut c = c;
                    c.push(gate)?;
                    c
                }
                other => return Err(err(format!("unknown directive {other}"))),
            };
            circuit = Some(next);
        }
        circuit.ok_or(CircuitError::Parse { line: 0, msg: "empty circuit text".into() })
    }
}

fn parse_usize(s: Option<&str>, line: usize) -> Result<usize, CircuitError> {
    s.and_then(|v| v.parse().ok()).ok_or_else(|| CircuitError::Parse {
        line,
        msg: format!("expected a wire index, got {:?}", s.unwrap_or("")),
    })
}

fn parse_fields(parts: &[&str], line: usize) -> Result<HashMap<String, usize>, CircuitError> {
    parts
        .iter()
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| CircuitError::Parse {
                line,
                msg: format!("expected key=value, got {p}"),
            })?;
            Ok((k.to_string(), parse_usize(Some(v), line)?))
        })
        .collect()
}

/// Runs a circuit on values for its input wires.
pub fn run_circuit(circuit: &Circuit, input: &[bool]) -> Result<CircuitOutput, CircuitError> {
    let inputs = circuit.input_wires();
    if input.len() != inputs.len() {
        return Err(CircuitError::WidthMismatch { expected: inputs.len(), got: input.len() });
    }
    let full = circuit.eval_word(circuit.embed_input(&inputs, pack(input)));
    let projected = Circuit::gather(full, &circuit.output_wires());
    Ok(CircuitOutput {
        full: unpack(full, circuit.width),
        projected: unpack(projected, circuit.output_wires().len()),
    })
}

/// Result of enumerating a map on `{0,1}^W`.
#[derive(Clone, Debug, PartialEq)]
pub struct MapAnalysis {
    pub bijective: bool,
    pub image_size: u64,
    /// Size of the largest preimage.
    pub max_preimage: u64,
    /// `log2(|domain| / |image|)`.
    pub bits_erased: f64,
}

/// Enumerates `f` over every `width`-bit word.
pub fn analyze_map<F>(width: usize, f: F, exec: Exec) -> Result<MapAnalysis, CircuitError>
where
    F: Fn(u64) -> u64 + Sync + Send,
{
    if width > EXHAUSTIVE_WIDTH_CAP {
        return Err(CircuitError::TooWideForExhaustive(width));
    }
    let n = 1usize << width;
    let mut outputs = exec.map_range(n, |x| f(x as u64));
    exec.sort_unstable(&mut outputs);
    let mut image_size = 0u64;
    let mut max_preimage = 0u64;
    let mut run = 0u64;
    for (i, &v) in outputs.iter().enumerate() {
        if i == 0 || v != outputs[i - 1] {
            image_size += 1;
            run = 0;
        }
        run += 1;
        max_preimage = max_preimage.max(run);
    }
    Ok(MapAnalysis {
        bijective: image_size == n as u64 && outputs.iter().all(|&v| v < n as u64),
        image_size,
        max_preimage,
        bits_erased: width as f64 - (image_size as f64).log2(),
    })
}

/// Bijectivity of the full-width map plus the information erased by the
/// projected (garbage-dropped) map on the declared inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct BijectivityReport {
    pub bijective: bool,
    pub bits_erased: f64,
}

pub fn is_bijective(circuit: &Circuit) -> Result<BijectivityReport, CircuitError> {
    is_bijective_with(circuit, Exec::default())
}

pub fn is_bijective_with(circuit: &Circuit, exec: Exec) -> Result<BijectivityReport, CircuitError> {
    let full = analyze_map(circuit.width, |w| circuit.eval_word(w), exec)?;
    let inputs = circuit.input_wires();
    let projected = analyze_map(inputs.len(), |x| circuit.eval_projected(x), exec)?;
    Ok(BijectivityReport {
        bijective: full.bijective,
        bits_erased: projected.bits_erased,
    })
}

/// Distribution over packed input words of a circuit's input wires.
#[derive(Clone, Debug, PartialEq)]
pub enum InputDistribution {
    Uniform,
    /// One probability per packed input word; must sum to one.
    Explicit(Vec<f64>),
}

/// Minimum energy to reset the garbage wires to constants: `kT` times the
/// joint Shannon entropy (nats) of the garbage marginal.
pub fn erasure_cost(
    ctx: &ThermalContext,
    circuit: &Circuit,
    dist: &InputDistribution,
) -> Result<f64, CircuitError> {
    let inputs = circuit.input_wires();
    if inputs.len() > EXHAUSTIVE_WIDTH_CAP {
        return Err(CircuitError::TooWideForExhaustive(inputs.len()));
    }
    let n = 1usize << inputs.len();
    let probs: Vec<f64> = match dist {
        InputDistribution::Uniform => vec![1.0 / n as f64; n],
        InputDistribution::Explicit(p) if p.len() == n => p.clone(),
        InputDistribution::Explicit(p) => {
            return Err(CircuitError::BadDistribution { expected: n, got: p.len() })
        }
    };
    let garbage: Vec<usize> = circuit.garbage.iter().copied().collect();
    if garbage.is_empty() {
        return Ok(0.0);
    }
    let mut marginal: BTreeMap<u64, f64> = BTreeMap::new();
    for (x, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let full = circuit.eval_word(circuit.embed_input(&inputs, x as u64));
        *marginal.entry(Circuit::gather(full, &garbage)).or_default() += p;
    }
    let entropy: f64 = marginal.values().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum();
    Ok(ctx.kt() * entropy)
}

/// Logic primitives with Fredkin-only constructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Primitive {
    Not,
    And,
    Or,
    Xor,
    Copy,
}

impl Primitive {
    pub const ALL: [Primitive; 5] = [Primitive::Not, Primitive::And, Primitive::Or, Primitive::Xor, Primitive::Copy];

    pub fn arity(self) -> usize {
        match self {
            Primitive::Not | Primitive::Copy => 1,
            _ => 2,
        }
    }

    /// Reference truth table: input word (bit 0 = x, bit 1 = y) to output word.
    pub fn reference(self, input: u64) -> u64 {
        let x = input & 1;
        let y = (input >> 1) & 1;
        match self {
            Primitive::Not => x ^ 1,
            Primitive::And => x & y,
            Primitive::Or => x | y,
            Primitive::Xor => x ^ y,
            Primitive::Copy => x | (x << 1),
        }
    }
}

/// Fredkin-only circuit (with constant ancillas and garbage) computing a
/// primitive on its projected output.
pub fn synthesize(primitive: Primitive) -> Circuit {
    let fredkin = |control, a, b| Gate::Fredkin { control, a, b };
    let build = || -> Result<Circuit, CircuitError> {
        Ok(match primitive {
            // x=1 moves the 1-ancilla off wire 2, leaving !x there
            Primitive::Not => Circuit::new(3)?
                .ancilla(1, false)?
                .ancilla(2, true)?
                .with_gates([fredkin(0, 1, 2)])?
                .garbage(0)?
                .garbage(1)?,
            // wire 2 receives y only when x = 1
            Primitive::And => Circuit::new(3)?
                .ancilla(2, false)?
                .with_gates([fredkin(0, 1, 2)])?
                .garbage(0)?
                .garbage(1)?,
            // wire 1 keeps y when x = 0 and receives the 1-ancilla when x = 1
            Primitive::Or => Circuit::new(3)?
                .ancilla(2, true)?
                .with_gates([fredkin(0, 1, 2)])?
                .garbage(0)?
                .garbage(2)?,
            // first branch lays out (!y, y) on wires 2, 3; second swaps them when x = 1
            Primitive::Xor => Circuit::new(4)?
                .ancilla(2, true)?
                .ancilla(3, false)?
                .with_gates([fredkin(1, 2, 3), fredkin(0, 2, 3)])?
                .garbage(0)?
                .garbage(1)?
                .garbage(2)?,
            // wire 2 receives x, wire 1 keeps !x as garbage
            Primitive::Copy => Circuit::new(3)?
                .ancilla(1, true)?
                .ancilla(2, false)?
                .with_gates([fredkin(0, 1, 2)])?
                .garbage(1)?,
        })
    };
    build().expect("fixed constructions are well-formed")
}
