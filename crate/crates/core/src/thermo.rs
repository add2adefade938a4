//! Closed-form energy accounting for bit engines, generators, band
//! sequences and the near-chaos saddle expansion.
//!
//! All energies are absolute: `kT` times a quantity in nats. Use
//! [`ThermalContext::to_bits`] to express an energy in units of `kT ln 2`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;

/// Lower clamp applied to beliefs before they are used as an engine strategy.
pub const STRATEGY_CLAMP: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermoError {
    #[error("temperature scale kT must be finite and > 0, got {0}")]
    NonPositiveTemperature(f64),
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("probability pair ({0}, {1}) must lie strictly inside (0, 1)")]
    NotInterior(f64, f64),
    #[error("perturbation ({0}, {1}) must sum to zero")]
    UnbalancedPerturbation(f64, f64),
    #[error("perturbed probability {0} leaves (0, 1)")]
    OutOfDomain(f64),
    #[error("band model: {0}")]
    InvalidBandModel(&'static str),
}

/// Temperature scale fixing the energy unit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalContext {
    kt: f64,
}

impl ThermalContext {
    pub fn new(kt: f64) -> Result<Self, ThermoError> {
        if kt.is_finite() && kt > 0.0 {
            Ok(Self { kt })
        } else {
            Err(ThermoError::NonPositiveTemperature(kt))
        }
    }

    /// `kT = 1`, so energies read directly in nats.
    pub fn unit() -> Self {
        Self { kt: 1.0 }
    }

    pub fn kt(&self) -> f64 {
        self.kt
    }

    /// Energy of one bit, `kT ln 2`.
    pub fn bit_energy(&self) -> f64 {
        self.kt * LN_2
    }

    /// Converts an absolute energy into units of `kT ln 2`.
    pub fn to_bits(&self, energy: f64) -> f64 {
        energy / self.bit_energy()
    }

    pub fn from_bits(&self, bits: f64) -> f64 {
        bits * self.bit_energy()
    }
}

/// Free-function form of [`ThermalContext::bit_energy`].
pub fn bit_energy(ctx: &ThermalContext) -> f64 {
    ctx.bit_energy()
}

/// A two-outcome distribution `(p, 1 - p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbPair {
    first: f64,
}

impl ProbPair {
    pub fn new(first: f64) -> Result<Self, ThermoError> {
        if (0.0..=1.0).contains(&first) {
            Ok(Self { first })
        } else {
            Err(ThermoError::InvalidProbability(first))
        }
    }

    /// Builds a pair from both components, checking they sum to one.
    pub fn from_components(first: f64, second: f64) -> Result<Self, ThermoError> {
        if (first + second - 1.0).abs() > 1e-12 {
            return Err(ThermoError::InvalidProbability(first + second));
        }
        Self::new(first)
    }

    pub fn uniform() -> Self {
        Self { first: 0.5 }
    }

    pub fn first(&self) -> f64 {
        self.first
    }

    pub fn second(&self) -> f64 {
        1.0 - self.first
    }

    pub fn components(&self) -> [f64; 2] {
        [self.first, self.second()]
    }

    pub fn is_interior(&self) -> bool {
        self.first > 0.0 && self.first < 1.0
    }

    pub(crate) fn require_interior(self) -> Result<Self, ThermoError> {
        if self.is_interior() {
            Ok(self)
        } else {
            Err(ThermoError::NotInterior(self.first, self.second()))
        }
    }

    /// Clamps the first component into `[delta, 1 - delta]`.
    pub fn clamped(&self, delta: f64) -> Self {
        Self {
            first: self.first.clamp(delta, 1.0 - delta),
        }
    }
}

/// Probability that the favored outcome occurs.
pub type Belief = ProbPair;

/// Which bit value the engine treats as its favored (first) compartment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Handedness {
    FavorsZero,
    FavorsOne,
}

impl Handedness {
    /// Whether `outcome` lands in the favored compartment.
    pub fn is_favored(self, outcome: bool) -> bool {
        match self {
            Handedness::FavorsZero => !outcome,
            Handedness::FavorsOne => outcome,
        }
    }

    pub fn favored_bit(self) -> bool {
        matches!(self, Handedness::FavorsOne)
    }

    pub fn flipped(self) -> Self {
        match self {
            Handedness::FavorsZero => Handedness::FavorsOne,
            Handedness::FavorsOne => Handedness::FavorsZero,
        }
    }
}

/// An information-to-energy converter: handedness, environment prior and
/// internal strategy. Component 1 of each pair is the favored compartment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    handedness: Handedness,
    prior: ProbPair,
    strategy: ProbPair,
}

impl EngineConfig {
    pub fn new(
        handedness: Handedness,
        prior: ProbPair,
        strategy: ProbPair,
    ) -> Result<Self, ThermoError> {
        Ok(Self {
            handedness,
            prior: prior.require_interior()?,
            strategy: strategy.require_interior()?,
        })
    }

    /// Engine on a symmetric prior committing `favored` to the favored side.
    pub fn symmetric(handedness: Handedness, favored: f64) -> Result<Self, ThermoError> {
        Self::new(handedness, ProbPair::uniform(), ProbPair::new(favored)?)
    }

    pub fn handedness(&self) -> Handedness {
        self.handedness
    }

    pub fn prior(&self) -> ProbPair {
        self.prior
    }

    pub fn strategy(&self) -> ProbPair {
        self.strategy
    }

    pub fn with_handedness(mut self, handedness: Handedness) -> Self {
        self.handedness = handedness;
        self
    }
}

/// Energy change when the realized `outcome` meets the engine:
/// `kT ln(Q_i / P_i)` for the compartment `i` the outcome falls into.
pub fn outcome_yield(ctx: &ThermalContext, engine: &EngineConfig, outcome: bool) -> f64 {
    let (q, p) = if engine.handedness.is_favored(outcome) {
        (engine.strategy.first(), engine.prior.first())
    } else {
        (engine.strategy.second(), engine.prior.second())
    };
    ctx.kt * (q / p).ln()
}

/// Belief-weighted average of [`outcome_yield`] over both outcomes.
pub fn expected_yield(ctx: &ThermalContext, engine: &EngineConfig, belief: &Belief) -> f64 {
    let [q1, q2] = engine.strategy.components();
    let [p1, p2] = engine.prior.components();
    let [r1, r2] = belief.components();
    ctx.kt * (xlogy(r1, q1 / p1) + xlogy(r2, q2 / p2))
}

/// The yield-maximizing strategy, `Q = R`, clamped away from {0, 1}.
pub fn optimal_strategy(belief: &Belief) -> ProbPair {
    belief.clamped(STRATEGY_CLAMP)
}

/// Kullback-Leibler divergence `I(R|P)` in nats, with `0 ln 0 = 0`.
pub fn kl_gain(r: &ProbPair, p: &ProbPair) -> f64 {
    let [r1, r2] = r.components();
    let [p1, p2] = p.components();
    xlogy(r1, r1 / p1) + xlogy(r2, r2 / p2)
}

/// Shannon entropy of a pair in nats.
pub fn entropy_nats(r: &ProbPair) -> f64 {
    let [r1, r2] = r.components();
    // subtracting from +0.0 keeps certain outcomes at +0.0 rather than -0.0
    0.0 - (xlogy(r1, r1) + xlogy(r2, r2))
}

/// Binary entropy in bits.
pub fn binary_entropy_bits(q: f64) -> f64 {
    -(xlogy(q, q) + xlogy(1.0 - q, 1.0 - q)) / LN_2
}

/// Minimum energy a generator spends to produce a cell with belief `R`.
pub fn generator_cost(ctx: &ThermalContext, belief: &Belief) -> f64 {
    ctx.kt * entropy_nats(belief)
}

/// Saddle point of the engine yield over strategy and prior.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimaxPoint {
    pub value: f64,
    pub strategy: ProbPair,
    pub prior: ProbPair,
}

/// `min_P max_Q E = max_Q min_P E`, attained at `Q = P = R`.
pub fn minimax_value(ctx: &ThermalContext, belief: &Belief) -> Result<MinimaxPoint, ThermoError> {
    let r = belief.require_interior()?;
    let engine = EngineConfig::new(Handedness::FavorsZero, r, r)?;
    Ok(MinimaxPoint {
        value: expected_yield(ctx, &engine, &r),
        strategy: r,
        prior: r,
    })
}

/// Band sequence with mean band length `N`, measurement period `I` and a
/// per-cell error rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandModel {
    mean_band_length: f64,
    measurement_period: u32,
    error_rate: f64,
}

impl BandModel {
    pub fn new(mean_band_length: f64, measurement_period: u32, error_rate: f64) -> Result<Self, ThermoError> {
        if !(mean_band_length >= 1.0 && mean_band_length.is_finite()) {
            return Err(ThermoError::InvalidBandModel("mean band length must be >= 1"));
        }
        if measurement_period < 1 {
            return Err(ThermoError::InvalidBandModel("measurement period must be >= 1"));
        }
        if !(0.0..1.0).contains(&error_rate) {
            return Err(ThermoError::InvalidBandModel("error rate must lie in [0, 1)"));
        }
        Ok(Self {
            mean_band_length,
            measurement_period,
            error_rate,
        })
    }

    pub fn mean_band_length(&self) -> f64 {
        self.mean_band_length
    }

    pub fn measurement_period(&self) -> u32 {
        self.measurement_period
    }

    pub fn error_rate(&self) -> f64 {
        self.error_rate
    }
}

/// Energy lost per band: `(N / I + I / 2) kT ln 2`.
pub fn band_loss(ctx: &ThermalContext, model: &BandModel) -> f64 {
    band_loss_bits(model.mean_band_length, model.measurement_period) * ctx.bit_energy()
}

fn band_loss_bits(mean_band_length: f64, period: u32) -> f64 {
    let i = f64::from(period);
    mean_band_length / i + i / 2.0
}

/// Integer period minimizing [`band_loss`]: the better neighbor of `sqrt(2N)`.
pub fn optimal_measurement_period(mean_band_length: f64) -> u32 {
    let root = (2.0 * mean_band_length).sqrt();
    let lo = (root.floor() as u32).max(1);
    let hi = (root.ceil() as u32).max(1);
    if band_loss_bits(mean_band_length, hi) < band_loss_bits(mean_band_length, lo) {
        hi
    } else {
        lo
    }
}

/// Order of the per-bit loss caused by an error rate `eps`: `eps ln(1/eps)`.
pub fn small_error_loss_rate(eps: f64) -> Result<f64, ThermoError> {
    if !(0.0..1.0).contains(&eps) {
        return Err(ThermoError::InvalidProbability(eps));
    }
    if eps == 0.0 {
        return Ok(0.0);
    }
    Ok(-eps * eps.ln())
}

/// Quadratic expansion of the engine yield around the saddle `Q = P = R`
/// with `P = R + p`, `Q = R + q`.
pub fn saddle_expansion(
    ctx: &ThermalContext,
    belief: &Belief,
    p: (f64, f64),
    q: (f64, f64),
) -> Result<f64, ThermoError> {
    let r = belief.require_interior()?;
    for pert in [p, q] {
        if (pert.0 + pert.1).abs() > 1e-12 {
            return Err(ThermoError::UnbalancedPerturbation(pert.0, pert.1));
        }
    }
    let [r1, r2] = r.components();
    for v in [r1 + p.0, r2 + p.1, r1 + q.0, r2 + q.1] {
        if !(v > 0.0 && v < 1.0) {
            return Err(ThermoError::OutOfDomain(v));
        }
    }
    Ok(ctx.kt * ((p.0 * p.0 - q.0 * q.0) / (2.0 * r1) + (p.1 * p.1 - q.1 * q.1) / (2.0 * r2)))
}

/// Grid of interior probabilities `k / steps` for `k = 1..steps`.
pub fn probability_grid(steps: usize) -> Vec<f64> {
    (1..steps).map(|k| k as f64 / steps as f64).collect()
}

/// Grid point maximizing [`expected_yield`] over the strategy, with the
/// prior fixed. Returns `(Q1, value)`.
pub fn grid_best_strategy(
    ctx: &ThermalContext,
    prior: &ProbPair,
    belief: &Belief,
    grid: &[f64],
    exec: Exec,
) -> Option<(f64, f64)> {
    let (idx, value) = exec.argmax_range(grid.len(), |k| {
        strategy_value(ctx, prior, belief, grid[k])
    })?;
    Some((grid[idx], value))
}

fn strategy_value(ctx: &ThermalContext, prior: &ProbPair, belief: &Belief, q1: f64) -> f64 {
    match EngineConfig::new(Handedness::FavorsZero, *prior, ProbPair { first: q1 }) {
        Ok(engine) => expected_yield(ctx, &engine, belief),
        Err(_) => f64::NAN,
    }
}

/// Nested grid optimization `min_P max_Q E(Q, P)` over the same grid for
/// both arguments. Returns `(value, Q1, P1)`.
pub fn grid_minimax(
    ctx: &ThermalContext,
    belief: &Belief,
    grid: &[f64],
    exec: Exec,
) -> (f64, f64, f64) {
    let per_prior = exec.map_slice(grid, |&p1| {
        let prior = ProbPair { first: p1 };
        let mut best = (f64::NEG_INFINITY, 0.0);
        for &q1 in grid {
            let v = strategy_value(ctx, &prior, belief, q1);
            if v > best.0 {
                best = (v, q1);
            }
        }
        (best.0, best.1, p1)
    });
    per_prior
        .into_iter()
        .fold((f64::INFINITY, 0.0, 0.0), |acc, cand| if cand.0 < acc.0 { cand } else { acc })
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}
