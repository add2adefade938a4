//! Continuous resource terrain: the path entropy functional, its discrete
//! Euler-Lagrange stepper, the conserved resource flow and a shooting
//! planner.
//!
//! Points are `[x, y]`; one-dimensional problems keep `y = 0`.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;

pub type Point = [f64; 2];

pub const SHOOTING_ITERATIONS: usize = 100;
pub const SHOOTING_TOLERANCE: f64 = 1e-6;
pub const BRUTE_MAX_INTERIOR: usize = 5;
pub const BRUTE_MAX_CANDIDATES: usize = 9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TerrainError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("left the field domain at ({}, {})", .0[0], .0[1])]
    DomainExit(Point),
    #[error("shooting did not converge; best miss {best_miss:e}")]
    NoConvergence { best_miss: f64, path: Box<Path> },
    #[error("brute-force instance too large: {0}")]
    TooLarge(String),
    #[error("path needs at least {needed} samples, got {got}")]
    PathTooShort { needed: usize, got: usize },
    #[error("grid line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub amplitude: f64,
    pub center: Point,
    pub width: f64,
}

/// Sampled field on a regular grid; row index runs along `y`. Interpolation is
/// tensor-product Catmull-Rom, so the gradient is continuous across cells and
/// linear data is reproduced exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    rows: usize,
    cols: usize,
    origin: Point,
    spacing: Point,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(rows: usize, cols: usize, origin: Point, spacing: Point, values: Vec<f64>) -> Result<Self, TerrainError> {
        let bad = |m: &str| Err(TerrainError::Parse { line: 1, msg: m.to_string() });
        if rows == 0 || cols < 2 || values.len() != rows * cols {
            return bad("grid needs rows >= 1, cols >= 2 and rows*cols values");
        }
        if !(spacing[0] > 0.0) || (rows > 1 && !(spacing[1] > 0.0)) {
            return bad("grid spacing must be positive");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return bad("grid values must be finite");
        }
        Ok(Self { rows, cols, origin, spacing, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    /// Cell index and fractional offset along one axis.
    fn locate(&self, v: f64, axis: usize, n: usize, p: Point) -> Result<(usize, f64), TerrainError> {
        let u = (v - self.origin[axis]) / self.spacing[axis];
        let last = (n - 1) as f64;
        if !(0.0..=last).contains(&u) {
            return Err(TerrainError::DomainExit(p));
        }
        let i = (u.floor() as usize).min(n - 2);
        Ok((i, u - i as f64))
    }

    /// Node value with linear extrapolation one node past each edge.
    fn node(&self, r: isize, c: isize) -> f64 {
        // (inner, mirror): value is 2*inner - mirror outside the grid, inner otherwise
        let edge = |i: isize, n: usize| -> (usize, Option<usize>) {
            let last = n as isize - 1;
            if i < 0 {
                (0, Some(1))
            } else if i > last {
                (last as usize, Some(last as usize - 1))
            } else {
                (i as usize, None)
            }
        };
        let (c0, c1) = edge(c, self.cols);
        let col = |r: usize| match c1 {
            None => self.at(r, c0),
            Some(m) => 2.0 * self.at(r, c0) - self.at(r, m),
        };
        if self.rows == 1 {
            return col(0);
        }
        match edge(r, self.rows) {
            (r0, None) => col(r0),
            (r0, Some(m)) => 2.0 * col(r0) - col(m),
        }
    }

    fn eval(&self, p: Point) -> Result<(f64, Point), TerrainError> {
        let (c, fx) = self.locate(p[0], 0, self.cols, p)?;
        let (wx, dx) = catmull_rom(fx);
        if self.rows == 1 {
            let (mut v, mut g) = (0.0, 0.0);
            for j in 0..4 {
                let n = self.node(0, c as isize + j as isize - 1);
                v += wx[j] * n;
                g += dx[j] * n;
            }
            return Ok((v, [g / self.spacing[0], 0.0]));
        }
        let (r, fy) = self.locate(p[1], 1, self.rows, p)?;
        let (wy, dy) = catmull_rom(fy);
        let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                let n = self.node(r as isize + i as isize - 1, c as isize + j as isize - 1);
                v += wy[i] * wx[j] * n;
                gx += wy[i] * dx[j] * n;
                gy += dy[i] * wx[j] * n;
            }
        }
        Ok((v, [gx / self.spacing[0], gy / self.spacing[1]]))
    }
}

/// Catmull-Rom weights and their derivatives for nodes `-1, 0, 1, 2` at offset `t`.
fn catmull_rom(t: f64) -> ([f64; 4], [f64; 4]) {
    let (t2, t3) = (t * t, t * t * t);
    (
        [(-t3 + 2.0 * t2 - t) / 2.0, (3.0 * t3 - 5.0 * t2 + 2.0) / 2.0, (-3.0 * t3 + 4.0 * t2 + t) / 2.0, (t3 - t2) / 2.0],
        [(-3.0 * t2 + 4.0 * t - 1.0) / 2.0, (9.0 * t2 - 10.0 * t) / 2.0, (-9.0 * t2 + 8.0 * t + 1.0) / 2.0, (3.0 * t2 - 2.0 * t) / 2.0],
    )
}

impl FromStr for GridField {
    type Err = TerrainError;

    /// Header `rows cols x0 y0 dx dy`, then `rows * cols` values.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
        let (hline, header) = lines.next().ok_or(TerrainError::Parse { line: 1, msg: "missing header".into() })?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let herr = |msg: &str| TerrainError::Parse { line: hline + 1, msg: msg.to_string() };
        if h.len() != 6 {
            return Err(herr("header must be `rows cols x0 y0 dx dy`"));
        }
        let rows: usize = h[0].parse().map_err(|_| herr("bad rows"))?;
        let cols: usize = h[1].parse().map_err(|_| herr("bad cols"))?;
        let nums: Vec<f64> = h[2..].iter().map(|s| s.parse::<f64>()).collect::<Result<_, _>>().map_err(|_| herr("bad number"))?;
        let mut values = Vec::with_capacity(rows * cols);
        for (i, line) in lines {
            for tok in line.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|_| TerrainError::Parse { line: i + 1, msg: format!("bad value {tok:?}") })?);
            }
        }
        if values.len() != rows * cols {
            return Err(herr(&format!("expected {} values, found {}", rows * cols, values.len())));
        }
        Self::new(rows, cols, [nums[0], nums[1]], [nums[2], nums[3]], values)
    }
}

/// Resource density `V`.
#[derive(Clone, Debug, PartialEq)]
pub enum TerrainField {
    Constant(f64),
    /// `V = c + g·x`.
    Linear { offset: f64, slope: Point },
    /// `V = ½ k |x − center|²`; negative `k` makes a resource pocket.
    Harmonic { k: f64, center: Point },
    GaussianMixture(Vec<Bump>),
    Grid(GridField),
}

impl TerrainField {
    pub fn value(&self, p: Point) -> Result<f64, TerrainError> {
        self.eval(p).map(|(v, _)| v)
    }

    pub fn gradient(&self, p: Point) -> Result<Point, TerrainError> {
        self.eval(p).map(|(_, g)| g)
    }

    fn eval(&self, p: Point) -> Result<(f64, Point), TerrainError> {
        Ok(match self {
            TerrainField::Constant(c) => (*c, [0.0, 0.0]),
            TerrainField::Linear { offset, slope } => (offset + slope[0] * p[0] + slope[1] * p[1], *slope),
            TerrainField::Harmonic { k, center } => {
                let d = [p[0] - center[0], p[1] - center[1]];
                (0.5 * k * (d[0] * d[0] + d[1] * d[1]), [k * d[0], k * d[1]])
            }
            TerrainField::GaussianMixture(bumps) => {
                let mut v = 0.0;
                let mut g = [0.0, 0.0];
                for b in bumps {
                    let d = [p[0] - b.center[0], p[1] - b.center[1]];
                    let w2 = b.width * b.width;
                    let e = b.amplitude * (-(d[0] * d[0] + d[1] * d[1]) / (2.0 * w2)).exp();
                    v += e;
                    g[0] -= e * d[0] / w2;
                    g[1] -= e * d[1] / w2;
                }
                (v, g)
            }
            TerrainField::Grid(grid) => grid.eval(p)?,
        })
    }
}

/// Motion difficulty `μ`, suction `ε`, temperature `T`, initial resource
/// `U₀` and time step `Δt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotParams {
    pub mu: f64,
    pub eps: f64,
    pub temperature: f64,
    pub u0: f64,
    pub dt: f64,
}

impl RobotParams {
    pub fn new(mu: f64, eps: f64, temperature: f64, u0: f64, dt: f64) -> Result<Self, TerrainError> {
        let positive = [mu, eps, temperature, dt].iter().all(|v| *v > 0.0 && v.is_finite());
        if !positive || !(u0 >= 0.0 && u0.is_finite()) {
            return Err(TerrainError::InvalidParams("mu, eps, T, dt must be > 0 and U0 >= 0".into()));
        }
        Ok(Self { mu, eps, temperature, u0, dt })
    }

    pub fn unit(dt: f64) -> Self {
        Self { mu: 1.0, eps: 1.0, temperature: 1.0, u0: 0.0, dt }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }
}

/// Samples on the uniform grid `t0 + k dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub dim: usize,
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<Point>,
}

impl Path {
    pub fn new(dim: usize, t0: f64, dt: f64, samples: Vec<Point>) -> Self {
        Self { dim, t0, dt, samples }
    }

    /// Evenly spaced straight line with `segments` steps.
    pub fn straight(dim: usize, start: Point, goal: Point, t0: f64, t1: f64, segments: usize) -> Self {
        let n = segments as f64;
        let samples = (0..=segments)
            .map(|k| {
                let s = k as f64 / n;
                [start[0] + (goal[0] - start[0]) * s, start[1] + (goal[1] - start[1]) * s]
            })
            .collect();
        Self::new(dim, t0, (t1 - t0) / n, samples)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn end(&self) -> Point {
        *self.samples.last().expect("nonempty path")
    }
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm2(a: Point) -> f64 {
    a[0] * a[0] + a[1] * a[1]
}

/// `S = Σ μ/2 |Δx/Δt|² Δt − ε Σ_trap V Δt`.
pub fn entropy_functional(path: &Path, field: &TerrainField, params: &RobotParams) -> Result<f64, TerrainError> {
    let n = path.len();
    if n < 2 {
        return Err(TerrainError::PathTooShort { needed: 2, got: n });
    }
    let dt = path.dt;
    let mut kinetic = 0.0;
    for w in path.samples.windows(2) {
        kinetic += norm2(sub(w[1], w[0]));
    }
    kinetic *= params.mu / (2.0 * dt);
    let mut potential = 0.0;
    for (k, &p) in path.samples.iter().enumerate() {
        let weight = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        potential += weight * field.value(p)?;
    }
    Ok(kinetic - params.eps * dt * potential)
}

/// `F = U₀ − T·S`.
pub fn free_energy(params: &RobotParams, s: f64) -> f64 {
    params.u0 - params.temperature * s
}

/// `x₊ = 2x − x₋ − (Δt²/μ) ε ∇V(x)`.
pub fn next_step(x_prev: Point, x_curr: Point, field: &TerrainField, params: &RobotParams) -> Result<Point, TerrainError> {
    let g = field.gradient(x_curr)?;
    let a = params.dt * params.dt * params.eps / params.mu;
    Ok([2.0 * x_curr[0] - x_prev[0] - a * g[0], 2.0 * x_curr[1] - x_prev[1] - a * g[1]])
}

/// Integrates `steps` further samples from the first two.
pub fn integrate(
    dim: usize,
    t0: f64,
    x0: Point,
    x1: Point,
    steps: usize,
    field: &TerrainField,
    params: &RobotParams,
) -> Result<Path, TerrainError> {
    let mut samples = Vec::with_capacity(steps + 2);
    samples.push(x0);
    samples.push(x1);
    for k in 0..steps {
        let mut next = next_step(samples[k], samples[k + 1], field, params)?;
        if dim == 1 {
            // motion is confined to the x axis
            next[1] = samples[k + 1][1];
        }
        samples.push(next);
    }
    Ok(Path::new(dim, t0, params.dt, samples))
}

/// Per-sample resource flow on interior samples and its spread.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowReport {
    pub series: Vec<f64>,
    /// `(max − min) / |E₀|`, or the absolute spread when `E₀ = 0`.
    pub drift: f64,
}

/// `E = μ/2 |ẋ|² + ε V` with centered velocities.
pub fn flow_invariant(path: &Path, field: &TerrainField, params: &RobotParams) -> Result<FlowReport, TerrainError> {
    let n = path.len();
    if n < 3 {
        return Err(TerrainError::PathTooShort { needed: 3, got: n });
    }
    let s = &path.samples;
    let mut series = Vec::with_capacity(n - 2);
    for k in 1..n - 1 {
        let d = sub(s[k + 1], s[k - 1]);
        let v2 = norm2(d) / (4.0 * path.dt * path.dt);
        series.push(0.5 * params.mu * v2 + params.eps * field.value(s[k])?);
    }
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    let e0 = series[0].abs();
    let drift = if e0 == 0.0 { max - min } else { (max - min) / e0 };
    Ok(FlowReport { series, drift })
}

/// Flow at every sample: centered velocities inside, one-sided at the ends.
pub fn flow_series_full(path: &Path, field: &TerrainField, params: &RobotParams) -> Result<Vec<f64>, TerrainError> {
    let n = path.len();
    if n < 2 {
        return Err(TerrainError::PathTooShort { needed: 2, got: n });
    }
    let s = &path.samples;
    (0..n)
        .map(|k| {
            let (a, b, span) = match k {
                0 => (s[0], s[1], 1.0),
                _ if k == n - 1 => (s[n - 2], s[n - 1], 1.0),
                _ => (s[k - 1], s[k + 1], 2.0),
            };
            let v2 = norm2(sub(b, a)) / (span * span * path.dt * path.dt);
            Ok(0.5 * params.mu * v2 + params.eps * field.value(s[k])?)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanOutcome {
    pub path: Path,
    pub iterations: usize,
    pub miss: f64,
}

fn segments(t0: f64, t1: f64, dt: f64) -> Result<usize, TerrainError> {
    if !(t1 > t0) {
        return Err(TerrainError::InvalidParams("t1 must exceed t0".into()));
    }
    Ok(((t1 - t0) / dt).round().max(1.0) as usize)
}

/// Shoots on the first step so the discrete trajectory lands on `goal` at
/// `t1` by Broyden's secant update on the terminal miss. The Jacobian
/// starts from finite differences and is rebuilt, followed by step
/// halving, whenever an update fails to shrink the miss. The step is
/// adjusted so `t1 − t0` is a whole number of steps.
pub fn plan(
    dim: usize,
    start: Point,
    goal: Point,
    t0: f64,
    t1: f64,
    field: &TerrainField,
    params: &RobotParams,
) -> Result<PlanOutcome, TerrainError> {
    let n = segments(t0, t1, params.dt)?;
    let params = params.with_dt((t1 - t0) / n as f64);
    field.gradient(start)?;
    field.gradient(goal)?;
    if n == 1 {
        let path = Path::new(dim, t0, params.dt, vec![start, goal]);
        return Ok(PlanOutcome { path, iterations: 0, miss: 0.0 });
    }
    let shoot = |first: Point| integrate(dim, t0, start, first, n - 1, field, &params);
    let size = |m: Point| m[0].abs().max(m[1].abs());
    let miss_of = |p: &Path| {
        let d = sub(p.end(), goal);
        if dim == 1 {
            [d[0], 0.0]
        } else {
            d
        }
    };

    let mut guess = [start[0] + (goal[0] - start[0]) / n as f64, start[1] + (goal[1] - start[1]) / n as f64];
    let path = shoot(guess)?;
    let mut miss = miss_of(&path);
    let mut best = (size(miss), path.clone());
    if best.0 <= SHOOTING_TOLERANCE {
        return Ok(PlanOutcome { path, iterations: 0, miss: best.0 });
    }

    // inverse Jacobian of the miss with respect to the first step, by forward differences
    let base_h = 1e-3 * (size(sub(goal, start)) / n as f64).max(1e-6);
    let fd_inverse = |guess: Point, miss: Point| -> Result<Option<[[f64; 2]; 2]>, TerrainError> {
        let h = (1e-2 * size(miss)).clamp(1e-10, base_h);
        let mut jac = [[0.0; 2]; 2];
        for c in 0..dim {
            let mut g = guess;
            g[c] += h;
            let m = miss_of(&shoot(g)?);
            for r in 0..dim {
                jac[r][c] = (m[r] - miss[r]) / h;
            }
        }
        if dim == 1 {
            jac[1][1] = 1.0;
        }
        Ok(invert2(jac))
    };
    let no_convergence = |best: (f64, Path)| TerrainError::NoConvergence { best_miss: best.0, path: Box::new(best.1) };
    let apply = |inv: &[[f64; 2]; 2], m: Point| [-(inv[0][0] * m[0] + inv[0][1] * m[1]), -(inv[1][0] * m[0] + inv[1][1] * m[1])];

    let mut inv = match fd_inverse(guess, miss)? {
        Some(inv) => inv,
        None => return Err(no_convergence(best)),
    };
    let mut fresh = true;
    let mut it = 0;
    while it < SHOOTING_ITERATIONS {
        it += 1;
        let step = apply(&inv, miss);
        let next = [guess[0] + step[0], guess[1] + step[1]];
        let trial = shoot(next)?;
        let next_miss = miss_of(&trial);
        let m = size(next_miss);
        if m < best.0 {
            best = (m, trial.clone());
        }
        if m <= SHOOTING_TOLERANCE {
            return Ok(PlanOutcome { path: trial, iterations: it, miss: m });
        }
        if m < size(miss) {
            // good Broyden update of the inverse
            let dm = sub(next_miss, miss);
            let inv_dm = [inv[0][0] * dm[0] + inv[0][1] * dm[1], inv[1][0] * dm[0] + inv[1][1] * dm[1]];
            let denom = step[0] * inv_dm[0] + step[1] * inv_dm[1];
            if denom != 0.0 && denom.is_finite() {
                let u = [step[0] - inv_dm[0], step[1] - inv_dm[1]];
                let v = [step[0] * inv[0][0] + step[1] * inv[1][0], step[0] * inv[0][1] + step[1] * inv[1][1]];
                for r in 0..2 {
                    for c in 0..2 {
                        inv[r][c] += u[r] * v[c] / denom;
                    }
                }
            }
            guess = next;
            miss = next_miss;
            fresh = false;
            continue;
        }
        // no progress: refresh the Jacobian at the current guess and backtrack along its Newton step
        if !fresh {
            inv = match fd_inverse(guess, miss)? {
                Some(inv) => inv,
                None => return Err(no_convergence(best)),
            };
            fresh = true;
            continue;
        }
        let step = apply(&inv, miss);
        let mut scale = 0.5;
        let mut moved = false;
        while scale > 1e-4 && it < SHOOTING_ITERATIONS {
            it += 1;
            let next = [guess[0] + scale * step[0], guess[1] + scale * step[1]];
            let trial = shoot(next)?;
            let next_miss = miss_of(&trial);
            let m = size(next_miss);
            if m < best.0 {
                best = (m, trial.clone());
            }
            if m <= SHOOTING_TOLERANCE {
                return Ok(PlanOutcome { path: trial, iterations: it, miss: m });
            }
            if m < size(miss) {
                guess = next;
                miss = next_miss;
                moved = true;
                break;
            }
            scale *= 0.5;
        }
        if !moved {
            break;
        }
        fresh = false;
    }
    Err(no_convergence(best))
}

fn invert2(m: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

/// Plans consecutive legs through `waypoints`, each taking `leg_time`.
pub fn plan_chain(
    dim: usize,
    waypoints: &[Point],
    t0: f64,
    leg_time: f64,
    field: &TerrainField,
    params: &RobotParams,
) -> Result<Vec<PlanOutcome>, TerrainError> {
    if waypoints.len() < 2 {
        return Err(TerrainError::InvalidParams("need at least two waypoints".into()));
    }
    waypoints
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let start = t0 + k as f64 * leg_time;
            plan(dim, w[0], w[1], start, start + leg_time, field, params)
        })
        .collect()
}

/// Candidate positions for each interior sample of a brute-force search.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateGrid {
    pub candidates: Vec<Vec<Point>>,
}

impl CandidateGrid {
    /// Offsets of `h` around the straight line: nine along `x` in 1D, a
    /// 3×3 stencil in 2D.
    pub fn around_line(dim: usize, start: Point, goal: Point, interior: usize, h: f64) -> Self {
        let line = Path::straight(dim, start, goal, 0.0, 1.0, interior + 1);
        let offsets: Vec<Point> = if dim == 1 {
            (-4..=4).map(|i| [i as f64 * h, 0.0]).collect()
        } else {
            (-1..=1).flat_map(|i| (-1..=1).map(move |j| [i as f64 * h, j as f64 * h])).collect()
        };
        let candidates = line.samples[1..=interior]
            .iter()
            .map(|p| offsets.iter().map(|o| [p[0] + o[0], p[1] + o[1]]).collect())
            .collect();
        Self { candidates }
    }
}

/// Exhaustive minimizer of [`entropy_functional`] over candidate paths.
#[allow(clippy::too_many_arguments)]
pub fn brute_force_path(
    dim: usize,
    start: Point,
    goal: Point,
    t0: f64,
    t1: f64,
    field: &TerrainField,
    params: &RobotParams,
    grid: &CandidateGrid,
) -> Result<(Path, f64), TerrainError> {
    brute_force_path_with(dim, start, goal, t0, t1, field, params, grid, Exec::default())
}

#[allow(clippy::too_many_arguments)]
pub fn brute_force_path_with(
    dim: usize,
    start: Point,
    goal: Point,
    t0: f64,
    t1: f64,
    field: &TerrainField,
    params: &RobotParams,
    grid: &CandidateGrid,
    exec: Exec,
) -> Result<(Path, f64), TerrainError> {
    let interior = grid.candidates.len();
    if interior > BRUTE_MAX_INTERIOR {
        return Err(TerrainError::TooLarge(format!("{interior} interior samples (max {BRUTE_MAX_INTERIOR})")));
    }
    if grid.candidates.iter().any(|c| c.is_empty() || c.len() > BRUTE_MAX_CANDIDATES) {
        return Err(TerrainError::TooLarge(format!("each sample needs 1..={BRUTE_MAX_CANDIDATES} candidates")));
    }
    if !(t1 > t0) {
        return Err(TerrainError::InvalidParams("t1 must exceed t0".into()));
    }
    let dt = (t1 - t0) / (interior + 1) as f64;
    let total: usize = grid.candidates.iter().map(Vec::len).product();
    let build = |mut idx: usize| {
        let mut samples = Vec::with_capacity(interior + 2);
        samples.push(start);
        for c in &grid.candidates {
            samples.push(c[idx % c.len()]);
            idx /= c.len();
        }
        samples.push(goal);
        Path::new(dim, t0, dt, samples)
    };
    // domain errors rank last; a path that leaves the field is never chosen
    let (best, neg_s) = exec
        .argmax_range(total, |i| entropy_functional(&build(i), field, params).map_or(f64::NAN, |s| -s))
        .ok_or(TerrainError::DomainExit(start))?;
    Ok((build(best), -neg_s))
}

/// Path CSV with columns `t,x[,y],E_flow`.
pub fn path_csv(path: &Path, field: &TerrainField, params: &RobotParams) -> Result<String, TerrainError> {
    let flow = flow_series_full(path, field, params)?;
    let mut out = String::from(if path.dim == 2 { "t,x,y,E_flow\n" } else { "t,x,E_flow\n" });
    for (k, (p, e)) in path.samples.iter().zip(flow).enumerate() {
        let _ = if path.dim == 2 {
            writeln!(out, "{},{},{},{}", path.time(k), p[0], p[1], e)
        } else {
            writeln!(out, "{},{},{}", path.time(k), p[0], e)
        };
    }
    Ok(out)
}
