//! Acceptance suite: one line per criterion, with every tolerance pinned
//! below. Criteria listed in `EXPECTED_FAIL` are reported as FAIL without
//! failing the run; if one of them starts passing the run fails so the list
//! gets updated.

use std::collections::HashSet;
use std::path::{Path as FsPath, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use infoengine::atm::{
    band_sweep, bits_to_micro, run, summarize, sweep_argmin, trace_csv, AtmConfig, BandEvalConfig, DecisionTable,
    Move, StepEvent, WorldGenerator, MICRO_PER_BIT,
};
use infoengine::learner::{
    act_learn, decision_energy, deterministic_fraction_on, evaluate_walk, GazeImage, GazeWorld, BLACK,
};
use infoengine::refinery::{
    avg_objective, optimize_trajectory, uniformity_defect, RefinerKind, RegisterVector, SampleCovariance,
    SearchBudget, SwapStep, Trajectory,
};
use infoengine::revlogic::{erasure_cost, is_bijective, synthesize, Circuit, Gate, InputDistribution, Primitive};
use infoengine::rng::{stream_rng, Rng};
use infoengine::terrain::{
    brute_force_path, entropy_functional, flow_invariant, integrate, plan, CandidateGrid, Point, RobotParams,
    TerrainField,
};
use infoengine::thermo::{
    band_loss, expected_yield, generator_cost, grid_best_strategy, grid_minimax, kl_gain, outcome_yield,
    probability_grid, saddle_expansion, BandModel, EngineConfig, Handedness, ProbPair,
};
use infoengine::{Exec, ThermalContext};
use nalgebra::DMatrix;
use rand::Rng as _;

const SEED: u64 = 20_240_611;
const EXPECTED_FAIL: &[u32] = &[6];

// 1
const KL_ZERO_TOL: f64 = 1e-12;
const KL_SAMPLES: usize = 10_000;
const YIELD_GRID_STEPS: usize = 1000;
const SUITE1_BUDGET: Duration = Duration::from_secs(5);
// 2
const CONJUGACY_TOL: f64 = 1e-12;
// 3
const MINIMAX_GRID_STEPS: usize = 200;
const MINIMAX_TOL: f64 = 1e-5;
// 4
const BAND_MAX_N: u32 = 10_000;
const BAND_SIM_N: f64 = 50.0;
const BAND_SIM_STEPS: u64 = 100_000;
const BAND_SIM_REPLICATES: u32 = 16;
const BAND_SIM_TARGET: u32 = 10;
const BAND_SIM_SLACK: u32 = 1;
// 5
const HAMMING_PAIRS: usize = 10_000;
// 6
const REFINERY_REL_GAP: f64 = 0.02;
const REFINERY_INSTANCES: usize = 40;
const IDENTITY_INSTANCES: usize = 1000;
const IDENTITY_TOL: f64 = 1e-12;
const BLOCK_DEFECT_EXPECTED: f64 = 2.0;
// 7
const ATM_STEPS: u64 = 100_000;
const ATM_MIN_NET_BITS: f64 = 0.6;
const DEATH_HORIZON_FACTOR: f64 = 2.0;
// 8
const FIRST_COMPOSITE: &str = "black-right-black";
const MIN_DETERMINISTIC_BLACK: f64 = 0.9;
const MAX_TRAINED_ENERGY_RATIO: f64 = 0.5;
// 9
const REVERSIBILITY_TOL: f64 = 1e-10;
const FLOW_DRIFT_MAX: f64 = 1e-4;
const FLOW_HALVING_RANGE: (f64, f64) = (3.0, 5.0);
const HARMONIC_PLAN_TOL: f64 = 1e-4;
const BRUTE_TOL: f64 = 1e-5;
// 10
const SADDLE_CONFIGS: usize = 50;
const SADDLE_HALVINGS: usize = 5;
const SADDLE_LIMIT_TOL: f64 = 1e-3;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn configs() -> PathBuf {
    FsPath::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn pair(x: f64) -> ProbPair {
    ProbPair::new(x).unwrap()
}

fn interior(rng: &mut Rng) -> f64 {
    rng.gen_range(0.001..0.999)
}

fn gibbs_kl() -> Verdict {
    let start = Instant::now();
    let ctx = ThermalContext::unit();
    let grid = probability_grid(YIELD_GRID_STEPS);
    let cell = 1.0 / YIELD_GRID_STEPS as f64;
    let mut rng = stream_rng(SEED, 101);
    let (mut negative, mut self_nonzero, mut separated_zero, mut off_cell) = (0, 0, 0, 0);
    for _ in 0..KL_SAMPLES {
        let (r, p) = (pair(interior(&mut rng)), pair(interior(&mut rng)));
        let kl = kl_gain(&r, &p);
        negative += usize::from(kl < 0.0);
        self_nonzero += usize::from(kl_gain(&r, &r).abs() >= KL_ZERO_TOL);
        // Pinsker: KL >= 2 (r - p)^2, so a gap of 1e-5 must clear the zero band
        if (r.first() - p.first()).abs() > 1e-5 && kl < KL_ZERO_TOL {
            separated_zero += 1;
        }
        let (q, _) = grid_best_strategy(&ctx, &p, &r, &grid, Exec::Sequential).unwrap();
        off_cell += usize::from((q - r.first()).abs() > cell + 1e-12);
    }
    let elapsed = start.elapsed();
    Verdict::new(
        negative + self_nonzero + separated_zero + off_cell == 0 && elapsed < SUITE1_BUDGET,
        format!(
            "{KL_SAMPLES} pairs: negative {negative}, KL(R,R)!=0 {self_nonzero}, zero at R!=P {separated_zero}, \
             argmax off-cell {off_cell}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn conjugacy() -> Verdict {
    let mut rng = stream_rng(SEED, 102);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let kt = rng.gen_range(0.1..10.0);
        let ctx = ThermalContext::new(kt).unwrap();
        let r = pair(interior(&mut rng));
        let engine = EngineConfig::new(Handedness::FavorsZero, ProbPair::uniform(), r).unwrap();
        let e_max = expected_yield(&ctx, &engine, &r);
        let e_min = generator_cost(&ctx, &r);
        worst = worst.max(((e_max + e_min) - ctx.bit_energy()).abs() / kt);
    }
    Verdict::new(worst < CONJUGACY_TOL, format!("1000 beliefs: max |E_max + E_min - kT ln2| / kT = {worst:.2e}"))
}

fn minimax() -> Verdict {
    let ctx = ThermalContext::unit();
    let grid = probability_grid(MINIMAX_GRID_STEPS);
    let step = 1.0 / MINIMAX_GRID_STEPS as f64;
    let mut rng = stream_rng(SEED, 103);
    let (mut worst, mut misplaced): (f64, usize) = (0.0, 0);
    for _ in 0..20 {
        let r = rng.gen_range(step..1.0 - step);
        let (value, q, p) = grid_minimax(&ctx, &pair(r), &grid, Exec::default());
        worst = worst.max(value.abs());
        misplaced += usize::from(q != p || (q - r).abs() > step);
    }
    Verdict::new(
        worst < MINIMAX_TOL && misplaced == 0,
        format!("{0}x{0} grid, 20 beliefs: max |value| {worst:.2e}, saddle off Q=P~R {misplaced}", grid.len()),
    )
}

fn band_model() -> Verdict {
    let ctx = ThermalContext::unit();
    let mut bad = Vec::new();
    for n in 1..=BAND_MAX_N {
        let nf = f64::from(n);
        // I > 2N + 1 costs more than I/2 > N + 1/2 = loss(1)
        let best = (1..=2 * n + 1)
            .map(|i| (i, band_loss(&ctx, &BandModel::new(nf, i, 0.0).unwrap())))
            .fold((0, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc })
            .0;
        let root = (2.0 * nf).sqrt();
        if best != root.floor() as u32 && best != root.ceil() as u32 {
            bad.push(n);
        }
    }
    let periods: Vec<u32> = (1..=20).collect();
    let cfg = BandEvalConfig { replicates: BAND_SIM_REPLICATES, ..BandEvalConfig::default() };
    let reports = band_sweep(&ctx, BAND_SIM_N, &periods, BAND_SIM_STEPS, SEED, &cfg).unwrap();
    let sim = sweep_argmin(&reports).unwrap();
    let sim_ok = sim.abs_diff(BAND_SIM_TARGET) <= BAND_SIM_SLACK;
    Verdict::new(
        bad.is_empty() && sim_ok,
        format!(
            "exhaustive I* off {{floor,ceil}}(sqrt 2N) for {} of {BAND_MAX_N} N; simulated argmin at N=50 is I={sim} \
             ({BAND_SIM_REPLICATES} x {BAND_SIM_STEPS} steps)",
            bad.len()
        ),
    )
}

fn random_gate(rng: &mut Rng, width: usize, fredkin_only: bool) -> Gate {
    let mut wires: Vec<usize> = Vec::with_capacity(3);
    while wires.len() < 3 {
        let w = rng.gen_range(0..width);
        if !wires.contains(&w) {
            wires.push(w);
        }
    }
    match if fredkin_only { 2 } else { rng.gen_range(0..3) } {
        0 => Gate::Not { target: wires[0] },
        1 => Gate::Cnot { control: wires[0], target: wires[1] },
        _ => Gate::Fredkin { control: wires[0], a: wires[1], b: wires[2] },
    }
}

fn random_circuit(rng: &mut Rng, width: usize, fredkin_only: bool) -> Circuit {
    let gates: Vec<Gate> = (0..rng.gen_range(1..=20)).map(|_| random_gate(rng, width, fredkin_only)).collect();
    Circuit::new(width).unwrap().with_gates(gates).unwrap()
}

fn reversible_logic() -> Verdict {
    let mismatched: Vec<String> = Primitive::ALL
        .iter()
        .filter(|&&p| {
            let c = synthesize(p);
            let reference: Vec<u64> = (0..1u64 << p.arity()).map(|x| p.reference(x)).collect();
            !c.is_fredkin_only() || c.truth_table().unwrap() != reference
        })
        .map(|p| format!("{p:?}"))
        .collect();
    let mut rng = stream_rng(SEED, 105);
    let mut weight_broken = 0;
    for _ in 0..HAMMING_PAIRS {
        let width = rng.gen_range(3..=16);
        let c = random_circuit(&mut rng, width, true);
        let x = rng.gen::<u64>() & ((1u64 << width) - 1);
        weight_broken += usize::from(c.eval_word(x).count_ones() != x.count_ones());
    }
    let ctx = ThermalContext::unit();
    let mut nonzero_cost = 0;
    for k in 0..200 {
        let width = rng.gen_range(3..=10);
        let c = random_circuit(&mut rng, width, k % 2 == 0);
        let bijective = is_bijective(&c).unwrap().bijective;
        let cost = erasure_cost(&ctx, &c, &InputDistribution::Uniform).unwrap();
        nonzero_cost += usize::from(!bijective || cost != 0.0);
    }
    Verdict::new(
        mismatched.is_empty() && weight_broken == 0 && nonzero_cost == 0,
        format!(
            "primitives mismatching {mismatched:?}; weight changed on {weight_broken} of {HAMMING_PAIRS}; \
             garbage-free circuits with nonzero cost {nonzero_cost} of 200"
        ),
    )
}

/// `U` as the product of the per-step matrices, last step leftmost.
fn trajectory_matrix(traj: &Trajectory, n: usize) -> DMatrix<f64> {
    let psi = RegisterVector::new(vec![false; n]);
    traj.steps.iter().fold(DMatrix::identity(n, n), |u, step| {
        let m = step.matrix(&psi).unwrap();
        DMatrix::from_fn(n, n, |i, j| f64::from(m[i][j])) * u
    })
}

fn permutation_matrix(perm: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(perm.len(), perm.len(), |i, j| if perm[i] == j { 1.0 } else { 0.0 })
}

/// `Tr(H U Q Uᵀ)` with `H = ½(C + Cᵀ)`, `(Cψ)_i = ψ_{i−1}`.
fn oracle_objective(samples: &[RegisterVector], u: &DMatrix<f64>) -> f64 {
    let n = u.nrows();
    let mut q = DMatrix::<f64>::zeros(n, n);
    for s in samples {
        let v = DMatrix::from_fn(n, 1, |i, _| f64::from(u8::from(s.bits()[i])));
        q += &v * v.transpose();
    }
    q /= samples.len() as f64;
    let c = DMatrix::from_fn(n, n, |i, j| if j == (i + n - 1) % n { 1.0 } else { 0.0 });
    let h = (&c + c.transpose()) * 0.5;
    (h * u * q * u.transpose()).trace()
}

fn random_samples(rng: &mut Rng, n: usize, m: usize) -> Vec<RegisterVector> {
    let density = rng.gen_range(0.1..0.9);
    (0..m).map(|_| RegisterVector::new((0..n).map(|_| rng.gen::<f64>() < density).collect())).collect()
}

fn refinery_oracle() -> Verdict {
    let mut rng = stream_rng(SEED, 106);
    let mut gap_failures = Vec::new();
    let mut worst_gap: f64 = 0.0;
    for inst in 0..REFINERY_INSTANCES {
        let n = rng.gen_range(3..=8);
        let m = rng.gen_range(1..=32);
        let samples = random_samples(&mut rng, n, m);
        let mut perms: HashSet<Vec<usize>> = HashSet::from([(0..n).collect()]);
        for _ in 0..3 {
            let next: Vec<Vec<usize>> = perms
                .iter()
                .flat_map(|p| {
                    (0..n).flat_map(move |x| {
                        (x + 1..n).map(move |y| {
                            let mut q = p.clone();
                            q.swap(x, y);
                            q
                        })
                    })
                })
                .collect();
            perms.extend(next);
        }
        let optimum = perms
            .iter()
            .map(|p| oracle_objective(&samples, &permutation_matrix(p)))
            .fold(f64::NEG_INFINITY, f64::max);
        let out = optimize_trajectory(&samples, 3, SearchBudget::default(), SEED + inst as u64).unwrap();
        let found = oracle_objective(&samples, &trajectory_matrix(&out.trajectory, n));
        let gap = if optimum > 0.0 { (optimum - found) / optimum } else { optimum - found };
        worst_gap = worst_gap.max(gap);
        if out.trajectory.len() > 3 || gap > REFINERY_REL_GAP || found > optimum + 1e-12 {
            gap_failures.push(inst);
        }
    }

    let mut worst_identity: f64 = 0.0;
    for _ in 0..IDENTITY_INSTANCES {
        let n = rng.gen_range(2..=16);
        let m = rng.gen_range(1..=32);
        let samples = random_samples(&mut rng, n, m);
        let steps = (0..rng.gen_range(0..=6))
            .map(|_| {
                let x = rng.gen_range(0..n);
                let y = (x + rng.gen_range(1..n)) % n;
                SwapStep::Schedule { x, y, apply: rng.gen() }
            })
            .collect();
        let traj = Trajectory::new(steps);
        let z_bar = samples.iter().map(|s| uniformity_defect(&traj.apply(s).unwrap())).sum::<f64>() / m as f64;
        let cov = SampleCovariance::from_samples(&samples).unwrap();
        worst_identity = worst_identity.max((z_bar - (cov.trace() - avg_objective(&cov, &traj).unwrap())).abs());
    }

    let block = uniformity_defect(&RegisterVector::from_str_bits("11100").unwrap());
    Verdict::new(
        gap_failures.is_empty() && worst_identity < IDENTITY_TOL && block == BLOCK_DEFECT_EXPECTED,
        format!(
            "worst gap to exhaustive optimum {:.3}% over {REFINERY_INSTANCES} instances (failures {gap_failures:?}); \
             max |Zbar - (TrQ - F)| {worst_identity:.1e}; Z([1,1,1,0,0]) = {block} (required {BLOCK_DEFECT_EXPECTED})",
            100.0 * worst_gap
        ),
    )
}

/// Checks every step of a trace against the ledger identity, and the CSV
/// rendering against the events, in integer micro-bits.
fn ledger_errors(initial: i64, trace: &[StepEvent], csv: &str) -> usize {
    let parse = |s: &str| -> i64 {
        let neg = s.starts_with('-');
        let (whole, frac) = s.trim_start_matches('-').split_once('.').unwrap();
        let v = whole.parse::<i64>().unwrap() * MICRO_PER_BIT + frac.parse::<i64>().unwrap();
        if neg {
            -v
        } else {
            v
        }
    };
    let mut errors = 0;
    let mut balance = initial;
    for (e, line) in trace.iter().zip(csv.lines().skip(1)) {
        let cols: Vec<&str> = line.split(',').collect();
        let expected_out = (-e.engine).max(0) + e.decision_cost + e.overhead + e.spill;
        let ok = cols.len() == 8
            && e.e_in == e.engine.max(0)
            && e.e_out == expected_out
            && e.balance == balance + e.e_in - e.e_out
            && parse(cols[4]) == e.e_in
            && parse(cols[5]) == e.e_out
            && parse(cols[7]) == e.balance;
        errors += usize::from(!ok);
        balance = e.balance;
    }
    let s = summarize(initial, trace);
    errors += usize::from(s.final_balance != initial + s.understanding - s.action - s.spilled);
    errors + usize::from(csv.lines().count() != trace.len() + 1)
}

fn atm_ledger() -> Verdict {
    let engine = EngineConfig::new(Handedness::FavorsZero, ProbPair::uniform(), pair(0.95)).unwrap();
    let band = AtmConfig::passive(RefinerKind::DelayXor, engine, 100.0);
    let band_run = run(&band, 1, WorldGenerator::band(20.0), ATM_STEPS, SEED).unwrap();
    let mut world = infoengine::atm::MemoryWorld::new(1, WorldGenerator::band(20.0), SEED).unwrap();
    let band_csv = trace_csv(&world, &band_run.trace);
    let mut errors = ledger_errors(band.initial_balance, &band_run.trace, &band_csv);

    let mut active = AtmConfig::passive(RefinerKind::DelayXor, engine, 50.0);
    active.decisions = DecisionTable::new(1, 4, vec![0b0001, 0b1000]).unwrap();
    active.default_motion = vec![Move::RIGHT, Move::UP];
    active.overhead = bits_to_micro(0.05);
    active.capacity = Some(bits_to_micro(60.0));
    let active_run = run(&active, 2, WorldGenerator::band_with_noise(8.0, 0.05), 20_000, SEED).unwrap();
    world = infoengine::atm::MemoryWorld::new(2, WorldGenerator::band_with_noise(8.0, 0.05), SEED).unwrap();
    errors += ledger_errors(active.initial_balance, &active_run.trace, &trace_csv(&world, &active_run.trace));

    let net = band_run.summary.mean_net_bits_per_step;

    let out = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_infoengine"))
        .args(["atm-run", "--seed", &SEED.to_string(), "--config"])
        .arg(configs().join("atm_fair_overhead.ini"))
        .arg("--out")
        .arg(out.path())
        .output()
        .unwrap()
        .status;
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.path().join("summary.json")).unwrap()).unwrap();
    let death = summary["death_step"].as_u64();
    // fair tape: the refined symbol is a fair coin, so the drain is overhead minus the mean engine yield
    let fair = EngineConfig::new(Handedness::FavorsZero, ProbPair::uniform(), ProbPair::uniform()).unwrap();
    let unit = ThermalContext::unit();
    let mean_yield = 0.5 * (outcome_yield(&unit, &fair, false) + outcome_yield(&unit, &fair, true)) / unit.bit_energy();
    let horizon = 100.0 / (0.01 - mean_yield);
    let died_in_time = death.is_some_and(|d| (d + 1) as f64 <= DEATH_HORIZON_FACTOR * horizon);
    let fair_trace = std::fs::read_to_string(out.path().join("trace.csv")).unwrap();
    let fair_rows = fair_trace.lines().count().saturating_sub(1);

    Verdict::new(
        errors == 0 && net >= ATM_MIN_NET_BITS && status.code() == Some(4) && died_in_time,
        format!(
            "ledger mismatches {errors}; band N=20 mean net {net:.4} bit/step over {ATM_STEPS}; fair tape exit {:?}, \
             death after {} steps ({fair_rows} trace rows) vs predicted horizon {horizon:.0}",
            status.code(),
            death.map_or("-".into(), |d| (d + 1).to_string())
        ),
    )
}

fn learner() -> Verdict {
    let image: GazeImage = std::fs::read_to_string(configs().join("lines.txt")).unwrap().parse().unwrap();
    let mut world = GazeWorld::new(image);
    let mut dict = GazeWorld::dictionary().with_theta(3.0);
    let mut promoted = Vec::new();
    for _ in 0..3 {
        let (_, report) = act_learn(&mut world, 5000, &mut dict, SEED);
        promoted.extend(report.promoted);
    }
    let first = promoted.first().map(|&id| dict.name_of(id)).unwrap_or_default();
    let eval_seed = SEED ^ 0x5eed;
    let (trained, _) = evaluate_walk(&mut world, 10_000, &dict, eval_seed);
    let (untrained, _) = evaluate_walk(&mut world, 10_000, &GazeWorld::dictionary(), eval_seed);
    let ctx = ThermalContext::unit();
    let fraction = deterministic_fraction_on(&trained, BLACK).unwrap_or(0.0);
    let ratio = decision_energy(&trained, &ctx) / decision_energy(&untrained, &ctx);
    Verdict::new(
        first == FIRST_COMPOSITE && fraction > MIN_DETERMINISTIC_BLACK && ratio <= MAX_TRAINED_ENERGY_RATIO,
        format!("first composite {first}; deterministic on black {fraction:.3}; trained/untrained energy {ratio:.2e}"),
    )
}

fn reversibility(field: &TerrainField, params: &RobotParams, x0: Point, x1: Point, steps: usize) -> f64 {
    let fwd = integrate(2, 0.0, x0, x1, steps, field, params).unwrap();
    let n = fwd.samples.len();
    let back = integrate(2, 0.0, fwd.samples[n - 1], fwd.samples[n - 2], steps, field, params).unwrap();
    let end = back.samples[n - 1];
    (end[0] - x0[0]).abs().max((end[1] - x0[1]).abs())
}

fn harmonic_drift(dt: f64, steps: usize) -> f64 {
    let field = TerrainField::Harmonic { k: 1.0, center: [0.0, 0.0] };
    let params = RobotParams::new(1.0, 1.0, 1.0, 0.0, dt).unwrap();
    let path = integrate(1, 0.0, [1.0, 0.0], [1.0, 0.0], steps, &field, &params).unwrap();
    flow_invariant(&path, &field, &params).unwrap().drift
}

fn terrain() -> Verdict {
    let harmonic = TerrainField::Harmonic { k: 1.0, center: [0.0, 0.0] };
    let bumps = TerrainField::GaussianMixture(vec![
        infoengine::terrain::Bump { amplitude: 2.0, center: [0.5, 0.2], width: 0.6 },
        infoengine::terrain::Bump { amplitude: -1.0, center: [-0.4, 0.3], width: 0.4 },
    ]);
    let p = RobotParams::new(1.0, 1.0, 1.0, 0.0, 1e-3).unwrap();
    let rev = reversibility(&harmonic, &p, [1.0, 0.0], [1.0, 1e-3], 10_000)
        .max(reversibility(&bumps, &p, [0.1, -0.2], [0.1003, -0.1995], 10_000));

    let d1 = harmonic_drift(1e-3, 10_000);
    let d2 = harmonic_drift(5e-4, 20_000);
    let halving = d1 / d2;

    let params = RobotParams::new(1.0, 1.0, 1.0, 5.0, 1e-3).unwrap();
    let planned = plan(1, [1.0, 0.0], [0.5, 0.0], 0.0, 1.5, &harmonic, &params).unwrap();
    let b = (0.5 - 1.5f64.cos()) / 1.5f64.sin();
    let plan_err = planned
        .path
        .samples
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let t = planned.path.time(k);
            (x[0] - (t.cos() + b * t.sin())).abs()
        })
        .fold(0.0, f64::max);

    let mut rng = stream_rng(SEED, 109);
    let mut beaten = 0;
    let mut worst_margin = f64::INFINITY;
    for inst in 0..20 {
        let dim = 1 + inst % 2;
        let interior = rng.gen_range(1..=if dim == 1 { 5 } else { 4 });
        let field = match inst % 3 {
            0 => TerrainField::Harmonic { k: rng.gen_range(0.5..2.0), center: [rng.gen_range(-1.0..1.0), 0.0] },
            1 => TerrainField::Linear { offset: 1.0, slope: [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)] },
            _ => TerrainField::GaussianMixture(vec![infoengine::terrain::Bump {
                amplitude: rng.gen_range(0.2..1.0),
                center: [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                width: 1.0,
            }]),
        };
        let y = |rng: &mut Rng| if dim == 2 { rng.gen_range(-1.0..1.0) } else { 0.0 };
        let start = [rng.gen_range(-1.0..1.0), y(&mut rng)];
        let goal = [rng.gen_range(-1.0..1.0), y(&mut rng)];
        let t1 = rng.gen_range(0.3..1.0);
        let dt = t1 / (interior + 1) as f64;
        let params = RobotParams::new(1.0, 1.0, 1.0, 0.0, dt).unwrap();
        let s_plan = entropy_functional(&plan(dim, start, goal, 0.0, t1, &field, &params).unwrap().path, &field, &params)
            .unwrap();
        let spread = ((goal[0] - start[0]).powi(2) + (goal[1] - start[1]).powi(2)).sqrt().max(0.1);
        let grid = CandidateGrid::around_line(dim, start, goal, interior, 0.05 * spread);
        let (_, s_brute) = brute_force_path(dim, start, goal, 0.0, t1, &field, &params, &grid).unwrap();
        worst_margin = worst_margin.min(s_brute - s_plan);
        beaten += usize::from(s_brute < s_plan - BRUTE_TOL);
    }

    Verdict::new(
        rev < REVERSIBILITY_TOL
            && d1 < FLOW_DRIFT_MAX
            && (FLOW_HALVING_RANGE.0..=FLOW_HALVING_RANGE.1).contains(&halving)
            && plan_err < HARMONIC_PLAN_TOL
            && beaten == 0,
        format!(
            "reversal error {rev:.1e}; drift {d1:.2e} at dt=1e-3, halving ratio {halving:.3}; harmonic plan error \
             {plan_err:.1e}; brute force beats plan on {beaten} of 20 (min S_brute - S_plan {worst_margin:.2e})"
        ),
    )
}

fn saddle() -> Verdict {
    let ctx = ThermalContext::unit();
    let mut rng = stream_rng(SEED, 110);
    let mut unstable = 0;
    let mut worst_limit_err: f64 = 0.0;
    for _ in 0..SADDLE_CONFIGS {
        let r = rng.gen_range(0.1..0.9);
        let belief = pair(r);
        let (a0, b0): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let s0 = 0.05 * r.min(1.0 - r);
        let ratios: Vec<f64> = (0..=SADDLE_HALVINGS)
            .map(|k| {
                let s = s0 / f64::from(1u32 << k);
                let (p, q) = ((b0 * s, -b0 * s), (a0 * s, -a0 * s));
                let engine = EngineConfig::new(Handedness::FavorsZero, pair(r + p.0), pair(r + q.0)).unwrap();
                let exact = expected_yield(&ctx, &engine, &belief);
                let quad = saddle_expansion(&ctx, &belief, p, q).unwrap();
                let norm = (2.0 * (a0 * a0 + b0 * b0)).sqrt() * s;
                (exact - quad).abs() / norm.powi(3)
            })
            .collect();
        let diffs: Vec<f64> = ratios.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        if diffs[diffs.len() - 1] > diffs[0] / 4.0 + 1e-10 {
            unstable += 1;
        }
        // cubic term of the expansion: Σ (q³ − p³) / (3 R²)
        let norm = (2.0 * (a0 * a0 + b0 * b0)).sqrt();
        let c3 = ((a0.powi(3) - b0.powi(3)) / 3.0 * (1.0 / (r * r) - 1.0 / ((1.0 - r) * (1.0 - r)))).abs() / norm.powi(3);
        let n = ratios.len();
        let limit = 2.0 * ratios[n - 1] - ratios[n - 2];
        worst_limit_err = worst_limit_err.max((limit - c3).abs() / (1.0 + c3));
    }
    Verdict::new(
        unstable == 0 && worst_limit_err < SADDLE_LIMIT_TOL,
        format!(
            "{SADDLE_CONFIGS} configs, {SADDLE_HALVINGS} halvings: unstable ratios {unstable}; \
             max error of the extrapolated ratio against the cubic coefficient {worst_limit_err:.1e}"
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "gibbs/kl suite", gibbs_kl),
        (2, "conjugacy", conjugacy),
        (3, "minimax", minimax),
        (4, "band model", band_model),
        (5, "reversible logic", reversible_logic),
        (6, "refinery oracle", refinery_oracle),
        (7, "atm ledger", atm_ledger),
        (8, "learner", learner),
        (9, "terrain", terrain),
        (10, "saddle expansion", saddle),
    ];
    let verdicts: Vec<Verdict> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria.iter().map(|&(_, _, f)| scope.spawn(f)).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Verdict::new(false, "panicked")))
            .collect()
    });
    let mut ok = true;
    for ((id, name, _), v) in criteria.iter().zip(&verdicts) {
        let expected_fail = EXPECTED_FAIL.contains(id);
        let tag = match (v.pass, expected_fail) {
            (true, false) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (expected)",
            (true, true) => "PASS (unexpected; update EXPECTED_FAIL)",
        };
        ok &= v.pass != expected_fail;
        println!("criterion {id:>2} {name:<18} {tag}: {}", v.detail);
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
