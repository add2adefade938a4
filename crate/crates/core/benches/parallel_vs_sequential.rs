use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use infoengine::atm::{band_sweep_with, BandEvalConfig};
use infoengine::refinery::{optimize_trajectory_with, RegisterVector, SearchBudget};
use infoengine::revlogic::analyze_map;
use infoengine::terrain::{brute_force_path_with, CandidateGrid, RobotParams, TerrainField};
use infoengine::thermo::{grid_minimax, probability_grid, ProbPair};
use infoengine::{Exec, ThermalContext};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn samples() -> Vec<RegisterVector> {
    let mut x = 0x9e37_79b9_7f4a_7c15u64;
    (0..64)
        .map(|_| {
            RegisterVector::new(
                (0..12)
                    .map(|_| {
                        x ^= x << 13;
                        x ^= x >> 7;
                        x ^= x << 17;
                        x & 1 == 1
                    })
                    .collect(),
            )
        })
        .collect()
}

fn refinery(c: &mut Criterion) {
    let s = samples();
    let budget = SearchBudget { restarts: 16, iterations: 2000 };
    let mut g = c.benchmark_group("optimize_trajectory");
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| optimize_trajectory_with(black_box(&s), 6, budget, 1, exec).unwrap()));
    }
    g.finish();
}

fn atm(c: &mut Criterion) {
    let ctx = ThermalContext::unit();
    let cfg = BandEvalConfig { replicates: 8, ..BandEvalConfig::default() };
    let periods: Vec<u32> = (1..=20).collect();
    let mut g = c.benchmark_group("band_sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| band_sweep_with(&ctx, 50.0, black_box(&periods), 20_000, 3, &cfg, exec).unwrap()));
    }
    g.finish();
}

fn thermo(c: &mut Criterion) {
    let ctx = ThermalContext::unit();
    let belief = ProbPair::new(0.37).unwrap();
    let mut g = c.benchmark_group("grid_minimax");
    for n in [100usize, 400] {
        let grid = probability_grid(n);
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, n), &grid, |b, grid| b.iter(|| grid_minimax(&ctx, &belief, grid, exec)));
        }
    }
    g.finish();
}

fn terrain(c: &mut Criterion) {
    let field = TerrainField::Harmonic { k: -4.0, center: [0.5, 0.3] };
    let params = RobotParams::unit(0.2);
    let grid = CandidateGrid::around_line(2, [0.0, 0.0], [1.0, 0.0], 4, 0.1);
    let mut g = c.benchmark_group("brute_force_path");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| brute_force_path_with(2, [0.0, 0.0], [1.0, 0.0], 0.0, 1.0, &field, &params, black_box(&grid), exec).unwrap())
        });
    }
    g.finish();
}

fn revlogic(c: &mut Criterion) {
    let f = |x: u64| (x.wrapping_mul(0x2545_f491) >> 3) & 0xf_ffff;
    let mut g = c.benchmark_group("analyze_map");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| analyze_map(black_box(20), f, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, refinery, atm, thermo, terrain, revlogic);
criterion_main!(benches);
