use infoengine::atm::{MemoryWorld, Pos, WorldGenerator};
use infoengine::refinery::{
    avg_objective, energy_rate, format_bit_records, optimize_trajectory, parse_bit_records, stream_purity,
    uniformity_defect, RefinerKind, RegisterVector, SampleCovariance, SearchBudget, StreamRefiner, Trajectory,
};
use infoengine::rng::{stream, stream_rng};
use infoengine::ThermalContext;
use rand::Rng as _;
use serde::Serialize;

use super::{to_json, Outputs};
use crate::config::Config;
use crate::error::CliError;

#[derive(Serialize)]
struct Summary {
    samples: usize,
    width: usize,
    trace_q: f64,
    initial_f: f64,
    final_f: f64,
    mean_z_before: f64,
    mean_z_after: f64,
    trajectory_len: usize,
    stream_len: usize,
    warmup: usize,
    purity: Option<f64>,
    energy_rate_bits: Option<f64>,
}

/// `identity`, `negation`, `delay-xor`, `majority:K` or `table:K:BITS`
/// where `BITS` lists the 2^K predictions, index 0 first.
pub fn parse_refiner(spec: &str) -> Result<RefinerKind, CliError> {
    let parts: Vec<&str> = spec.trim().split(':').collect();
    let bad = || CliError::Config(format!("unknown refiner {spec:?}"));
    match parts.as_slice() {
        ["identity"] => Ok(RefinerKind::Identity),
        ["negation"] => Ok(RefinerKind::Negation),
        ["delay-xor"] => Ok(RefinerKind::DelayXor),
        ["majority", k] => Ok(RefinerKind::majority(k.parse().map_err(|_| bad())?)),
        ["table", k, bits] => {
            let table = bits
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(bad()),
                })
                .collect::<Result<Vec<_>, _>>()?;
            RefinerKind::table_predictor(k.parse().map_err(|_| bad())?, table).map_err(CliError::config)
        }
        _ => Err(bad()),
    }
}

fn samples(cfg: &Config, seed: u64) -> Result<Vec<RegisterVector>, CliError> {
    if cfg.raw("refine", "input").is_some() {
        let records = parse_bit_records(&cfg.read_file("refine", "input")?).map_err(CliError::config)?;
        return Ok(records.into_iter().map(RegisterVector::new).collect());
    }
    let count: usize = cfg.get_or("refine", "samples", 32)?;
    let width: usize = cfg.get_or("refine", "width", 8)?;
    let density: f64 = cfg.get_or("refine", "density", 0.5)?;
    if !(0.0..=1.0).contains(&density) {
        return Err(CliError::Config("density must lie in [0, 1]".into()));
    }
    let mut rng = stream_rng(seed, stream::REFINER);
    Ok((0..count).map(|_| RegisterVector::new((0..width).map(|_| rng.gen::<f64>() < density).collect())).collect())
}

fn input_stream(cfg: &Config, seed: u64) -> Result<Option<Vec<bool>>, CliError> {
    if !cfg.has_section("stream") {
        return Ok(None);
    }
    let source = cfg.string_or("stream", "source", "band");
    if source == "file" {
        let records = parse_bit_records(&cfg.read_file("stream", "input")?).map_err(CliError::config)?;
        return Ok(Some(records.concat()));
    }
    let length: i64 = cfg.get_or("stream", "length", 10_000)?;
    let generator = match source.as_str() {
        "band" => WorldGenerator::band_with_noise(cfg.get_or("stream", "band_mean", 20.0)?, cfg.get_or("stream", "noise", 0.0)?),
        "iid" => WorldGenerator::Iid(cfg.get_or("stream", "p", 0.5)?),
        other => return Err(CliError::Config(format!("unknown stream source {other:?}"))),
    };
    let mut world = MemoryWorld::new(1, generator, seed).map_err(CliError::config)?;
    Ok(Some((0..length).map(|x| world.pristine(Pos::new(x, 0))).collect()))
}

pub fn run(cfg: &Config, seed: u64) -> Result<Outputs, CliError> {
    let samples = samples(cfg, seed)?;
    let cov = SampleCovariance::from_samples(&samples).map_err(CliError::config)?;
    let budget = SearchBudget {
        restarts: cfg.get_or("refine", "restarts", SearchBudget::default().restarts)?,
        iterations: cfg.get_or("refine", "iterations", SearchBudget::default().iterations)?,
    };
    let max_len: usize = cfg.get_or("refine", "max_len", 3)?;
    let outcome = optimize_trajectory(&samples, max_len, budget, seed).map_err(CliError::runtime)?;
    let mean_z = |t: &Trajectory| -> Result<f64, CliError> {
        let total: f64 = samples
            .iter()
            .map(|s| t.apply(s).map(|r| uniformity_defect(&r)))
            .sum::<Result<f64, _>>()
            .map_err(CliError::runtime)?;
        Ok(total / samples.len() as f64)
    };

    let mut out = Outputs::default();
    out.push("trajectory.txt", outcome.trajectory.to_text());
    let sorted: Vec<Vec<bool>> = samples
        .iter()
        .map(|s| outcome.trajectory.apply(s).map(|r| r.bits().to_vec()))
        .collect::<Result<_, _>>()
        .map_err(CliError::runtime)?;
    out.push("sorted.txt", format_bit_records(&sorted));

    let mut summary = Summary {
        samples: samples.len(),
        width: cov.dim(),
        trace_q: cov.trace(),
        initial_f: avg_objective(&cov, &Trajectory::default()).map_err(CliError::runtime)?,
        final_f: outcome.objective,
        mean_z_before: mean_z(&Trajectory::default())?,
        mean_z_after: mean_z(&outcome.trajectory)?,
        trajectory_len: outcome.trajectory.len(),
        stream_len: 0,
        warmup: 0,
        purity: None,
        energy_rate_bits: None,
    };
    if let Some(xs) = input_stream(cfg, seed)? {
        let kind = parse_refiner(&cfg.string_or("stream", "refiner", "delay-xor"))?;
        let refined = StreamRefiner::new(kind).refine_stream(&xs);
        let q = stream_purity(&refined).map_err(CliError::runtime)?;
        summary.stream_len = xs.len();
        summary.warmup = refined.warmup;
        summary.purity = Some(q);
        summary.energy_rate_bits = Some(energy_rate(&ThermalContext::unit(), q) / std::f64::consts::LN_2);
        out.push("refined.txt", format_bit_records(&[refined.bits]));
    }
    out.push("summary.json", to_json(&summary));
    Ok(out)
}
