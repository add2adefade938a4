use infoengine::atm::{
    bits_to_micro, micro_to_bits, run_in, trace_csv, AtmConfig, DecisionTable, MemoryWorld, Move, Pos, RunSummary,
    WorldGenerator,
};
use infoengine::learner::GazeImage;
use infoengine::thermo::{EngineConfig, Handedness, ProbPair};
use serde::Serialize;

use super::refine::parse_refiner;
use super::{to_json, Outputs};
use crate::config::Config;
use crate::error::CliError;

#[derive(Serialize)]
struct Summary {
    #[serde(flatten)]
    ledger: RunSummary,
    final_balance_bits: f64,
    net_bits: f64,
    min_steps: u64,
}

fn world(cfg: &Config, seed: u64) -> Result<MemoryWorld, CliError> {
    let dim: u8 = cfg.get_or("world", "dim", 1)?;
    let kind = cfg.string_or("world", "kind", "band");
    let generator = match kind.as_str() {
        "constant" => WorldGenerator::Constant(cfg.get_or::<u8>("world", "value", 0)? != 0),
        "iid" => WorldGenerator::Iid(cfg.get_or("world", "p", 0.5)?),
        "band" => WorldGenerator::band_with_noise(cfg.get("world", "band_mean")?, cfg.get_or("world", "noise", 0.0)?),
        "image" => {
            let img: GazeImage = cfg.read_file("world", "image")?.parse().map_err(CliError::config)?;
            let cells = (0..img.rows()).flat_map(|r| (0..img.cols()).map(move |c| (r, c))).map(|(r, c)| img.is_black(r, c)).collect();
            WorldGenerator::Image { rows: img.rows(), cols: img.cols(), cells }
        }
        other => return Err(CliError::Config(format!("unknown world kind {other:?}"))),
    };
    MemoryWorld::new(dim, generator, seed).map_err(CliError::config)
}

fn parse_move(name: &str) -> Result<Move, CliError> {
    match name {
        "right" => Ok(Move::RIGHT),
        "left" => Ok(Move::LEFT),
        "up" => Ok(Move::UP),
        "down" => Ok(Move::DOWN),
        "stay" => Ok(Move::STAY),
        other => Err(CliError::Config(format!("unknown move {other:?}"))),
    }
}

fn parse_vector(s: &str) -> Result<u32, CliError> {
    let parsed = match s.strip_prefix("0b") {
        Some(bits) => u32::from_str_radix(bits, 2),
        None => s.parse(),
    };
    parsed.map_err(|_| CliError::Config(format!("bad action vector {s:?}")))
}

fn machine(cfg: &Config) -> Result<AtmConfig, CliError> {
    let handedness = match cfg.string_or("engine", "handedness", "zero").as_str() {
        "zero" => Handedness::FavorsZero,
        "one" => Handedness::FavorsOne,
        other => return Err(CliError::Config(format!("unknown handedness {other:?}"))),
    };
    let prior = ProbPair::new(cfg.get_or("engine", "prior", 0.5)?).map_err(CliError::config)?;
    let strategy = ProbPair::new(cfg.get("engine", "strategy")?).map_err(CliError::config)?;
    let engine = EngineConfig::new(handedness, prior, strategy).map_err(CliError::config)?;
    let refiner = parse_refiner(&cfg.string_or("machine", "refiner", "delay-xor"))?;
    let mut config = AtmConfig::passive(refiner, engine, cfg.get("machine", "initial_balance")?);
    config.overhead = bits_to_micro(cfg.get_or("machine", "overhead", 0.0)?);
    config.capacity = cfg.get_opt::<f64>("machine", "capacity")?.map(bits_to_micro);
    let motion = cfg.string_or("machine", "default_motion", "right");
    config.default_motion = motion.split(',').map(|m| parse_move(m.trim())).collect::<Result<_, _>>()?;
    if let Some(start) = cfg.raw("machine", "start") {
        let xy: Vec<i64> = crate::config::parse_list(start).map_err(|b| CliError::Config(format!("bad start {b:?}")))?;
        config.start = Pos::new(xy.first().copied().unwrap_or(0), xy.get(1).copied().unwrap_or(0));
    }
    if cfg.has_section("decisions") {
        let entries = cfg
            .string("decisions", "table")?
            .split(',')
            .map(|s| parse_vector(s.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        config.decisions =
            DecisionTable::new(cfg.get("decisions", "context_bits")?, cfg.get("decisions", "width")?, entries)
                .map_err(CliError::config)?;
    }
    config.validate().map_err(CliError::config)?;
    Ok(config)
}

pub fn run(cfg: &Config, seed: u64) -> Result<Outputs, CliError> {
    let config = machine(cfg)?;
    let mut world = world(cfg, seed)?;
    let max_steps: u64 = cfg.get("machine", "max_steps")?;
    let min_steps: u64 = cfg.get_or("machine", "min_steps", max_steps)?;
    let outcome = run_in(&config, &mut world, max_steps).map_err(CliError::runtime)?;
    let ledger = outcome.summary;
    let mut out = Outputs::default();
    out.push("trace.csv", trace_csv(&world, &outcome.trace));
    let death = ledger.death_step.filter(|&s| s + 1 < min_steps);
    out.push(
        "summary.json",
        to_json(&Summary {
            final_balance_bits: micro_to_bits(ledger.final_balance),
            net_bits: micro_to_bits(ledger.net),
            min_steps,
            ledger,
        }),
    );
    out.failure = death.map(|step| CliError::Death { step, min_steps });
    Ok(out)
}
