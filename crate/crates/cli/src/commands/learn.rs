use std::fmt::Write as _;

use infoengine::learner::{
    act_learn, decision_bits, deterministic_fraction_on, evaluate_walk, learn_pairs, ActionRecord, GazeImage,
    GazeWorld, PatternDictionary, BLACK,
};
use serde::Serialize;

use super::{to_json, Outputs};
use crate::config::Config;
use crate::error::CliError;

#[derive(Serialize)]
struct Summary {
    epochs: usize,
    steps_per_epoch: usize,
    eval_steps: usize,
    promoted: Vec<String>,
    first_promoted: Option<String>,
    deterministic_per_epoch: Vec<usize>,
    deterministic_fraction_black: Option<f64>,
    trained_decision_bits: f64,
    untrained_decision_bits: f64,
    pair_promotions: Vec<String>,
}

fn image(cfg: &Config) -> Result<GazeImage, CliError> {
    if cfg.raw("learn", "image").is_some() {
        return cfg.read_file("learn", "image")?.parse().map_err(CliError::config);
    }
    let dims: Vec<usize> = cfg.list("learn", "lines")?;
    match dims.as_slice() {
        &[rows, cols, spacing] if rows > 0 && cols > 0 && spacing > 0 => Ok(GazeImage::horizontal_lines(rows, cols, spacing)),
        _ => Err(CliError::Config("lines needs rows, cols, spacing".into())),
    }
}

fn log_csv(log: &[ActionRecord]) -> String {
    let mut out = String::from("step,row,col,color,action,deterministic\n");
    for (i, r) in log.iter().enumerate() {
        let color = if r.color == BLACK { "black" } else { "white" };
        let _ = writeln!(out, "{i},{},{},{color},{},{}", r.row, r.col, r.action.name(), u8::from(r.deterministic));
    }
    out
}

fn configure(cfg: &Config, dict: PatternDictionary) -> Result<PatternDictionary, CliError> {
    let theta = cfg.get_or("learn", "theta", dict.theta)?;
    let phi = cfg.get_or("learn", "phi", dict.phi)?;
    let min_support = cfg.get_or("learn", "min_support", dict.min_support)?;
    Ok(dict.with_theta(theta).with_phi(phi).with_min_support(min_support))
}

pub fn run(cfg: &Config, seed: u64) -> Result<Outputs, CliError> {
    let img = image(cfg)?;
    let epochs: usize = cfg.get_or("learn", "epochs", 3)?;
    let steps: usize = cfg.get_or("learn", "steps", 5000)?;
    let eval_steps: usize = cfg.get_or("learn", "eval_steps", 10_000)?;
    let mut dict = configure(cfg, GazeWorld::dictionary())?;
    let mut world = GazeWorld::new(img);
    let mut promoted = Vec::new();
    let mut deterministic_per_epoch = Vec::new();
    for _ in 0..epochs {
        let (log, report) = act_learn(&mut world, steps, &mut dict, seed);
        deterministic_per_epoch.push(log.iter().filter(|r| r.deterministic).count());
        promoted.extend(report.promoted);
    }
    let eval_seed = seed ^ 0x5eed;
    let (trained, _) = evaluate_walk(&mut world, eval_steps, &dict, eval_seed);
    let (untrained, _) = evaluate_walk(&mut world, eval_steps, &GazeWorld::dictionary(), eval_seed);

    let mut pair_promotions = Vec::new();
    let mut out = Outputs::default();
    if cfg.has_section("pairs") {
        let text = cfg.read_file("pairs", "input")?;
        let chars: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut alphabet: Vec<char> = chars.chars().collect();
        alphabet.sort_unstable();
        alphabet.dedup();
        let mut pdict = PatternDictionary::from_alphabet(&alphabet.iter().collect::<String>())
            .with_theta(cfg.get_or("pairs", "theta", 3.0)?);
        let tokens: Vec<usize> = chars.chars().map(|c| alphabet.binary_search(&c).expect("alphabet")).collect();
        let report = learn_pairs(&tokens, &mut pdict, cfg.get_or("pairs", "passes", 2)?).map_err(CliError::runtime)?;
        pair_promotions = report.promoted.iter().map(|&id| pdict.name_of(id)).collect();
        out.push("pairs.json", pdict.to_json() + "\n");
    }

    out.push("dictionary.json", dict.to_json() + "\n");
    out.push("actions.csv", log_csv(&trained));
    let names: Vec<String> = promoted.iter().map(|&id| dict.name_of(id)).collect();
    out.push(
        "summary.json",
        to_json(&Summary {
            epochs,
            steps_per_epoch: steps,
            eval_steps,
            first_promoted: names.first().cloned(),
            promoted: names,
            deterministic_per_epoch,
            deterministic_fraction_black: deterministic_fraction_on(&trained, BLACK),
            trained_decision_bits: decision_bits(&trained),
            untrained_decision_bits: decision_bits(&untrained),
            pair_promotions,
        }),
    );
    Ok(out)
}
