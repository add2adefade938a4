use std::fmt::Write as _;

use infoengine::thermo::{expected_yield, generator_cost, kl_gain, optimal_strategy, EngineConfig, Handedness, ProbPair};
use infoengine::ThermalContext;
use serde::Serialize;

use super::{to_json, Outputs};
use crate::config::Config;
use crate::error::CliError;

#[derive(Serialize)]
struct Summary {
    rows: usize,
    kt: f64,
    prior: f64,
    max_conjugacy_residual: f64,
}

/// Values of `R` from the sweep plus any `extra` points, deduplicated and
/// sorted.
fn belief_points(cfg: &Config) -> Result<Vec<f64>, CliError> {
    let start: f64 = cfg.get("sweep", "r_start")?;
    let stop: f64 = cfg.get("sweep", "r_stop")?;
    let step: f64 = cfg.get("sweep", "r_step")?;
    if !(step > 0.0) || stop < start {
        return Err(CliError::Config("sweep needs r_step > 0 and r_stop >= r_start".into()));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    let mut points: Vec<f64> = (0..=count).map(|k| start + k as f64 * step).collect();
    if cfg.raw("sweep", "extra").is_some() {
        points.extend(cfg.list::<f64>("sweep", "extra")?);
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    Ok(points)
}

pub fn run(cfg: &Config) -> Result<Outputs, CliError> {
    let ctx = ThermalContext::new(cfg.get_or("sweep", "kt", 1.0)?).map_err(CliError::config)?;
    let p1: f64 = cfg.get_or("sweep", "p", 0.5)?;
    let prior = ProbPair::new(p1).map_err(CliError::config)?;
    let mut csv = String::from("R,P,Q,expected_yield,kl_gain,generator_cost,conjugacy_residual\n");
    let mut max_residual = 0.0f64;
    let points = belief_points(cfg)?;
    for &r1 in &points {
        let belief = ProbPair::new(r1).map_err(CliError::config)?;
        let q = optimal_strategy(&belief);
        let engine = EngineConfig::new(Handedness::FavorsZero, prior, q).map_err(CliError::config)?;
        let e_max = expected_yield(&ctx, &engine, &belief);
        let e_min = generator_cost(&ctx, &belief);
        // E_max + E_min equals the cross-entropy of R against P
        let [r_a, r_b] = belief.components();
        let [p_a, p_b] = prior.components();
        let cross = -ctx.kt() * (r_a * p_a.ln() + if r_b == 0.0 { 0.0 } else { r_b * p_b.ln() });
        let residual = e_max + e_min - cross;
        max_residual = max_residual.max(residual.abs());
        let _ = writeln!(
            csv,
            "{r1},{p1},{},{e_max},{},{e_min},{residual:e}",
            q.first(),
            ctx.kt() * kl_gain(&belief, &prior)
        );
    }
    let mut out = Outputs::default();
    out.push("thermo_table.csv", csv);
    out.push(
        "summary.json",
        to_json(&Summary { rows: points.len(), kt: ctx.kt(), prior: p1, max_conjugacy_residual: max_residual }),
    );
    Ok(out)
}
