use infoengine::terrain::{
    entropy_functional, flow_invariant, free_energy, path_csv, plan, plan_chain, Bump, GridField, Path, Point,
    RobotParams, TerrainError, TerrainField,
};
use serde::Serialize;

use super::{to_json, Outputs};
use crate::config::{parse_list, Config};
use crate::error::CliError;

#[derive(Serialize)]
struct Leg {
    entropy: f64,
    max_flow_drift: f64,
    iterations: usize,
    miss: f64,
}

#[derive(Serialize)]
struct Summary {
    dim: usize,
    legs: Vec<Leg>,
    entropy: f64,
    free_energy: f64,
    max_flow_drift: f64,
}

fn point(raw: &str) -> Result<Point, CliError> {
    let v: Vec<f64> = parse_list(raw).map_err(|b| CliError::Config(format!("bad coordinate {b:?}")))?;
    match v.as_slice() {
        [x] => Ok([*x, 0.0]),
        [x, y] => Ok([*x, *y]),
        _ => Err(CliError::Config(format!("point needs 1 or 2 coordinates: {raw:?}"))),
    }
}

fn field(cfg: &Config) -> Result<TerrainField, CliError> {
    let kind = cfg.string_or("field", "kind", "constant");
    Ok(match kind.as_str() {
        "constant" => TerrainField::Constant(cfg.get_or("field", "value", 0.0)?),
        "linear" => TerrainField::Linear {
            offset: cfg.get_or("field", "offset", 0.0)?,
            slope: point(&cfg.string("field", "slope")?)?,
        },
        "harmonic" => TerrainField::Harmonic {
            k: cfg.get("field", "k")?,
            center: point(&cfg.string_or("field", "center", "0,0"))?,
        },
        "gaussian" => {
            // amplitude:cx:cy:width entries separated by ';'
            let bumps = cfg
                .string("field", "bumps")?
                .split(';')
                .filter(|s| !s.trim().is_empty())
                .map(|b| {
                    let v: Vec<f64> = b.split(':').map(|x| x.trim().parse()).collect::<Result<_, _>>()
                        .map_err(|_| CliError::Config(format!("bad bump {b:?}")))?;
                    match v.as_slice() {
                        [a, cx, cy, w] if *w > 0.0 => Ok(Bump { amplitude: *a, center: [*cx, *cy], width: *w }),
                        _ => Err(CliError::Config(format!("bump needs amplitude:cx:cy:width, got {b:?}"))),
                    }
                })
                .collect::<Result<_, _>>()?;
            TerrainField::GaussianMixture(bumps)
        }
        "grid" => TerrainField::Grid(cfg.read_file("field", "grid")?.parse::<GridField>().map_err(CliError::config)?),
        other => return Err(CliError::Config(format!("unknown field kind {other:?}"))),
    })
}

fn to_cli(e: TerrainError) -> CliError {
    match e {
        TerrainError::InvalidParams(_) | TerrainError::Parse { .. } => CliError::config(e),
        _ => CliError::runtime(e),
    }
}

pub fn run(cfg: &Config) -> Result<Outputs, CliError> {
    let field = field(cfg)?;
    let params = RobotParams::new(
        cfg.get_or("robot", "mu", 1.0)?,
        cfg.get_or("robot", "eps", 1.0)?,
        cfg.get_or("robot", "temperature", 1.0)?,
        cfg.get_or("robot", "u0", 0.0)?,
        cfg.get("robot", "dt")?,
    )
    .map_err(CliError::config)?;
    let dim: usize = cfg.get_or("plan", "dim", 1)?;
    if dim != 1 && dim != 2 {
        return Err(CliError::Config("dim must be 1 or 2".into()));
    }
    let t0: f64 = cfg.get_or("plan", "t0", 0.0)?;
    let outcomes = if let Some(raw) = cfg.raw("plan", "waypoints") {
        let waypoints: Vec<Point> = raw.split(';').filter(|s| !s.trim().is_empty()).map(point).collect::<Result<_, _>>()?;
        plan_chain(dim, &waypoints, t0, cfg.get("plan", "leg_time")?, &field, &params).map_err(to_cli)?
    } else {
        let start = point(&cfg.string("plan", "start")?)?;
        let goal = point(&cfg.string("plan", "goal")?)?;
        vec![plan(dim, start, goal, t0, cfg.get("plan", "t1")?, &field, &params).map_err(to_cli)?]
    };

    let mut legs = Vec::new();
    let mut joined: Option<Path> = None;
    for o in &outcomes {
        let p = params.with_dt(o.path.dt);
        let flow = flow_invariant(&o.path, &field, &p).map_err(to_cli)?;
        legs.push(Leg {
            entropy: entropy_functional(&o.path, &field, &p).map_err(to_cli)?,
            max_flow_drift: flow.drift,
            iterations: o.iterations,
            miss: o.miss,
        });
        match &mut joined {
            None => joined = Some(o.path.clone()),
            Some(j) => j.samples.extend_from_slice(&o.path.samples[1..]),
        }
    }
    let path = joined.expect("at least one leg");
    let entropy: f64 = legs.iter().map(|l| l.entropy).sum();
    let mut out = Outputs::default();
    out.push("path.csv", path_csv(&path, &field, &params.with_dt(path.dt)).map_err(to_cli)?);
    out.push(
        "summary.json",
        to_json(&Summary {
            dim,
            entropy,
            free_energy: free_energy(&params, entropy),
            max_flow_drift: legs.iter().map(|l| l.max_flow_drift).fold(0.0, f64::max),
            legs,
        }),
    );
    Ok(out)
}
