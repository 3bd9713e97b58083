//! Figure presets and the qutrit sampler.

use std::collections::HashMap;
use std::fmt::Write as _;

use leafkit_core::{
    barycenter, gell_mann, incoherence, leaf_canonical, optimal_ensemble_with, ChainSpec, DensityMatrix,
    FoliationOptions, HermitianOperator, C,
};
use serde_json::{json, Value};

use crate::config::{parse_config_str, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::OutputWriter;
use crate::pipeline::{Foliator, PointState, RunPoint};

pub const FIGURES: [&str; 7] = ["fig1", "fig2-left", "fig2-right", "s1", "s2", "s3", "s4"];

/// A figure name resolved into an experiment.
#[derive(Clone, Debug)]
pub struct FigurePlan {
    pub name: String,
    pub config: ExperimentConfig,
    pub diagnostics: bool,
    pub evolution: bool,
    /// Uniform state foliated by the same Hamiltonian (commuting leaf).
    pub commuting_benchmark: bool,
    /// Uniform state foliated by `h0`.
    pub integrable_benchmark: bool,
}

fn chain(g: f64, h: f64, d: f64) -> Value {
    json!({ "L": 12, "g": g, "h": h, "D": d })
}

fn preset_json(name: &str) -> Option<Value> {
    let chaotic = serde_json::to_value(ChainSpec::chaotic(12).expect("valid")).expect("serializes");
    let para = chain(0.0, 1.5, 0.0);
    let ferro = chain(0.0, 0.5, 0.0);
    let sizes = json!([6, 8, 10, 12]);
    let base = |h0: Value, beta: f64, betas: Value, observables: &str| {
        json!({
            "model": chaotic,
            "state": { "h0": h0, "beta": beta },
            "diagnostics": { "observables": observables },
            "sweep": { "L": sizes, "beta": betas },
            "output": { "dir": format!("leafkit-out/{name}") },
        })
    };
    Some(match name {
        "fig1" => json!({
            "model": { "L": 2 },
            "state": { "uniform": true },
            "output": { "dir": "leafkit-out/fig1" },
        }),
        "fig2-left" => base(para, 0.25, json!([0.25, 0.75, 1.75]), "main"),
        "fig2-right" => {
            let mut v = base(para, 0.5, json!([0.5]), "all");
            v["sweep"]["L"] = json!([12]);
            v
        }
        "s1" => base(ferro, 0.25, json!([0.25]), "all"),
        "s2" => base(ferro, 0.75, json!([0.75]), "all"),
        "s3" => base(ferro, 1.75, json!([1.75]), "all"),
        "s4" => {
            let mut v = base(ferro, 0.25, json!([0.25]), "all");
            v["swap_roles"] = json!(true);
            v
        }
        _ => return None,
    })
}

/// Objects merge key by key; everything else is replaced.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Resolves a figure name, applying a partial override config if given.
///
/// A sweep `L` override also resizes the preset chains.
pub fn plan(name: &str, overrides: Option<(&str, &str)>) -> CliResult<FigurePlan> {
    let mut value = preset_json(name)
        .ok_or_else(|| CliError::Usage(format!("unknown figure {name:?}; expected one of {}", FIGURES.join(", "))))?;
    if let Some((text, origin)) = overrides {
        let over: Value = serde_json::from_str(text).map_err(|e| CliError::Config {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string().rsplit_once(" at line ").map_or(e.to_string(), |(m, _)| m.to_string()),
        })?;
        merge(&mut value, over);
    }
    if let Some(Value::Number(l)) = value.pointer("/sweep/L/0").cloned() {
        value["model"]["L"] = Value::Number(l.clone());
        if value.pointer("/state/h0").is_some() {
            value["state"]["h0"]["L"] = Value::Number(l);
        }
    }
    let text = serde_json::to_string_pretty(&value).expect("serializes");
    let config = parse_config_str(&text, &format!("preset {name}")).map_err(|e| match (e, overrides) {
        (CliError::Config { message, line, column, .. }, Some((user, origin))) => {
            let (line, column) = locate_key(user, &message).unwrap_or((line, column));
            CliError::Config { path: origin.to_string(), line, column, message }
        }
        (e, _) => e,
    })?;
    let sweep = name != "fig1";
    Ok(FigurePlan {
        name: name.to_string(),
        config,
        diagnostics: sweep,
        evolution: name == "fig2-right",
        commuting_benchmark: sweep && name != "fig2-right",
        integrable_benchmark: name == "fig2-left",
    })
}

/// Finds the first backticked key of `message` in `text`.
fn locate_key(text: &str, message: &str) -> Option<(usize, usize)> {
    let key = message.split('`').nth(1)?;
    let needle = format!("\"{key}\"");
    text.lines().enumerate().find_map(|(i, l)| l.find(&needle).map(|c| (i + 1, c + 1)))
}

impl FigurePlan {
    /// Main cells followed by benchmark cells, one benchmark per chain length.
    pub fn points(&self) -> Vec<RunPoint> {
        let mut points = crate::pipeline::run_points(&self.config);
        let mut sizes: Vec<usize> = points.iter().map(|p| p.sites).collect();
        sizes.dedup();
        let foliator = if self.config.swap_roles { Foliator::H0 } else { Foliator::Model };
        for &l in &sizes {
            if self.commuting_benchmark {
                points.push(RunPoint {
                    sites: l,
                    state: PointState::Uniform,
                    foliator,
                    allow_degenerate: foliator == Foliator::H0,
                });
            }
            if self.integrable_benchmark {
                points.push(RunPoint {
                    sites: l,
                    state: PointState::Uniform,
                    foliator: Foliator::H0,
                    allow_degenerate: true,
                });
            }
        }
        points
    }
}

/// Qutrit Hamiltonian `½λ₃ + (3√3/2)λ₈`.
pub fn qutrit_hamiltonian() -> HermitianOperator<f64> {
    let l3 = gell_mann::<f64>(3).expect("valid index");
    let l8 = gell_mann::<f64>(8).expect("valid index");
    l3.linear_combination(0.5, &l8, 1.5 * 3f64.sqrt()).expect("same size")
}

/// `I/3 + ½(n₁λ₁ + n₃λ₃ + n₈λ₈)`, or `None` outside the state space.
pub fn qutrit_state(n1: f64, n3: f64, n8: f64) -> Option<DensityMatrix<f64>> {
    let l = |j| gell_mann::<f64>(j).expect("valid index");
    let id = HermitianOperator::<f64>::identity(3).scale(1.0 / 3.0);
    let op = id
        .linear_combination(1.0, &l(1), 0.5 * n1)
        .and_then(|a| a.linear_combination(1.0, &l(3), 0.5 * n3))
        .and_then(|a| a.linear_combination(1.0, &l(8), 0.5 * n8))
        .ok()?;
    DensityMatrix::new(op).ok()
}

pub const FIG1_STEP: f64 = 0.05;
pub const FIG1_BETAS: [f64; 19] =
    [-64.0, -32.0, -16.0, -8.0, -4.0, -2.0, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Fig1Counts {
    pub grid: usize,
    pub kept: usize,
    pub leaves: usize,
}

fn coords(rho: &DensityMatrix<f64>) -> [f64; 3] {
    let t = |j| rho.op().trace_product(&gell_mann::<f64>(j).expect("valid index")).expect("same size");
    [t(1), t(3), t(8)]
}

/// Barycenter entries rounded to 1e-6.
fn leaf_key(rho0: &DensityMatrix<f64>) -> Vec<i64> {
    let r = |x: f64| (x * 1e6).round() as i64;
    let m = rho0.op();
    (0..3).flat_map(|i| (0..3).flat_map(move |j| [m.entry(i, j)])).flat_map(|z: C<f64>| [r(z.re), r(z.im)]).collect()
}

/// Samples the grid, writes `figures/fig1_points.csv` and `figures/fig1_curves.csv`.
pub fn fig1(opts: &FoliationOptions, w: &mut OutputWriter) -> CliResult<Fig1Counts> {
    let h = qutrit_hamiltonian();
    let mut points = String::from("n1,n3,n8,incoherence,leaf_id\n");
    let mut curves = String::from("leaf_id,beta,n1,n3,n8,purity\n");
    let mut ids: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut counts = Fig1Counts::default();
    let steps = |lo: i32, hi: i32| (lo..=hi).map(|k| k as f64 * FIG1_STEP);
    for n8 in steps(-24, 12) {
        for n3 in steps(-20, 20) {
            for n1 in steps(-20, 20) {
                counts.grid += 1;
                let Some(rho) = qutrit_state(n1, n3, n8) else { continue };
                let Ok(leaf) = optimal_ensemble_with(&rho, &h, opts) else { continue };
                if leaf.flags().non_unique {
                    continue;
                }
                let core = |e| CliError::Core { context: "fig1".into(), source: e };
                let j = incoherence(&leaf).map_err(core)?;
                let key = leaf_key(&barycenter(&leaf).map_err(core)?);
                let next = ids.len();
                let id = *ids.entry(key).or_insert(next);
                counts.kept += 1;
                writeln!(points, "{n1},{n3},{n8},{j},{id}").expect("string write");
                if id == next {
                    for beta in FIG1_BETAS {
                        let s = leaf_canonical(&leaf, beta).map_err(core)?;
                        let [a, b, c] = coords(&s);
                        writeln!(curves, "{id},{beta},{a},{b},{c},{}", s.purity()).expect("string write");
                    }
                }
            }
        }
    }
    counts.leaves = ids.len();
    w.write("figures/fig1_points.csv", points.as_bytes())?;
    w.write("figures/fig1_curves.csv", curves.as_bytes())?;
    Ok(counts)
}
