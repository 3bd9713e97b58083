//! Command dispatch.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::cache::SpectrumCache;
use crate::config::{parse_config, Emit, ExperimentConfig, ObservableSet};
use crate::error::{CliError, CliResult};
use crate::manifest::{OutputWriter, RunManifest};
use crate::pipeline::{self, LeafSummary, Stages};
use crate::presets;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Build the leaf of each configured state and report incoherence, QFI and population entropy.
    Foliate,
    /// Energy-shell outlier curves of local observables.
    Diagnostics,
    /// Exact against representative-state evolution of local observables.
    Evolve,
    /// Figure-data bundle for a named preset (--preset fig1|fig2-left|fig2-right|s1..s4).
    Figure,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Foliate => "foliate",
            Command::Diagnostics => "diagnostics",
            Command::Evolve => "evolve",
            Command::Figure => "figure",
        }
    }
}

#[derive(Clone, Debug, Parser)]
#[command(name = "leafkit", version, about = "Minimum-variance foliation experiments on spin chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (JSON). Optional for `figure`, where it overrides the preset.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Figure name for `figure`; `main` or `all` observables otherwise.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Accept degenerate state Hamiltonians (the leaf is flagged non-unique).
    #[arg(long, global = true)]
    pub allow_degenerate: bool,
    /// Worker threads (default: LEAFKIT_THREADS, else all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

/// What a finished run reports.
#[derive(Debug)]
pub struct RunReport {
    pub manifest: RunManifest,
    pub summaries: Vec<LeafSummary>,
    pub notes: Vec<String>,
}

impl RunReport {
    /// One line per leaf, then any notes.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.summaries {
            writeln!(
                out,
                "{}: J/log d = {:.4}  S_H/log d = {:.4}  QFI = {:.6e}{}",
                s.tag,
                s.incoherence_ratio,
                s.population_entropy_ratio,
                s.qfi,
                if s.non_unique { "  (non-unique)" } else { "" }
            )
            .expect("string write");
        }
        for n in &self.notes {
            writeln!(out, "{n}").expect("string write");
        }
        out
    }
}

fn apply_flags(cfg: &mut ExperimentConfig, cli: &Cli) {
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if cli.allow_degenerate {
        cfg.foliation.allow_degenerate = true;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
}

/// Runs one invocation against `cache`.
pub fn execute(cli: &Cli, cache: &SpectrumCache) -> CliResult<RunReport> {
    if cli.command == Command::Figure {
        return figure(cli, cache);
    }
    let path = cli.config.as_ref().ok_or_else(|| CliError::Usage(format!("{} needs --config", cli.command.name())))?;
    let mut cfg = parse_config(path)?;
    apply_flags(&mut cfg, cli);
    match cli.preset.as_deref() {
        None => {}
        Some("main") => cfg.diagnostics.observables = ObservableSet::Main,
        Some("all") => cfg.diagnostics.observables = ObservableSet::All,
        Some(other) => {
            return Err(CliError::Usage(format!(
                "--preset for {} takes main or all, got {other:?}",
                cli.command.name()
            )))
        }
    }
    let emit = |e| cfg.output.emit.contains(&e);
    let stages = match cli.command {
        Command::Foliate => Stages { leaf: true, ..Stages::default() },
        Command::Diagnostics => Stages { leaf: emit(Emit::Leaf), diagnostics: true, evolution: false },
        Command::Evolve => Stages { leaf: emit(Emit::Leaf), diagnostics: emit(Emit::Diagnostics), evolution: true },
        Command::Figure => unreachable!(),
    };
    let mut w = OutputWriter::new(&cfg.output.dir)?;
    let points = pipeline::run_points(&cfg);
    let summaries = pipeline::run(&cfg, &points, stages, cache, &mut w)?;
    let manifest = w.finish(cli.command.name(), cli.preset.as_deref(), &cfg)?;
    Ok(RunReport { manifest, summaries, notes: Vec::new() })
}

fn figure(cli: &Cli, cache: &SpectrumCache) -> CliResult<RunReport> {
    let name = cli
        .preset
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("figure needs --preset, one of {}", presets::FIGURES.join(", "))))?;
    let overrides = match &cli.config {
        Some(p) => Some((std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?, p.display().to_string())),
        None => None,
    };
    let mut plan = presets::plan(name, overrides.as_ref().map(|(t, o)| (t.as_str(), o.as_str())))?;
    apply_flags(&mut plan.config, cli);
    let cfg = plan.config.clone();
    let mut w = OutputWriter::new(&cfg.output.dir)?;
    let mut notes = Vec::new();
    let mut summaries = Vec::new();
    if name == "fig1" {
        let counts = w.timed("fig1 grid", |w| presets::fig1(&cfg.foliation, w))?;
        notes.push(format!(
            "fig1: {} grid points, {} valid nondegenerate states, {} distinct leaves",
            counts.grid, counts.kept, counts.leaves
        ));
    } else {
        let emit = |e| cfg.output.emit.contains(&e);
        let stages = Stages { leaf: emit(Emit::Leaf), diagnostics: plan.diagnostics, evolution: plan.evolution };
        summaries = pipeline::run(&cfg, &plan.points(), stages, cache, &mut w)?;
        if emit(Emit::Figures) {
            let mut table =
                String::from("tag,L,beta,foliation,incoherence_ratio,population_entropy_ratio,qfi,non_unique\n");
            for s in &summaries {
                let beta = s.beta.map(|b| b.to_string()).unwrap_or_default();
                let fol = match s.foliation {
                    pipeline::Foliator::Model => "model",
                    pipeline::Foliator::H0 => "h0",
                };
                writeln!(
                    table,
                    "{},{},{beta},{fol},{},{},{},{}",
                    s.tag, s.sites, s.incoherence_ratio, s.population_entropy_ratio, s.qfi, s.non_unique
                )
                .expect("string write");
            }
            w.write(&format!("figures/{name}_leaves.csv"), table.as_bytes())?;
        }
    }
    let manifest = w.finish("figure", Some(name), &cfg)?;
    Ok(RunReport { manifest, summaries, notes })
}
