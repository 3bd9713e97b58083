//! Per-point pipeline: state preparation, foliation, diagnostics, evolution.

use std::path::PathBuf;

use leafkit_core::dynamics::EvolutionComparison;
use leafkit_core::foliation::{average_variance, incoherence, leaf_entropy, write_leaf};
use leafkit_core::qmat;
use leafkit_core::typicality::{diagnostics_for, write_curve, DiagnosticsCurve, RunLabels, ShellReport};
use leafkit_core::{
    boltzmann_from_spectrum, build_hamiltonian, compare_evolutions, local_observables, optimal_ensemble_with,
    ChainSpec, DeltaGrid, DensityMatrix, HermitianOperator, Leaf, Observable, PauliString, Propagator,
};
use serde::{Deserialize, Serialize};

use crate::cache::SpectrumCache;
use crate::config::{ExperimentConfig, ObservableSet, StateKind};
use crate::error::{CliError, CliResult, Context};
use crate::manifest::OutputWriter;

/// Which Hamiltonian of the config generates the foliation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Foliator {
    Model,
    H0,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PointState {
    Thermal { beta: f64 },
    Uniform,
    File(PathBuf),
}

/// One (L, state, foliator) cell of an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct RunPoint {
    pub sites: usize,
    pub state: PointState,
    pub foliator: Foliator,
    /// Set for benchmark cells whose state Hamiltonian is degenerate by construction.
    pub allow_degenerate: bool,
}

impl RunPoint {
    /// File-name tag, e.g. `L8_beta0.25` or `L8_uniform_h0`.
    pub fn tag(&self) -> String {
        let state = match &self.state {
            PointState::Thermal { beta } => format!("beta{beta}"),
            PointState::Uniform => "uniform".into(),
            PointState::File(_) => "file".into(),
        };
        let suffix = match self.foliator {
            Foliator::Model => "",
            Foliator::H0 => "_h0",
        };
        format!("L{}_{state}{suffix}", self.sites)
    }

    pub fn beta(&self) -> Option<f64> {
        match self.state {
            PointState::Thermal { beta } => Some(beta),
            PointState::Uniform => Some(0.0),
            PointState::File(_) => None,
        }
    }
}

/// The cells of `cfg`, in sweep order (L outer, beta inner).
pub fn run_points(cfg: &ExperimentConfig) -> Vec<RunPoint> {
    let sites = cfg.sweep.as_ref().and_then(|s| s.sites.clone()).unwrap_or_else(|| vec![cfg.model.sites]);
    let foliator = if cfg.swap_roles { Foliator::H0 } else { Foliator::Model };
    let states: Vec<PointState> = match cfg.state_kind() {
        StateKind::Thermal { beta, .. } => cfg
            .sweep
            .as_ref()
            .and_then(|s| s.beta.clone())
            .unwrap_or_else(|| vec![beta])
            .into_iter()
            .map(|beta| PointState::Thermal { beta })
            .collect(),
        StateKind::Uniform => vec![PointState::Uniform],
        StateKind::File(p) => vec![PointState::File(p)],
    };
    sites
        .iter()
        .flat_map(|&l| {
            states.iter().map(move |s| RunPoint { sites: l, state: s.clone(), foliator, allow_degenerate: false })
        })
        .collect()
}

/// `spec` resized to `sites` sites.
fn at_length(spec: &ChainSpec, sites: usize) -> ChainSpec {
    ChainSpec { sites, ..*spec }
}

fn h0_spec(cfg: &ExperimentConfig) -> CliResult<ChainSpec> {
    match cfg.state_kind() {
        StateKind::Thermal { h0, .. } => Ok(h0),
        _ => Err(CliError::Usage("this run needs a thermal state config with h0".into())),
    }
}

/// The foliating and the state-generating chain for a point.
pub fn specs(cfg: &ExperimentConfig, point: &RunPoint) -> CliResult<(ChainSpec, Option<ChainSpec>)> {
    let model = at_length(&cfg.model, point.sites);
    let other = match (point.foliator, &point.state) {
        (Foliator::H0, _) => Some(model),
        (Foliator::Model, PointState::Thermal { .. }) => Some(at_length(&h0_spec(cfg)?, point.sites)),
        (Foliator::Model, _) => None,
    };
    let foliating = match point.foliator {
        Foliator::Model => model,
        Foliator::H0 => at_length(&h0_spec(cfg)?, point.sites),
    };
    Ok((foliating, other))
}

/// Scalar figures of merit of one leaf.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeafSummary {
    pub tag: String,
    #[serde(rename = "L")]
    pub sites: usize,
    pub dim: usize,
    pub beta: Option<f64>,
    pub foliation: Foliator,
    pub incoherence: f64,
    pub incoherence_ratio: f64,
    pub population_entropy: f64,
    pub population_entropy_ratio: f64,
    pub qfi: f64,
    pub source_energy: f64,
    pub non_unique: bool,
    pub unreliable: usize,
    pub min_relative_gap: f64,
}

/// A point after foliation.
pub struct Foliated {
    pub point: RunPoint,
    pub foliating: ChainSpec,
    pub h: HermitianOperator<f64>,
    pub rho: DensityMatrix<f64>,
    pub leaf: Leaf<f64>,
    pub summary: LeafSummary,
}

pub fn prepare_state(
    cfg: &ExperimentConfig,
    point: &RunPoint,
    generator: Option<&ChainSpec>,
    cache: &SpectrumCache,
) -> CliResult<DensityMatrix<f64>> {
    let d = 1usize << point.sites;
    let rho = match &point.state {
        PointState::Uniform => DensityMatrix::maximally_mixed(d).context(|| "uniform state".into())?,
        PointState::Thermal { beta } => {
            let spec = generator.expect("thermal points carry a generator");
            let spectrum = cache.spectrum(spec)?;
            boltzmann_from_spectrum(&spectrum, *beta).context(|| format!("thermal state at beta={beta}"))?
        }
        PointState::File(path) => load_state(path, d)?,
    };
    Ok(rho.with_rank_floor(cfg.foliation.rank_floor))
}

fn load_state(path: &std::path::Path, d: usize) -> CliResult<DensityMatrix<f64>> {
    let bad = |detail: String| CliError::BadInput { path: path.to_path_buf(), detail };
    let blob = qmat::read_file(path).map_err(|e| bad(e.to_string()))?;
    if blob.dim != d {
        return Err(bad(format!("state has dimension {}, model needs {d}", blob.dim)));
    }
    let m = blob.to_matrix::<f64>().map_err(|e| bad(e.to_string()))?;
    let op = HermitianOperator::new(m).map_err(|e| bad(e.to_string()))?;
    DensityMatrix::new(op).map_err(|e| bad(e.to_string()))
}

pub fn foliate(cfg: &ExperimentConfig, point: &RunPoint, cache: &SpectrumCache) -> CliResult<Foliated> {
    let (foliating, generator) = specs(cfg, point)?;
    let tag = point.tag();
    let rho = prepare_state(cfg, point, generator.as_ref(), cache)?;
    let h = build_hamiltonian::<f64>(&foliating).context(|| format!("{tag}: Hamiltonian"))?;
    let mut opts = cfg.foliation;
    opts.allow_degenerate |= point.allow_degenerate;
    let leaf = optimal_ensemble_with(&rho, &h, &opts).context(|| format!("{tag}: foliation"))?;
    let summary = summarize(point, &leaf, &h)?;
    Ok(Foliated { point: point.clone(), foliating, h, rho, leaf, summary })
}

fn summarize(point: &RunPoint, leaf: &Leaf<f64>, h: &HermitianOperator<f64>) -> CliResult<LeafSummary> {
    let tag = point.tag();
    let d = leaf.dim();
    let ln_d = (d as f64).ln();
    let ratio = |x: f64| if d < 2 { 1.0 } else { x / ln_d };
    let j = incoherence(leaf).context(|| format!("{tag}: incoherence"))?;
    let s_h = leaf_entropy(leaf);
    let qfi = 4.0 * average_variance(leaf, h).context(|| format!("{tag}: Fisher information"))?;
    Ok(LeafSummary {
        tag,
        sites: point.sites,
        dim: d,
        beta: point.beta(),
        foliation: point.foliator,
        incoherence: j,
        incoherence_ratio: ratio(j).clamp(0.0, 1.0),
        population_entropy: s_h,
        population_entropy_ratio: ratio(s_h).clamp(0.0, 1.0),
        qfi: qfi.max(0.0),
        source_energy: leaf.source_energy(),
        non_unique: leaf.flags().non_unique,
        unreliable: leaf.flags().unreliable.len(),
        min_relative_gap: leaf.flags().min_relative_gap,
    })
}

/// Labeled observables of a run; the identity sentinel is labeled `I`.
pub fn observables(sites: usize, set: ObservableSet, identity: bool) -> CliResult<Vec<(String, PauliString)>> {
    let catalog = local_observables(sites, 1).context(|| "observable catalog".into())?;
    let mut out: Vec<(String, PauliString)> = catalog
        .iter()
        .filter(|e| set == ObservableSet::All || e.label == "z@1" || e.label == "zz@1,2")
        .map(|e| (e.label.clone(), e.observable.clone()))
        .collect();
    if identity {
        out.push(("I".into(), PauliString::new(sites, &[]).context(|| "identity".into())?));
    }
    Ok(out)
}

fn as_dyn(obs: &[(String, PauliString)]) -> Vec<(&str, &dyn Observable<f64>)> {
    obs.iter().map(|(l, o)| (l.as_str(), o as &dyn Observable<f64>)).collect()
}

/// File stem for an observable label: `zz@1,2` becomes `zz_1-2`.
pub fn label_stem(label: &str) -> String {
    label.replace('@', "_").replace(',', "-")
}

pub fn diagnostics(cfg: &ExperimentConfig, f: &Foliated) -> CliResult<(ShellReport, Vec<DiagnosticsCurve>)> {
    let obs = observables(f.point.sites, cfg.diagnostics.observables, false)?;
    let shell_size = cfg.diagnostics.shell_size.resolve(f.leaf.dim());
    let grid = DeltaGrid::Auto { points: cfg.diagnostics.delta_points };
    let labels = RunLabels { sites: Some(f.point.sites), beta: f.point.beta() };
    diagnostics_for(&f.leaf, &as_dyn(&obs), shell_size, &grid, labels)
        .context(|| format!("{}: diagnostics", f.point.tag()))
}

pub fn evolve(
    cfg: &ExperimentConfig,
    f: &Foliated,
    shells: &ShellReport,
    cache: &SpectrumCache,
) -> CliResult<Vec<EvolutionComparison>> {
    let tag = f.point.tag();
    let obs = observables(f.point.sites, cfg.diagnostics.observables, cfg.evolve.include_identity)?;
    let propagator = Propagator::from_spectral(cache.spectrum(&f.foliating)?);
    compare_evolutions(&f.leaf, &f.rho, &propagator, &as_dyn(&obs), &cfg.evolve.times(), shells)
        .context(|| format!("{tag}: evolution"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSummary {
    pub observable: String,
    pub representative_index: usize,
    pub representative_energy: f64,
    pub coverage: f64,
}

/// Which products to write for each point.
#[derive(Clone, Copy, Debug, Default)]
pub struct Stages {
    pub leaf: bool,
    pub diagnostics: bool,
    pub evolution: bool,
}

/// Runs `points` in order, writing each point's products before the next
/// starts (large chains do not fit in memory twice).
pub fn run(
    cfg: &ExperimentConfig,
    points: &[RunPoint],
    stages: Stages,
    cache: &SpectrumCache,
    w: &mut OutputWriter,
) -> CliResult<Vec<LeafSummary>> {
    let mut summaries = Vec::with_capacity(points.len());
    for point in points {
        let tag = point.tag();
        let f = w.timed(format!("foliate {tag}"), |_| foliate(cfg, point, cache))?;
        w.write_json(&format!("summary/{tag}.json"), &f.summary)?;
        if stages.leaf {
            let dir = w.root().join("leaf");
            let paths =
                write_leaf(&dir, &tag, &f.leaf).map_err(|e| CliError::Core { context: tag.clone(), source: e })?;
            for p in paths {
                w.record(&p)?;
            }
        }
        if stages.diagnostics || stages.evolution {
            let (report, curves) = w.timed(format!("diagnostics {tag}"), |_| diagnostics(cfg, &f))?;
            if stages.diagnostics {
                let dir = w.root().join("diagnostics").join(&tag);
                for c in &curves {
                    let paths = write_curve(&dir, &label_stem(&c.observable_label), c)
                        .map_err(|e| CliError::Core { context: tag.clone(), source: e })?;
                    for p in paths {
                        w.record(&p)?;
                    }
                }
            }
            if stages.evolution {
                let comps = w.timed(format!("evolve {tag}"), |_| evolve(cfg, &f, &report, cache))?;
                let mut rows = Vec::with_capacity(comps.len());
                for c in &comps {
                    w.write(
                        &format!("evolution/{tag}/{}.csv", label_stem(&c.observable_label)),
                        c.to_csv().as_bytes(),
                    )?;
                    rows.push(EvolutionSummary {
                        observable: c.observable_label.clone(),
                        representative_index: c.representative_index,
                        representative_energy: c.representative_energy,
                        coverage: c.coverage(),
                    });
                }
                w.write_json(&format!("evolution/{tag}/summary.json"), &rows)?;
            }
        }
        summaries.push(f.summary);
    }
    Ok(summaries)
}
