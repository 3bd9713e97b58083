//! Experiment configuration: strict JSON with defaults.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use leafkit_core::spinchain::{MAX_SITES, MIN_SITES};
use leafkit_core::{ChainSpec, FoliationOptions};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, CliResult};

/// One experiment: Hamiltonian, state, and pipeline settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ChainSpec,
    pub state: StateSpec,
    #[serde(default)]
    pub foliation: FoliationOptions,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub evolve: EvolveSection,
    /// Foliate by `h0` a thermal state of `model`.
    #[serde(default)]
    pub swap_roles: bool,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

/// `{h0, beta}`, `{uniform: true}` or `{file}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<ChainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<bool>,
    /// QMAT1 density matrix; relative paths resolve against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateKind {
    Thermal { h0: ChainSpec, beta: f64 },
    Uniform,
    File(PathBuf),
}

impl StateSpec {
    pub fn thermal(h0: ChainSpec, beta: f64) -> Self {
        Self { h0: Some(h0), beta: Some(beta), ..Self::default() }
    }

    pub fn uniform() -> Self {
        Self { uniform: Some(true), ..Self::default() }
    }

    pub fn kind(&self) -> Result<StateKind, String> {
        match (&self.h0, self.beta, self.uniform, &self.file) {
            (Some(h0), Some(beta), None, None) => Ok(StateKind::Thermal { h0: *h0, beta }),
            (None, None, Some(true), None) => Ok(StateKind::Uniform),
            (None, None, Some(false), None) => Err("uniform must be true when given".into()),
            (None, None, None, Some(path)) => Ok(StateKind::File(path.clone())),
            (Some(_), None, None, None) => Err("h0 requires beta".into()),
            (None, Some(_), None, None) => Err("beta requires h0".into()),
            _ => Err("state takes exactly one of {h0, beta}, {uniform: true} or {file}".into()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ShellSize {
    #[default]
    Sqrt,
    Fixed(usize),
}

impl ShellSize {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            ShellSize::Sqrt => leafkit_core::typicality::default_shell_size(d),
            ShellSize::Fixed(n) => n,
        }
    }
}

impl Serialize for ShellSize {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ShellSize::Sqrt => s.serialize_str("sqrt"),
            ShellSize::Fixed(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for ShellSize {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ShellSize;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"sqrt\" or a positive integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ShellSize, E> {
                if v == "sqrt" {
                    Ok(ShellSize::Sqrt)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ShellSize, E> {
                if v == 0 {
                    return Err(E::invalid_value(de::Unexpected::Unsigned(0), &self));
                }
                Ok(ShellSize::Fixed(v as usize))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ShellSize, E> {
                if v <= 0 {
                    return Err(E::invalid_value(de::Unexpected::Signed(v), &self));
                }
                self.visit_u64(v as u64)
            }
        }
        d.deserialize_any(V)
    }
}

/// Observables fed to diagnostics and evolution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableSet {
    /// All one- and two-site Pauli products at site 1.
    #[default]
    All,
    /// `z@1` and `zz@1,2`.
    Main,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    pub shell_size: ShellSize,
    pub delta_points: usize,
    pub observables: ObservableSet,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self {
            shell_size: ShellSize::Sqrt,
            delta_points: leafkit_core::typicality::DEFAULT_GRID_POINTS,
            observables: ObservableSet::All,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveSection {
    pub t_max: f64,
    pub dt: f64,
    /// Adds the identity as a self-test row.
    pub include_identity: bool,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self { t_max: 10.0, dt: 0.25, include_identity: false }
    }
}

impl EvolveSection {
    /// `0, dt, 2 dt, ...` up to `t_max` inclusive.
    pub fn times(&self) -> Vec<f64> {
        let n = (self.t_max / self.dt + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * self.dt).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Leaf,
    Diagnostics,
    Evolution,
    Figures,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub emit: BTreeSet<Emit>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("leafkit-out"),
            emit: [Emit::Diagnostics, Emit::Evolution, Emit::Figures].into_iter().collect(),
        }
    }
}

/// Optional grid of chain lengths and inverse temperatures.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
}

impl ExperimentConfig {
    /// A config on `model` with every other section at its default.
    pub fn new(model: ChainSpec, state: StateSpec) -> Self {
        Self {
            model,
            state,
            foliation: FoliationOptions::default(),
            diagnostics: DiagnosticsSection::default(),
            evolve: EvolveSection::default(),
            swap_roles: false,
            output: OutputSection::default(),
            seed: 0,
            sweep: None,
        }
    }

    pub fn state_kind(&self) -> StateKind {
        self.state.kind().expect("validated config")
    }

    /// Canonical JSON, used for hashing and echoing.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Digest of the experiment; the output directory does not take part.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output.dir = PathBuf::new();
        crate::manifest::sha256_hex(c.canonical_json().as_bytes())
    }

    /// Semantic checks after parsing; `Err((key, message))` names the offending key.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        self.model.validate().map_err(|e| ("model", e.to_string()))?;
        let kind = self.state.kind().map_err(|e| ("state", e))?;
        if let StateKind::Thermal { h0, .. } = &kind {
            h0.validate().map_err(|e| ("h0", e.to_string()))?;
            if h0.sites != self.model.sites {
                return Err(("h0", format!("h0 has L={} but model has L={}", h0.sites, self.model.sites)));
            }
        }
        if self.swap_roles && !matches!(kind, StateKind::Thermal { .. }) {
            return Err(("swap_roles", "swap_roles needs a thermal state {h0, beta}".into()));
        }
        let f = &self.foliation;
        if !(f.gap_tol >= 0.0 && f.gap_tol.is_finite()) {
            return Err(("gap_tol", "gap_tol must be finite and non-negative".into()));
        }
        if !(0.0..1.0).contains(&f.rank_floor) {
            return Err(("rank_floor", "rank_floor must lie in [0, 1)".into()));
        }
        if !(0.0..1.0).contains(&f.population_floor) {
            return Err(("population_floor", "population_floor must lie in [0, 1)".into()));
        }
        if self.diagnostics.delta_points < 2 {
            return Err(("delta_points", "delta_points must be at least 2".into()));
        }
        let e = &self.evolve;
        if e.t_max < 0.0 {
            return Err(("t_max", "t_max must be non-negative".into()));
        }
        if e.dt <= 0.0 {
            return Err(("dt", "dt must be positive".into()));
        }
        if e.t_max / e.dt > 1e6 {
            return Err(("dt", "time grid exceeds 10^6 points".into()));
        }
        if let Some(sweep) = &self.sweep {
            if let Some(ls) = &sweep.sites {
                if ls.is_empty() {
                    return Err(("sweep", "sweep.L is empty".into()));
                }
                if let Some(l) = ls.iter().find(|l| !(MIN_SITES..=MAX_SITES).contains(*l)) {
                    return Err(("sweep", format!("sweep L={l} outside {MIN_SITES}..={MAX_SITES}")));
                }
            }
            if let Some(bs) = &sweep.beta {
                if !matches!(kind, StateKind::Thermal { .. }) {
                    return Err(("sweep", "sweep.beta needs a thermal state".into()));
                }
                if bs.is_empty() {
                    return Err(("sweep", "sweep.beta is empty".into()));
                }
            }
        }
        Ok(())
    }
}

/// Reads and validates a config file. Relative state files resolve against
/// the file's directory.
pub fn parse_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut cfg = parse_config_str(&text, &path.display().to_string())?;
    if let Some(file) = cfg.state.file.as_mut() {
        if file.is_relative() {
            *file = path.parent().unwrap_or(Path::new(".")).join(&*file);
        }
    }
    check_files(&cfg, &text, &path.display().to_string())?;
    Ok(cfg)
}

/// Parses config text; `origin` labels error messages.
pub fn parse_config_str(text: &str, origin: &str) -> CliResult<ExperimentConfig> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
        let full = e.to_string();
        let message = full.rsplit_once(" at line ").map_or(full.as_str(), |(m, _)| m);
        CliError::Config {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: explain_non_finite(message),
        }
    })?;
    cfg.validate().map_err(|(key, message)| anchored(text, origin, key, message))?;
    Ok(cfg)
}

fn check_files(cfg: &ExperimentConfig, text: &str, origin: &str) -> CliResult<()> {
    if let Some(file) = &cfg.state.file {
        if !file.is_file() {
            return Err(anchored(text, origin, "file", format!("state file {} does not exist", file.display())));
        }
    }
    Ok(())
}

/// Points at the first occurrence of `"key"` in the text (line 1 if absent).
fn anchored(text: &str, origin: &str, key: &str, message: String) -> CliError {
    let needle = format!("\"{key}\"");
    let (line, column) =
        text.lines().enumerate().find_map(|(i, l)| l.find(&needle).map(|c| (i + 1, c + 1))).unwrap_or((1, 1));
    CliError::Config { path: origin.to_string(), line, column, message }
}

/// JSON has no infinities, so they can only arrive as strings; say so.
fn explain_non_finite(message: &str) -> String {
    if let Some(rest) = message.strip_prefix("invalid type: string \"") {
        if let Some((word, _)) = rest.split_once('"') {
            if word.parse::<f64>().is_ok_and(|x| !x.is_finite()) {
                return format!("non-finite number \"{word}\" rejected; numeric fields must be finite");
            }
        }
    }
    message.to_string()
}
