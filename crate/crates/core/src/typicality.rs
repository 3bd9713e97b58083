//! Energy-shell statistics of local observables over a leaf family.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::foliation::{incoherence, Leaf};
use crate::linalg;
use crate::operator::{column_expectations, DensityMatrix, Observable};
use crate::scalar::Real;
use crate::spinchain::ObservableCatalog;

/// Default number of points of the automatic Δ grid.
pub const DEFAULT_GRID_POINTS: usize = 201;

/// `round(√d)`, at least 1.
pub fn default_shell_size(d: usize) -> usize {
    ((d as f64).sqrt().round() as usize).max(1)
}

/// Consecutive blocks of `shell_size` indices; the remainder forms a final,
/// smaller shell.
pub fn shell_partition(d: usize, shell_size: usize) -> Result<Vec<Range<usize>>> {
    if d == 0 || shell_size == 0 || shell_size > d {
        return Err(Error::InvalidParameter(format!("shell size {shell_size} invalid for d={d}")));
    }
    Ok((0..d).step_by(shell_size).map(|s| s..(s + shell_size).min(d)).collect())
}

/// `<φ_i|O|φ_i>` in leaf order (ascending energy). Entries of unreliable
/// states are computed but excluded downstream via [`Leaf::reliable_mask`].
pub fn shell_values<T: Real, O: Observable<T> + ?Sized>(leaf: &Leaf<T>, o: &O) -> Result<Vec<T>> {
    leaf.expectations(o)
}

/// The same values through `<Ψ_i|√ρ O √ρ|Ψ_i> / <Ψ_i|ρ|Ψ_i>`.
pub fn sandwich_values<T: Real, O: Observable<T> + ?Sized>(
    leaf: &Leaf<T>,
    rho: &DensityMatrix<T>,
    o: &O,
) -> Result<Vec<T>> {
    check_dims("sandwich values", leaf.dim(), rho.dim())?;
    let sqrt_rho = rho.sqrt();
    let v = sqrt_rho.apply(leaf.psi())?;
    let num = column_expectations(o, v.as_ref())?;
    let (den, _) = linalg::column_inner(leaf.psi(), rho.op().apply(leaf.psi())?.as_ref());
    Ok(num.iter().zip(&den).map(|(&n, &p)| n / p).collect())
}

/// Linear-interpolation percentile of already sorted data, `q ∈ [0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

/// Shell statistics of one observable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableShells {
    pub label: String,
    /// `<φ_i|O|φ_i>` for every family member.
    pub values: Vec<f64>,
    /// Shell mean over reliable members (`NaN` if a shell has none).
    pub f: Vec<f64>,
    /// `|value_i - f(shell(i))|`; zero for masked members.
    pub deviations: Vec<f64>,
}

/// Shell layout plus per-observable statistics, in catalog order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellReport {
    pub dim: usize,
    pub shell_size: usize,
    pub shell_bounds: Vec<Range<usize>>,
    pub shell_mean_energy: Vec<f64>,
    /// `true` for members used in statistics.
    pub mask: Vec<bool>,
    pub observables: Vec<ObservableShells>,
}

impl ShellReport {
    pub fn mask_count(&self) -> usize {
        self.mask.iter().filter(|m| !**m).count()
    }

    /// Index of the shell containing family member `i`.
    pub fn shell_of(&self, i: usize) -> Option<usize> {
        if i >= self.dim {
            return None;
        }
        Some(i / self.shell_size)
    }

    pub fn observable(&self, label: &str) -> Option<&ObservableShells> {
        self.observables.iter().find(|o| o.label == label)
    }

    /// Reliable values of `label` inside shell `k`, sorted ascending.
    pub fn sorted_shell_values(&self, label: &str, k: usize) -> Option<Vec<f64>> {
        let obs = self.observable(label)?;
        let range = self.shell_bounds.get(k)?.clone();
        let mut vals: Vec<f64> = range.filter(|&i| self.mask[i]).map(|i| obs.values[i]).collect();
        vals.sort_by(f64::total_cmp);
        Some(vals)
    }

    /// `N_Δ`: reliable members with deviation strictly above `delta`.
    pub fn outlier_count(&self, label: &str, delta: f64) -> Option<usize> {
        let obs = self.observable(label)?;
        Some(count_above(&obs.deviations, &self.mask, delta))
    }
}

fn count_above(deviations: &[f64], mask: &[bool], delta: f64) -> usize {
    deviations.iter().zip(mask).filter(|(d, m)| **m && **d > delta).count()
}

/// Δ values at which `N_Δ` is evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaGrid {
    /// Uniform points from 0 to the observable's maximum deviation.
    Auto { points: usize },
    /// Fixed ascending grid starting at 0.
    Explicit(Vec<f64>),
}

impl Default for DeltaGrid {
    fn default() -> Self {
        DeltaGrid::Auto { points: DEFAULT_GRID_POINTS }
    }
}

impl DeltaGrid {
    fn resolve(&self, max_dev: f64) -> Result<Vec<f64>> {
        match self {
            DeltaGrid::Auto { points } => {
                if *points < 2 {
                    return Err(Error::InvalidParameter("Δ grid needs at least 2 points".into()));
                }
                let n = *points - 1;
                Ok((0..=n).map(|k| max_dev * k as f64 / n as f64).collect())
            }
            DeltaGrid::Explicit(grid) => {
                let ok = grid.first() == Some(&0.0)
                    && grid.iter().all(|x| x.is_finite())
                    && grid.windows(2).all(|w| w[0] < w[1]);
                if !ok {
                    return Err(Error::InvalidParameter("Δ grid must be finite, ascending and start at 0".into()));
                }
                Ok(grid.clone())
            }
        }
    }
}

/// Labels attached to a curve for output.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunLabels {
    #[serde(rename = "L")]
    pub sites: Option<usize>,
    pub beta: Option<f64>,
}

/// `N_Δ` and `log_d N_Δ` against Δ for one observable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsCurve {
    pub observable_label: String,
    pub dim: usize,
    pub labels: RunLabels,
    pub shell_size: usize,
    pub mask_count: usize,
    pub incoherence_ratio: f64,
    pub deltas: Vec<f64>,
    pub counts: Vec<usize>,
    /// `None` where `N_Δ = 0`.
    pub log_d_counts: Vec<Option<f64>>,
}

/// `J / log d`, in `[0, 1]` (1 for `d = 1`).
pub fn incoherence_ratio<T: Real>(leaf: &Leaf<T>) -> Result<f64> {
    if leaf.dim() < 2 {
        return Ok(1.0);
    }
    let j = incoherence(leaf)?.to_f64_lossy();
    Ok((j / (leaf.dim() as f64).ln()).clamp(0.0, 1.0))
}

/// Shell statistics and outlier curves for every observable of `catalog`.
pub fn diagnostics<T: Real>(
    leaf: &Leaf<T>,
    catalog: &ObservableCatalog,
    shell_size: usize,
    grid: &DeltaGrid,
    labels: RunLabels,
) -> Result<(ShellReport, Vec<DiagnosticsCurve>)> {
    let observables: Vec<(&str, &dyn Observable<T>)> =
        catalog.iter().map(|e| (e.label.as_str(), &e.observable as &dyn Observable<T>)).collect();
    diagnostics_for(leaf, &observables, shell_size, grid, labels)
}

/// [`diagnostics`] for an arbitrary labeled list of observables.
pub fn diagnostics_for<T: Real>(
    leaf: &Leaf<T>,
    observables: &[(&str, &dyn Observable<T>)],
    shell_size: usize,
    grid: &DeltaGrid,
    labels: RunLabels,
) -> Result<(ShellReport, Vec<DiagnosticsCurve>)> {
    let d = leaf.dim();
    let shell_bounds = shell_partition(d, shell_size)?;
    let mask = leaf.reliable_mask();
    let energies: Vec<f64> = leaf.energies().iter().map(|e| e.to_f64_lossy()).collect();
    let shell_mean_energy = shell_bounds.iter().map(|r| mean(&energies[r.clone()])).collect();

    let stats: Vec<ObservableShells> = observables
        .par_iter()
        .map(|(label, o)| {
            let values: Vec<f64> = shell_values(leaf, *o)?.iter().map(|v| v.to_f64_lossy()).collect();
            Ok(observable_shells(label, values, &shell_bounds, &mask))
        })
        .collect::<Result<_>>()?;

    let ratio = incoherence_ratio(leaf)?;
    let report = ShellReport { dim: d, shell_size, shell_bounds, shell_mean_energy, mask, observables: stats };
    let mask_count = report.mask_count();
    let curves = report
        .observables
        .iter()
        .map(|obs| {
            let max_dev = obs.deviations.iter().cloned().fold(0.0, f64::max);
            let deltas = grid.resolve(max_dev)?;
            let counts: Vec<usize> = deltas.iter().map(|&x| count_above(&obs.deviations, &report.mask, x)).collect();
            let log_d_counts = counts.iter().map(|&n| log_base(n, d)).collect();
            Ok(DiagnosticsCurve {
                observable_label: obs.label.clone(),
                dim: d,
                labels,
                shell_size,
                mask_count,
                incoherence_ratio: ratio,
                deltas,
                counts,
                log_d_counts,
            })
        })
        .collect::<Result<_>>()?;
    Ok((report, curves))
}

fn log_base(n: usize, d: usize) -> Option<f64> {
    if n == 0 || d < 2 {
        None
    } else {
        Some((n as f64).ln() / (d as f64).ln())
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn observable_shells(label: &str, values: Vec<f64>, shells: &[Range<usize>], mask: &[bool]) -> ObservableShells {
    let f: Vec<f64> = shells
        .iter()
        .map(|r| {
            let kept: Vec<f64> = r.clone().filter(|&i| mask[i]).map(|i| values[i]).collect();
            if kept.is_empty() {
                f64::NAN
            } else {
                mean(&kept)
            }
        })
        .collect();
    let mut deviations = vec![0.0; values.len()];
    for (k, r) in shells.iter().enumerate() {
        for i in r.clone() {
            if mask[i] {
                deviations[i] = (values[i] - f[k]).abs();
            }
        }
    }
    ObservableShells { label: label.to_string(), values, f, deviations }
}

/// Writes `delta,N,log_d_N` rows (empty last field where `N = 0`).
pub fn curve_csv(curve: &DiagnosticsCurve) -> String {
    let mut out = String::from("delta,N,log_d_N\n");
    for ((delta, n), log) in curve.deltas.iter().zip(&curve.counts).zip(&curve.log_d_counts) {
        match log {
            Some(v) => writeln!(out, "{delta},{n},{v}"),
            None => writeln!(out, "{delta},{n},"),
        }
        .expect("writing to a String");
    }
    out
}

/// JSON sidecar of a curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSidecar {
    #[serde(rename = "L")]
    pub sites: Option<usize>,
    pub beta: Option<f64>,
    pub observable: String,
    pub shell_size: usize,
    pub incoherence_ratio: f64,
    pub mask_count: usize,
}

impl From<&DiagnosticsCurve> for CurveSidecar {
    fn from(c: &DiagnosticsCurve) -> Self {
        Self {
            sites: c.labels.sites,
            beta: c.labels.beta,
            observable: c.observable_label.clone(),
            shell_size: c.shell_size,
            incoherence_ratio: c.incoherence_ratio,
            mask_count: c.mask_count,
        }
    }
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`; returns both paths.
pub fn write_curve(dir: &Path, stem: &str, curve: &DiagnosticsCurve) -> Result<[std::path::PathBuf; 2]> {
    std::fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    std::fs::write(&csv, curve_csv(curve))?;
    let text = serde_json::to_string_pretty(&CurveSidecar::from(curve))
        .map_err(|e| Error::Format { what: "curve sidecar".into(), detail: e.to_string() })?;
    std::fs::write(&json, text + "\n")?;
    Ok([csv, json])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foliation::optimal_ensemble;
    use crate::operator::HermitianOperator;

    #[test]
    fn partitions() {
        let p = shell_partition(4096, 64).unwrap();
        assert_eq!(p.len(), 64);
        assert!(p.iter().all(|r| r.len() == 64));
        let sizes: Vec<usize> = shell_partition(10, 3).unwrap().iter().map(|r| r.len()).collect();
        assert_eq!(sizes, vec![3, 3, 3, 1]);
        assert_eq!(shell_partition(4, 4).unwrap(), vec![0..4]);
        assert!(shell_partition(4, 0).is_err());
        assert!(shell_partition(4, 5).is_err());
        assert_eq!(default_shell_size(4096), 64);
        assert_eq!(default_shell_size(10), 3);
    }

    #[test]
    fn percentiles() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&xs, 0.5), Some(3.0));
        assert_eq!(percentile(&xs, 0.0), Some(1.0));
        assert!((percentile(&xs, 0.16).unwrap() - 1.64).abs() < 1e-12);
        assert_eq!(percentile(&[], 0.5), None);
    }

    #[test]
    fn synthetic_counts() {
        let shells = shell_partition(4, 4).unwrap();
        let mask = vec![true; 4];
        let obs = observable_shells("o", vec![0.0, 0.0, 1.0, 1.0], &shells, &mask);
        assert_eq!(obs.f, vec![0.5]);
        let counts: Vec<usize> = [0.0, 0.4, 0.6].iter().map(|&x| count_above(&obs.deviations, &mask, x)).collect();
        assert_eq!(counts, vec![4, 4, 0]);
        let flat = observable_shells("o", vec![0.3; 4], &shells, &mask);
        assert_eq!(count_above(&flat.deviations, &mask, 0.0), 0);
        let masked = [true, false, true, true];
        let obs = observable_shells("o", vec![0.0, 9.0, 1.0, 1.0], &shells, &masked);
        assert!((obs.f[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(count_above(&obs.deviations, &masked, 0.5), 1);
    }

    #[test]
    fn qubit_values_and_identity() {
        let rho = DensityMatrix::<f64>::from_bloch([0.6, 0.0, 0.0]).unwrap();
        let sz = HermitianOperator::from_real_diagonal(&[1.0, -1.0]);
        let leaf = optimal_ensemble(&rho, &sz).unwrap();
        let v = shell_values(&leaf, &sz).unwrap();
        assert!((v[0] + 0.8).abs() < 1e-14 && (v[1] - 0.8).abs() < 1e-14);
        let ones = shell_values(&leaf, &HermitianOperator::identity(2)).unwrap();
        assert!(ones.iter().all(|x| (x - 1.0).abs() < 1e-14));
        let s = sandwich_values(&leaf, &rho, &sz).unwrap();
        assert!((s[0] - v[0]).abs() < 1e-14 && (s[1] - v[1]).abs() < 1e-14);
    }

    #[test]
    fn commuting_leaf_ratio_and_curves() {
        let rho = DensityMatrix::<f64>::maximally_mixed(4).unwrap();
        let h = HermitianOperator::from_real_diagonal(&[0.0, 1.0, 2.5, -1.0]);
        let leaf = optimal_ensemble(&rho, &h).unwrap();
        assert!((incoherence_ratio(&leaf).unwrap() - 1.0).abs() < 1e-14);
        let obs: Vec<(&str, &dyn Observable<f64>)> = vec![("h", &h)];
        let (report, curves) = diagnostics_for(&leaf, &obs, 2, &DeltaGrid::default(), RunLabels::default()).unwrap();
        assert_eq!(report.observable("h").unwrap().values, vec![-1.0, 0.0, 1.0, 2.5]);
        assert_eq!(report.observable("h").unwrap().f, vec![-0.5, 1.75]);
        let c = &curves[0];
        assert_eq!(c.deltas.len(), 201);
        assert_eq!(*c.deltas.last().unwrap(), 0.75);
        assert_eq!(c.counts[0], 4);
        assert_eq!(*c.counts.last().unwrap(), 0);
        assert!(c.counts.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(c.log_d_counts[0], Some(1.0));
        assert_eq!(*c.log_d_counts.last().unwrap(), None);
        let csv = curve_csv(c);
        assert!(csv.starts_with("delta,N,log_d_N\n0,4,1\n"));
        assert!(csv.ends_with("0.75,0,\n"));
        assert!(DeltaGrid::Explicit(vec![0.1, 0.2]).resolve(1.0).is_err());
    }
}
