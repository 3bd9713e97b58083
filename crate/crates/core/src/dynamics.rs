//! Unitary evolution in the eigenbasis of the generator, and comparison of
//! mixed-state dynamics with a single representative family member.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::foliation::Leaf;
use crate::linalg;
use crate::operator::{
    spectral_decompose, DensityMatrix, HermitianOperator, Observable, PureState, SpectralDecomposition,
};
use crate::scalar::{Real, C};
use crate::spinchain::ObservableCatalog;
use crate::typicality::{percentile, ShellReport};

/// `t = 0, 0.25, ..., 10`.
pub fn default_times() -> Vec<f64> {
    (0..=40).map(|k| k as f64 * 0.25).collect()
}

/// `exp(-iHt)` through one eigendecomposition of `H`, reused for all `t`.
#[derive(Clone, Debug)]
pub struct Propagator<T: Real> {
    spectral: SpectralDecomposition<T>,
}

impl<T: Real> Propagator<T> {
    pub fn new(h: &HermitianOperator<T>) -> Result<Self> {
        Ok(Self { spectral: spectral_decompose(h)? })
    }

    pub fn from_spectral(spectral: SpectralDecomposition<T>) -> Self {
        Self { spectral }
    }

    pub fn spectral(&self) -> &SpectralDecomposition<T> {
        &self.spectral
    }

    pub fn dim(&self) -> usize {
        self.spectral.dim()
    }

    /// `exp(-i E_m t)` for every level.
    pub fn phases(&self, t: T) -> Vec<C<T>> {
        phases(self.spectral.eigenvalues(), t)
    }

    /// Dense `V exp(-iΛt) V^†`.
    pub fn unitary(&self, t: T) -> Mat<C<T>> {
        let v = self.spectral.eigenvectors();
        let ph = self.phases(t);
        let vp = Mat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * ph[j]);
        linalg::mul_adj_rhs(vp.as_ref(), v)
    }

    pub fn evolve_pure(&self, psi: &PureState<T>, t: T) -> Result<PureState<T>> {
        check_dims("pure evolution", self.dim(), psi.dim())?;
        let v = self.spectral.eigenvectors();
        let coeffs = linalg::mul_adj_lhs(v, psi.as_column());
        let ph = self.phases(t);
        let rotated = Mat::from_fn(self.dim(), 1, |m, _| coeffs[(m, 0)] * ph[m]);
        let out = linalg::mul(v, rotated.as_ref());
        PureState::normalized(out.col_as_slice(0).to_vec())
    }

    pub fn evolve_density(&self, rho: &DensityMatrix<T>, t: T) -> Result<DensityMatrix<T>> {
        check_dims("density evolution", self.dim(), rho.dim())?;
        Ok(rho.unitary_image(self.unitary(t).as_ref()))
    }
}

fn phases<T: Real>(energies: &[T], t: T) -> Vec<C<T>> {
    energies.iter().map(|&e| C::from_polar(T::one(), -e * t)).collect()
}

/// `V exp(-iΛt) V^† ψ`.
pub fn evolve_pure<T: Real>(h: &SpectralDecomposition<T>, psi: &PureState<T>, t: T) -> Result<PureState<T>> {
    Propagator::from_spectral(h.clone()).evolve_pure(psi, t)
}

/// `U ρ U^†` with `U = exp(-iHt)`.
pub fn evolve_density<T: Real>(h: &SpectralDecomposition<T>, rho: &DensityMatrix<T>, t: T) -> Result<DensityMatrix<T>> {
    Propagator::from_spectral(h.clone()).evolve_density(rho, t)
}

/// Index minimizing `|E_i - target|`; ties go to the smaller index.
pub fn closest_energy_index<T: Real>(energies: &[T], target: T) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, &e) in energies.iter().enumerate() {
        let gap = (e - target).abs();
        if best.map_or(true, |(_, g)| gap < g) {
            best = Some((i, gap));
        }
    }
    best.map(|(i, _)| i)
}

/// Family member closest in energy to `target` (default: the source energy).
pub fn representative_state<T: Real>(leaf: &Leaf<T>, target: Option<T>) -> Result<(usize, PureState<T>)> {
    let target = target.unwrap_or(leaf.source_energy());
    let i = closest_energy_index(leaf.energies(), target)
        .ok_or_else(|| Error::NumericalError("leaf has no states".into()))?;
    Ok((i, leaf.state(i)?))
}

/// Exact mixed-state curve against the representative prediction for one observable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionComparison {
    pub observable_label: String,
    pub times: Vec<f64>,
    pub exact: Vec<f64>,
    pub representative: Vec<f64>,
    pub band_low: Vec<f64>,
    pub band_high: Vec<f64>,
    pub representative_index: usize,
    pub representative_energy: f64,
}

impl EvolutionComparison {
    /// Fraction of time points where the exact curve lies inside the band
    /// (edges widened by rounding slack).
    pub fn coverage(&self) -> f64 {
        let inside = (0..self.times.len())
            .filter(|&k| {
                let slack = 1e-12 * self.exact[k].abs().max(1.0);
                self.band_low[k] - slack <= self.exact[k] && self.exact[k] <= self.band_high[k] + slack
            })
            .count();
        inside as f64 / self.times.len().max(1) as f64
    }

    /// `t,exact,representative,band_low,band_high` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,exact,representative,band_low,band_high\n");
        for k in 0..self.times.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                self.times[k], self.exact[k], self.representative[k], self.band_low[k], self.band_high[k]
            )
            .expect("writing to a String");
        }
        out
    }

    pub fn write_csv(&self, dir: &Path, stem: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{stem}.csv"));
        std::fs::write(&path, self.to_csv())?;
        Ok(path)
    }
}

/// [`compare_evolutions`] over a whole catalog.
pub fn compare_catalog<T: Real>(
    leaf: &Leaf<T>,
    rho: &DensityMatrix<T>,
    propagator: &Propagator<T>,
    catalog: &ObservableCatalog,
    times: &[f64],
    shells: &ShellReport,
) -> Result<Vec<EvolutionComparison>> {
    let observables: Vec<(&str, &dyn Observable<T>)> =
        catalog.iter().map(|e| (e.label.as_str(), &e.observable as &dyn Observable<T>)).collect();
    compare_evolutions(leaf, rho, propagator, &observables, times, shells)
}

/// Evolves `rho` and the representative family member under the propagator
/// and records `tr[ρ(t)O]`, `<φ(t)|O|φ(t)>` and a constant-offset band.
///
/// The band is the 16th-84th percentile spread of `<φ_j|O|φ_j>` over the
/// representative's shell at `t = 0`, taken relative to the shell mean and
/// attached to the representative curve. Results are sorted by label.
pub fn compare_evolutions<T: Real>(
    leaf: &Leaf<T>,
    rho: &DensityMatrix<T>,
    propagator: &Propagator<T>,
    observables: &[(&str, &dyn Observable<T>)],
    times: &[f64],
    shells: &ShellReport,
) -> Result<Vec<EvolutionComparison>> {
    let d = leaf.dim();
    check_dims("evolution comparison", d, rho.dim())?;
    check_dims("evolution comparison", d, propagator.dim())?;
    check_dims("shell report", d, shells.dim)?;
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("time grid must be finite".into()));
    }
    let v = propagator.spectral().eigenvectors();
    let energies = propagator.spectral().eigenvalues();
    let (rep, rep_state) = representative_state(leaf, None)?;
    let shell = shells.shell_of(rep).expect("index within leaf");
    let members: Vec<usize> = shells.shell_bounds[shell].clone().filter(|&i| shells.mask[i]).collect();
    let member_states = Mat::from_fn(d, members.len(), |i, j| leaf.states()[(i, members[j])]);

    let rho_tilde = linalg::conjugate_by(rho.op().as_mat(), v);
    let psi_tilde = linalg::mul_adj_lhs(v, rep_state.as_column());
    let psi_tilde = psi_tilde.col_as_slice(0);

    let mut out = Vec::with_capacity(observables.len());
    for (label, o) in observables {
        check_dims("observable", d, o.dim())?;
        let ov = o.apply(v)?;
        let o_tilde = linalg::mul_adj_lhs(v, ov.as_ref());
        drop(ov);

        let (lo, hi) = band_offsets(*o, member_states.as_ref())?;
        let curves: Vec<(f64, f64)> = times
            .par_iter()
            .map(|&t| {
                let a = phases(energies, T::lit(t));
                (exact_value(&rho_tilde, &o_tilde, &a), representative_value(psi_tilde, &o_tilde, &a))
            })
            .collect();
        let (exact, representative): (Vec<f64>, Vec<f64>) = curves.into_iter().unzip();
        out.push(EvolutionComparison {
            observable_label: label.to_string(),
            times: times.to_vec(),
            band_low: representative.iter().map(|r| r + lo).collect(),
            band_high: representative.iter().map(|r| r + hi).collect(),
            exact,
            representative,
            representative_index: rep,
            representative_energy: leaf.energies()[rep].to_f64_lossy(),
        });
    }
    out.sort_by(|a, b| a.observable_label.cmp(&b.observable_label));
    Ok(out)
}

fn band_offsets<T: Real>(o: &dyn Observable<T>, members: faer::MatRef<'_, C<T>>) -> Result<(f64, f64)> {
    if members.ncols() == 0 {
        return Ok((0.0, 0.0));
    }
    let mut vals: Vec<f64> =
        crate::operator::column_expectations(o, members)?.iter().map(|x| x.to_f64_lossy()).collect();
    vals.sort_by(f64::total_cmp);
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let lo = percentile(&vals, 0.16).expect("non-empty") - mean;
    let hi = percentile(&vals, 0.84).expect("non-empty") - mean;
    Ok((lo.min(hi), lo.max(hi)))
}

/// `Σ_{m,n} a_m ρ̃_mn conj(a_n) Õ_nm`, reading only columns.
fn exact_value<T: Real>(rho_tilde: &Mat<C<T>>, o_tilde: &Mat<C<T>>, a: &[C<T>]) -> f64 {
    let mut acc = C::new(T::zero(), T::zero());
    for m in 0..a.len() {
        // ρ̃_mn = conj(ρ̃_nm)
        let rc = rho_tilde.col_as_slice(m);
        let oc = o_tilde.col_as_slice(m);
        let mut inner = C::new(T::zero(), T::zero());
        for n in 0..a.len() {
            inner += (rc[n] * a[n]).conj() * oc[n];
        }
        acc += a[m] * inner;
    }
    acc.re.to_f64_lossy()
}

/// `c^† Õ c` with `c = a ∘ ψ̃`.
fn representative_value<T: Real>(psi_tilde: &[C<T>], o_tilde: &Mat<C<T>>, a: &[C<T>]) -> f64 {
    let c: Vec<C<T>> = psi_tilde.iter().zip(a).map(|(&p, &x)| p * x).collect();
    let mut acc = C::new(T::zero(), T::zero());
    for n in 0..c.len() {
        let oc = o_tilde.col_as_slice(n);
        let mut inner = C::new(T::zero(), T::zero());
        for m in 0..c.len() {
            inner += c[m].conj() * oc[m];
        }
        acc += inner * c[n];
    }
    acc.re.to_f64_lossy()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foliation::optimal_ensemble;
    use crate::operator::{eigenvalues, expectation};
    use crate::random::{random_full_rank_density, random_hermitian, random_pure_state};
    use crate::typicality::{diagnostics_for, DeltaGrid, RunLabels};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closest_index_rules() {
        assert_eq!(closest_energy_index(&[-0.8, 0.8], 0.7), Some(1));
        assert_eq!(closest_energy_index(&[-0.8, 0.8], 0.0), Some(0));
        assert_eq!(closest_energy_index::<f64>(&[], 0.0), None);
        let rho = DensityMatrix::<f64>::from_bloch([0.6, 0.0, 0.0]).unwrap();
        let leaf = optimal_ensemble(&rho, &HermitianOperator::from_real_diagonal(&[1.0, -1.0])).unwrap();
        let (i, s) = representative_state(&leaf, None).unwrap();
        assert_eq!(i, 0);
        assert!((s.bloch_vector().unwrap()[2] + 0.8).abs() < 1e-14);
    }

    #[test]
    fn pure_evolution_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_hermitian::<f64, _>(&mut rng, 6);
        let prop = Propagator::new(&h).unwrap();
        let psi = random_pure_state::<f64, _>(&mut rng, 6).unwrap();
        let same = prop.evolve_pure(&psi, 0.0).unwrap();
        assert!((same.overlap(&psi).unwrap() - 1.0).abs() < 1e-13);
        let later = prop.evolve_pure(&psi, 1.7).unwrap();
        let e0 = expectation(&h, &psi).unwrap();
        assert!((expectation(&h, &later).unwrap() - e0).abs() < 1e-12);
        // eigenstate: only a global phase
        let eig = PureState::from_column(prop.spectral().eigenvectors(), 2).unwrap();
        let o = random_hermitian::<f64, _>(&mut rng, 6);
        let before = expectation(&o, &eig).unwrap();
        assert!((expectation(&o, &prop.evolve_pure(&eig, 3.1).unwrap()).unwrap() - before).abs() < 1e-12);
        // agrees with the dense unitary
        let u = prop.unitary(1.7);
        let direct = linalg::mul(u.as_ref(), psi.as_column());
        let got = later.as_column();
        assert!(linalg::frobenius_diff(direct.as_ref(), got) < 1e-12);
    }

    #[test]
    fn density_evolution_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = random_hermitian::<f64, _>(&mut rng, 5);
        let spec = spectral_decompose(&h).unwrap();
        let rho = random_full_rank_density::<f64, _>(&mut rng, 5, 0.01).unwrap();
        assert!(evolve_density(&spec, &rho, 0.0).unwrap().distance(&rho).unwrap() < 1e-13);
        let later = evolve_density(&spec, &rho, 2.2).unwrap();
        assert!((later.trace() - 1.0).abs() < 1e-12);
        let a = eigenvalues(later.op()).unwrap();
        for (x, y) in a.iter().zip(rho.spectral().eigenvalues()) {
            assert!((x - y).abs() < 1e-12);
        }
        let gibbs = crate::operator::boltzmann_from_spectrum(&spec, 0.9).unwrap();
        assert!(evolve_density(&spec, &gibbs, 4.0).unwrap().distance(&gibbs).unwrap() < 1e-12);
    }

    #[test]
    fn comparison_sanity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let d = 8;
        let h = random_hermitian::<f64, _>(&mut rng, d);
        let rho = random_full_rank_density::<f64, _>(&mut rng, d, 0.01).unwrap();
        let leaf = optimal_ensemble(&rho, &h).unwrap();
        let id = HermitianOperator::<f64>::identity(d);
        let o = random_hermitian::<f64, _>(&mut rng, d);
        let obs: Vec<(&str, &dyn Observable<f64>)> = vec![("o", &o), ("id", &id), ("h", &h)];
        let (report, _) = diagnostics_for(&leaf, &obs, 3, &DeltaGrid::default(), RunLabels::default()).unwrap();
        let prop = Propagator::new(&h).unwrap();
        let times = default_times();
        let cmp = compare_evolutions(&leaf, &rho, &prop, &obs, &times, &report).unwrap();
        let labels: Vec<&str> = cmp.iter().map(|c| c.observable_label.as_str()).collect();
        assert_eq!(labels, vec!["h", "id", "o"]);
        let ident = &cmp[1];
        assert!(ident.exact.iter().chain(&ident.representative).all(|x| (x - 1.0).abs() < 1e-12));
        assert_eq!(ident.coverage(), 1.0);
        let energy = &cmp[0];
        assert!(energy.exact.iter().all(|x| (x - energy.exact[0]).abs() < 1e-12));
        assert!(energy.representative.iter().all(|x| (x - energy.representative[0]).abs() < 1e-12));
        assert!((energy.representative[0] - energy.representative_energy).abs() < 1e-12);
        // spot-check against explicit evolution
        let k = 7;
        let t = times[k];
        let rho_t = prop.evolve_density(&rho, t).unwrap();
        assert!((expectation(&o, &rho_t).unwrap() - cmp[2].exact[k]).abs() < 1e-12);
        let phi_t = prop.evolve_pure(&leaf.state(cmp[2].representative_index).unwrap(), t).unwrap();
        assert!((expectation(&o, &phi_t).unwrap() - cmp[2].representative[k]).abs() < 1e-12);
        assert!(cmp[2].band_low.iter().zip(&cmp[2].band_high).all(|(a, b)| a <= b));
        let csv = cmp[1].to_csv();
        assert!(csv.starts_with("t,exact,representative,band_low,band_high\n0,"));
        assert_eq!(csv.lines().count(), 42);
    }
}
