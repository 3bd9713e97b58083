use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use super::state_hamiltonian::state_hamiltonian_in_eigenbasis;
use crate::error::{check_dims, Error, Result};
use crate::linalg;
use crate::operator::{
    column_expectations, eigenvalues, fix_phases, spectral_decompose, DensityMatrix, HermitianOperator, Observable,
    PureState,
};
use crate::scalar::{xlogx_neg, Real, C};
use crate::tolerance::Tolerances;

/// Knobs for leaf construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FoliationOptions {
    /// Relative gap of `H_ρ` below which the family is not unique.
    pub gap_tol: f64,
    /// Relative floor `λ_min/λ_max` required of the source state.
    pub rank_floor: f64,
    /// Proceed (flagging the leaf) instead of failing on a degenerate `H_ρ`.
    pub allow_degenerate: bool,
    /// Populations below this mark their state as unreliable.
    pub population_floor: f64,
}

impl Default for FoliationOptions {
    fn default() -> Self {
        let t = Tolerances::default();
        Self {
            gap_tol: t.gap_tol,
            rank_floor: t.rank_floor,
            allow_degenerate: false,
            population_floor: t.population_floor,
        }
    }
}

impl FoliationOptions {
    pub fn for_precision<T: Real>() -> Self {
        let t = Tolerances::for_precision::<T>();
        Self {
            gap_tol: t.gap_tol,
            rank_floor: t.rank_floor,
            allow_degenerate: false,
            population_floor: t.population_floor,
        }
    }
}

/// Diagnostics recorded while building a [`Leaf`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LeafFlags {
    /// `H_ρ` was degenerate and the family is one arbitrary choice.
    pub non_unique: bool,
    /// Indices whose population fell below the floor.
    pub unreliable: Vec<usize>,
    /// Minimum consecutive gap of the leaf energies over their spread.
    pub min_relative_gap: f64,
}

/// The minimum-variance pure-state family of a full-rank state.
///
/// Holds `H_ρ`, its eigenvalues `E_i` (ascending) and eigenvectors `Ψ_i`, the
/// populations `p_i = <Ψ_i|ρ|Ψ_i>`, and the normalized states
/// `φ_i = √ρ Ψ_i / √p_i` as columns of one matrix. The family and energies
/// are shared by every state on the leaf; populations belong to the source.
#[derive(Clone, Debug)]
pub struct Leaf<T: Real> {
    h_rho: HermitianOperator<T>,
    energies: Vec<T>,
    populations: Vec<T>,
    states: Mat<C<T>>,
    psi: Mat<C<T>>,
    source_energy: T,
    flags: LeafFlags,
}

/// Minimum gap between consecutive sorted values divided by the spread
/// (zero for a zero-width spectrum).
pub fn relative_gap<T: Real>(sorted: &[T]) -> T {
    if sorted.len() < 2 {
        return T::zero();
    }
    let width = sorted[sorted.len() - 1] - sorted[0];
    if !(width > T::zero()) {
        return T::zero();
    }
    let min_gap = sorted.windows(2).map(|w| w[1] - w[0]).fold(T::infinity(), |a, b| a.min(b));
    min_gap / width
}

/// [`relative_gap`] of the spectrum of an operator.
pub fn nondegeneracy_gap<T: Real>(h_rho: &HermitianOperator<T>) -> Result<T> {
    Ok(relative_gap(&eigenvalues(h_rho)?))
}

/// Builds the optimal (minimum average variance) ensemble of `rho` for `h`.
pub fn optimal_ensemble<T: Real>(rho: &DensityMatrix<T>, h: &HermitianOperator<T>) -> Result<Leaf<T>> {
    optimal_ensemble_with(rho, h, &FoliationOptions::for_precision::<T>())
}

pub fn optimal_ensemble_with<T: Real>(
    rho: &DensityMatrix<T>,
    h: &HermitianOperator<T>,
    opts: &FoliationOptions,
) -> Result<Leaf<T>> {
    check_dims("optimal ensemble", rho.dim(), h.dim())?;
    let d = rho.dim();
    let x = state_hamiltonian_in_eigenbasis(rho, h, opts.rank_floor)?;
    let v = rho.spectral().eigenvectors();
    let lambdas = rho.populations();

    // tr[ρH] = Σ λ_k H̃_kk and H̃_kk = X_kk.
    let source_energy = (0..d).fold(T::zero(), |acc, k| acc + lambdas[k] * x.entry(k, k).re);

    let evd = spectral_decompose(&x)?;
    let energies = evd.eigenvalues().to_vec();
    let gap = relative_gap(&energies);
    let non_unique = d > 1 && gap < T::lit(opts.gap_tol);
    if non_unique && !opts.allow_degenerate {
        return Err(Error::DegenerateStateHamiltonian { gap: gap.to_f64_lossy(), tol: opts.gap_tol });
    }
    let w = evd.eigenvectors();

    let populations: Vec<T> =
        (0..d).map(|i| (0..d).fold(T::zero(), |acc, k| acc + lambdas[k] * w[(k, i)].norm_sqr())).collect();
    let roots: Vec<T> = lambdas.iter().map(|l| l.sqrt()).collect();
    let floor = T::lit(opts.population_floor);
    let unreliable: Vec<usize> = (0..d).filter(|&i| !(populations[i] >= floor)).collect();

    // φ̃_i = diag(√λ) W_i / √p_i in the eigenbasis of ρ.
    let phi_tilde = Mat::from_fn(d, d, |k, i| {
        let p = populations[i];
        if p > T::zero() {
            w[(k, i)] * (roots[k] / p.sqrt())
        } else {
            w[(k, i)]
        }
    });
    let mut states = linalg::mul(v, phi_tilde.as_ref());
    let mut psi = linalg::mul(v, w);
    normalize_columns(&mut states);
    align_phases(&mut states, &mut psi);

    let h_rho = x.from_basis(v)?;
    Ok(Leaf {
        h_rho,
        energies,
        populations,
        states,
        psi,
        source_energy,
        flags: LeafFlags { non_unique, unreliable, min_relative_gap: gap.to_f64_lossy() },
    })
}

fn normalize_columns<T: Real>(m: &mut Mat<C<T>>) {
    for j in 0..m.ncols() {
        let col = m.col_as_slice_mut(j);
        let n = col.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
        if n > T::zero() {
            for z in col.iter_mut() {
                *z /= n;
            }
        }
    }
}

/// Applies the eigenvector phase convention to the φ columns and carries the
/// same phase over to the matching Ψ columns.
fn align_phases<T: Real>(states: &mut Mat<C<T>>, psi: &mut Mat<C<T>>) {
    let before: Vec<C<T>> = (0..states.ncols()).map(|j| pivot_entry(states.col_as_slice(j))).collect();
    fix_phases(states);
    for j in 0..states.ncols() {
        let z = before[j];
        if z.norm() > T::zero() {
            let phase = z.conj() / z.norm();
            for x in psi.col_as_slice_mut(j) {
                *x *= phase;
            }
        }
    }
}

fn pivot_entry<T: Real>(col: &[C<T>]) -> C<T> {
    let max = col.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    let threshold = max * (T::one() - T::lit(1e-10));
    col.iter().copied().find(|z| z.norm() >= threshold).unwrap_or(C::new(T::one(), T::zero()))
}

impl<T: Real> Leaf<T> {
    #[inline]
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// The state Hamiltonian `H_ρ` of the source state.
    pub fn h_rho(&self) -> &HermitianOperator<T> {
        &self.h_rho
    }

    /// Leaf energies `E_i = <φ_i|H|φ_i>`, ascending.
    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    /// Source populations `p_i`, aligned with [`energies`](Self::energies).
    pub fn populations(&self) -> &[T] {
        &self.populations
    }

    /// Matrix whose columns are the family states `φ_i`.
    pub fn states(&self) -> MatRef<'_, C<T>> {
        self.states.as_ref()
    }

    pub fn state(&self, i: usize) -> Result<PureState<T>> {
        if i >= self.dim() {
            return Err(Error::InvalidParameter(format!("leaf index {i} out of range")));
        }
        PureState::from_column(self.states(), i)
    }

    /// Eigenvectors `Ψ_i` of `H_ρ`, as columns.
    pub fn psi(&self) -> MatRef<'_, C<T>> {
        self.psi.as_ref()
    }

    /// `tr[ρH]` of the source state.
    pub fn source_energy(&self) -> T {
        self.source_energy
    }

    pub fn flags(&self) -> &LeafFlags {
        &self.flags
    }

    /// Mask of states usable in statistics (population above the floor).
    pub fn reliable_mask(&self) -> Vec<bool> {
        let mut mask = vec![true; self.dim()];
        for &i in &self.flags.unreliable {
            mask[i] = false;
        }
        mask
    }

    /// `Σ_i q_i |φ_i><φ_i|` for weights that are assumed normalized.
    pub(crate) fn mixture(&self, weights: &[T]) -> HermitianOperator<T> {
        let scaled = linalg::scale_columns(self.states(), weights);
        HermitianOperator::symmetrized(linalg::mul_adj_rhs(scaled.as_ref(), self.states()))
    }

    /// Gram matrix `<φ_i|φ_j>`.
    pub fn gram(&self) -> Mat<C<T>> {
        linalg::mul_adj_lhs(self.states(), self.states())
    }

    /// `<φ_i|O|φ_i>` for every family member.
    pub fn expectations<O: Observable<T> + ?Sized>(&self, o: &O) -> Result<Vec<T>> {
        check_dims("leaf expectation", self.dim(), o.dim())?;
        column_expectations(o, self.states())
    }
}

/// Uniform-weight state of the leaf, `(1/d) Σ_i |φ_i><φ_i|`.
pub fn barycenter<T: Real>(leaf: &Leaf<T>) -> Result<DensityMatrix<T>> {
    DensityMatrix::new(barycenter_operator(leaf))
}

fn barycenter_operator<T: Real>(leaf: &Leaf<T>) -> HermitianOperator<T> {
    let w = T::one() / T::from_usize(leaf.dim()).expect("dimension fits");
    leaf.mixture(&vec![w; leaf.dim()])
}

/// Von Neumann entropy of the barycenter, in nats (`0 <= J <= ln d`).
pub fn incoherence<T: Real>(leaf: &Leaf<T>) -> Result<T> {
    let spectrum = eigenvalues(&barycenter_operator(leaf))?;
    let s = spectrum.iter().fold(T::zero(), |a, &x| a + xlogx_neg(x));
    let max = T::from_usize(leaf.dim()).expect("fits").ln();
    Ok(s.max(T::zero()).min(max))
}

/// Shannon entropy of the source populations, in nats.
pub fn leaf_entropy<T: Real>(leaf: &Leaf<T>) -> T {
    leaf.populations.iter().fold(T::zero(), |a, &p| a + xlogx_neg(p))
}
