use faer::Mat;

use crate::error::{check_dims, Result};
use crate::operator::{DensityMatrix, HermitianOperator};
use crate::scalar::{Real, C};

/// Solves `½{H_ρ, ρ} = √ρ H √ρ` for `H_ρ`.
///
/// In the eigenbasis of ρ the equation is entrywise:
/// `(H_ρ)_kl = 2√(λ_k λ_l)/(λ_k + λ_l) · H̃_kl` with `H̃ = V^† H V`.
/// The prefactor never exceeds one.
pub fn state_hamiltonian<T: Real>(rho: &DensityMatrix<T>, h: &HermitianOperator<T>) -> Result<HermitianOperator<T>> {
    let tilde = state_hamiltonian_in_eigenbasis(rho, h, rho.rank_floor())?;
    tilde.from_basis(rho.spectral().eigenvectors())
}

/// `H_ρ` expressed in the eigenbasis of ρ (columns of `rho.spectral().eigenvectors()`).
pub(crate) fn state_hamiltonian_in_eigenbasis<T: Real>(
    rho: &DensityMatrix<T>,
    h: &HermitianOperator<T>,
    rank_floor: f64,
) -> Result<HermitianOperator<T>> {
    check_dims("state Hamiltonian", rho.dim(), h.dim())?;
    rho.require_full_rank(rank_floor)?;
    let h_tilde = h.in_basis(rho.spectral().eigenvectors())?;
    let lambdas = rho.populations();
    Ok(HermitianOperator::symmetrized(weight_by_populations(h_tilde.as_mat(), &lambdas)))
}

fn weight_by_populations<T: Real>(h_tilde: faer::MatRef<'_, C<T>>, lambdas: &[T]) -> Mat<C<T>> {
    let roots: Vec<T> = lambdas.iter().map(|l| l.sqrt()).collect();
    let two = T::lit(2.0);
    Mat::from_fn(lambdas.len(), lambdas.len(), |k, l| {
        let w = if k == l { T::one() } else { two * roots[k] * roots[l] / (lambdas[k] + lambdas[l]) };
        h_tilde[(k, l)] * w
    })
}
