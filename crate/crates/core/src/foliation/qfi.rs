use crate::error::{check_dims, Result};
use crate::operator::{column_variances, DensityMatrix, HermitianOperator};
use crate::scalar::Real;

use super::Leaf;

/// Quantum Fisher information of `rho` for the generator `h`:
/// `F = 2 Σ_{k,l} (λ_k - λ_l)² / (λ_k + λ_l) |<k|H|l>|²`.
///
/// Works for rank-deficient states; pairs whose population sum underflows
/// are skipped.
pub fn qfi<T: Real>(rho: &DensityMatrix<T>, h: &HermitianOperator<T>) -> Result<T> {
    check_dims("quantum Fisher information", rho.dim(), h.dim())?;
    let h_tilde = h.in_basis(rho.spectral().eigenvectors())?;
    let lambdas = rho.populations();
    let floor = T::min_positive_value();
    let d = rho.dim();
    let mut acc = T::zero();
    for l in 0..d {
        for k in 0..d {
            let sum = lambdas[k] + lambdas[l];
            if k == l || sum < floor {
                continue;
            }
            let diff = lambdas[k] - lambdas[l];
            acc += diff * diff / sum * h_tilde.entry(k, l).norm_sqr();
        }
    }
    Ok(acc + acc)
}

/// `Σ_i p_i Var_{φ_i}(H)` over the family of a leaf.
pub fn average_variance<T: Real>(leaf: &Leaf<T>, h: &HermitianOperator<T>) -> Result<T> {
    check_dims("average variance", leaf.dim(), h.dim())?;
    let vars = column_variances(h, leaf.states())?;
    Ok(vars.iter().zip(leaf.populations()).fold(T::zero(), |a, (&v, &p)| a + p * v))
}
