use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{check_dims, Error, Result};
use crate::linalg;
use crate::operator::{column_variances, DensityMatrix, HermitianOperator};
use crate::random::haar_unitary;
use crate::scalar::{Real, C};

use super::optimal_ensemble;

/// Largest dimension accepted by [`decomposition_variance_oracle`].
pub const ORACLE_MAX_DIM: usize = 8;

/// Smallest average variance found by [`decomposition_variance_samples`].
pub fn decomposition_variance_oracle<T: Real>(
    rho: &DensityMatrix<T>,
    h: &HermitianOperator<T>,
    samples: usize,
    seed: u64,
) -> Result<T> {
    let vals = decomposition_variance_samples(rho, h, samples, seed)?;
    Ok(vals.into_iter().fold(T::infinity(), |a, b| a.min(b)))
}

/// Average variance `Σ_j q_j Var_{ψ_j}(H)` of random `d`-member
/// decompositions of `rho`.
///
/// Each sample mixes the optimal decomposition `{√p_i |φ_i>}` (or, when
/// `rho` has no unique leaf, the spectral one) with an independent Haar
/// unitary. Members with vanishing weight contribute nothing.
/// Deterministic in `seed`.
pub fn decomposition_variance_samples<T: Real>(
    rho: &DensityMatrix<T>,
    h: &HermitianOperator<T>,
    samples: usize,
    seed: u64,
) -> Result<Vec<T>> {
    check_dims("variance oracle", rho.dim(), h.dim())?;
    let d = rho.dim();
    if d > ORACLE_MAX_DIM {
        return Err(Error::InvalidParameter(format!("variance oracle supports d <= {ORACLE_MAX_DIM}, got {d}")));
    }
    let base = reference_decomposition(rho, h);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let tiny = T::epsilon() * T::epsilon();
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let u = haar_unitary::<T, _>(&mut rng, d);
        // ψ̃_j = Σ_k U_jk b_k, i.e. base · Uᵀ
        let ut = u.transpose().to_owned();
        let mut members = linalg::mul(base.as_ref(), ut.as_ref());
        let mut weights = vec![T::zero(); d];
        for j in 0..d {
            let col = members.col_as_slice_mut(j);
            let w = col.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
            weights[j] = w;
            if w > tiny {
                let n = w.sqrt();
                for z in col.iter_mut() {
                    *z /= n;
                }
            }
        }
        let vars = column_variances(h, members.as_ref())?;
        let total = (0..d).filter(|&j| weights[j] > tiny).fold(T::zero(), |a, j| a + weights[j] * vars[j]);
        out.push(total);
    }
    Ok(out)
}

/// Columns `√p_i φ_i` of the optimal decomposition, or `√λ_k |k>`.
fn reference_decomposition<T: Real>(rho: &DensityMatrix<T>, h: &HermitianOperator<T>) -> Mat<C<T>> {
    match optimal_ensemble(rho, h) {
        Ok(leaf) => {
            let roots: Vec<T> = leaf.populations().iter().map(|p| p.sqrt()).collect();
            linalg::scale_columns(leaf.states(), &roots)
        }
        Err(_) => {
            let roots: Vec<T> = rho.populations().iter().map(|l| l.sqrt()).collect();
            linalg::scale_columns(rho.spectral().eigenvectors(), &roots)
        }
    }
}
