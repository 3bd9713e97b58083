use crate::error::{check_dims, Error, Result};
use crate::operator::{gibbs_weights, DensityMatrix};
use crate::scalar::Real;

use super::Leaf;

/// `Σ_i q_i |φ_i><φ_i|` for non-negative weights, normalized here.
///
/// Weights with zeros leave the full-rank domain; check
/// [`DensityMatrix::is_full_rank`] on the result.
pub fn leaf_transport<T: Real>(leaf: &Leaf<T>, q: &[T]) -> Result<DensityMatrix<T>> {
    check_dims("leaf weights", leaf.dim(), q.len())?;
    if q.iter().any(|w| !w.is_finite() || *w < T::zero()) {
        return Err(Error::InvalidParameter("leaf weights must be finite and non-negative".into()));
    }
    let total = q.iter().fold(T::zero(), |a, &w| a + w);
    if !(total > T::zero()) {
        return Err(Error::InvalidParameter("leaf weights sum to zero".into()));
    }
    let q: Vec<T> = q.iter().map(|&w| w / total).collect();
    DensityMatrix::new(leaf.mixture(&q))
}

/// Canonical state on the leaf, weights `∝ exp(-β E_i)`.
pub fn leaf_canonical<T: Real>(leaf: &Leaf<T>, beta: T) -> Result<DensityMatrix<T>> {
    if !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("inverse temperature must be finite, got {beta}")));
    }
    leaf_transport(leaf, &gibbs_weights(leaf.energies(), beta))
}

/// Uniform mixture of the family members with energy in `[lo, hi]`.
pub fn leaf_microcanonical<T: Real>(leaf: &Leaf<T>, lo: T, hi: T) -> Result<DensityMatrix<T>> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidParameter(format!("invalid energy window [{lo}, {hi}]")));
    }
    let q: Vec<T> = leaf.energies().iter().map(|&e| if e >= lo && e <= hi { T::one() } else { T::zero() }).collect();
    if q.iter().all(|w| *w == T::zero()) {
        return Err(Error::EmptyShell { lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() });
    }
    leaf_transport(leaf, &q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foliation::{barycenter, optimal_ensemble, state_hamiltonian};
    use crate::operator::{HermitianOperator, ScalarFn};
    use crate::random::{random_full_rank_density, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn qubit_leaf() -> Leaf<f64> {
        let rho = DensityMatrix::from_bloch([0.6, 0.0, 0.0]).unwrap();
        optimal_ensemble(&rho, &HermitianOperator::from_real_diagonal(&[1.0, -1.0])).unwrap()
    }

    #[test]
    fn transport_endpoints_and_source() {
        let leaf = qubit_leaf();
        let pure = leaf_transport(&leaf, &[1.0, 0.0]).unwrap();
        assert!(!pure.is_full_rank());
        let r = pure.bloch_vector().unwrap();
        assert!((r[0] - 0.6).abs() < 1e-14 && (r[2] + 0.8).abs() < 1e-14);
        let back = leaf_transport(&leaf, leaf.populations()).unwrap();
        let r = back.bloch_vector().unwrap();
        assert!((r[0] - 0.6).abs() < 1e-14 && r[2].abs() < 1e-14);
        assert!(leaf_transport(&leaf, &[0.0, 0.0]).is_err());
        assert!(leaf_transport(&leaf, &[-1.0, 2.0]).is_err());
        assert!(leaf_transport(&leaf, &[1.0]).is_err());
    }

    #[test]
    fn canonical_limits() {
        let leaf = qubit_leaf();
        let zero = leaf_canonical(&leaf, 0.0).unwrap();
        assert!(zero.distance(&barycenter(&leaf).unwrap()).unwrap() < 1e-14);
        let cold = leaf_canonical(&leaf, 200.0).unwrap();
        assert!((cold.purity() - 1.0).abs() < 1e-12);
        let hot = leaf_canonical(&leaf, -200.0).unwrap();
        assert!((hot.bloch_vector().unwrap()[2] - 0.8).abs() < 1e-12);
        assert!(leaf_canonical(&leaf, f64::INFINITY).is_err());
    }

    #[test]
    fn microcanonical_windows() {
        let leaf = qubit_leaf();
        let low = leaf_microcanonical(&leaf, -1.0, 0.0).unwrap();
        assert!((low.bloch_vector().unwrap()[2] + 0.8).abs() < 1e-14);
        let both = leaf_microcanonical(&leaf, -1.0, 1.0).unwrap();
        assert!(both.distance(&barycenter(&leaf).unwrap()).unwrap() < 1e-14);
        assert!(matches!(leaf_microcanonical(&leaf, 0.85, 0.9), Err(Error::EmptyShell { .. })));
    }

    #[test]
    fn canonical_matches_sandwich_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2, 3, 5] {
            let rho = random_full_rank_density::<f64, _>(&mut rng, d, 0.02).unwrap();
            let h = random_hermitian::<f64, _>(&mut rng, d);
            let leaf = optimal_ensemble(&rho, &h).unwrap();
            let rho0 = barycenter(&leaf).unwrap();
            let h0 = state_hamiltonian(&rho0, &h).unwrap();
            let sqrt0 = rho0.sqrt();
            for beta in [-1.3, 0.0, 0.7, 2.5] {
                let boltz = crate::operator::spectral_decompose(&h0)
                    .unwrap()
                    .matrix_function(ScalarFn::ExpNegBeta(beta))
                    .unwrap();
                let m = crate::linalg::mul(crate::linalg::mul(sqrt0.as_mat(), boltz.as_mat()).as_ref(), sqrt0.as_mat());
                let tr = (0..d).map(|i| m[(i, i)].re).sum::<f64>();
                let expected = HermitianOperator::new(faer::Mat::from_fn(d, d, |i, j| m[(i, j)] / tr)).unwrap();
                let got = leaf_canonical(&leaf, beta).unwrap();
                assert!(got.op().distance(&expected).unwrap() < 1e-10, "d={d} beta={beta}");
            }
        }
    }
}
