//! Random operators and states for sampling oracles and tests.

use faer::Mat;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::operator::{DensityMatrix, HermitianOperator, PureState};
use crate::scalar::{Real, C};

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> C<T> {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    C::new(T::lit(a), T::lit(b))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<T: Real, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat<C<T>> {
    let mut m = Mat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}

/// GUE-like Hermitian matrix `(G + G^†)/2`.
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(rng: &mut R, d: usize) -> HermitianOperator<T> {
    let g = ginibre::<T, R>(rng, d, d);
    let half = T::lit(0.5);
    HermitianOperator::symmetrized(Mat::from_fn(d, d, |i, j| (g[(i, j)] + g[(j, i)].conj()) * half))
}

/// Haar-distributed unitary via Gram-Schmidt on a Ginibre matrix.
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(rng: &mut R, d: usize) -> Mat<C<T>> {
    let mut q = ginibre::<T, R>(rng, d, d);
    for j in 0..d {
        // two passes keep the columns orthogonal to working precision
        for _ in 0..2 {
            for k in 0..j {
                let mut proj = C::new(T::zero(), T::zero());
                for i in 0..d {
                    proj += q[(i, k)].conj() * q[(i, j)];
                }
                for i in 0..d {
                    let qik = q[(i, k)];
                    q[(i, j)] -= qik * proj;
                }
            }
        }
        let norm = (0..d).fold(T::zero(), |a, i| a + q[(i, j)].norm_sqr()).sqrt();
        for i in 0..d {
            q[(i, j)] /= norm;
        }
    }
    q
}

/// Haar-random pure state.
pub fn random_pure_state<T: Real, R: Rng + ?Sized>(rng: &mut R, d: usize) -> Result<PureState<T>> {
    PureState::normalized((0..d).map(|_| gaussian(rng)).collect())
}

/// Hilbert-Schmidt random density matrix `G G^† / tr[G G^†]` (full rank almost surely).
pub fn random_density<T: Real, R: Rng + ?Sized>(rng: &mut R, d: usize) -> Result<DensityMatrix<T>> {
    let g = ginibre::<T, R>(rng, d, d);
    let gg = crate::linalg::mul_adj_rhs(g.as_ref(), g.as_ref());
    let tr = (0..d).fold(T::zero(), |a, i| a + gg[(i, i)].re);
    DensityMatrix::new(HermitianOperator::symmetrized(Mat::from_fn(d, d, |i, j| gg[(i, j)] / tr)))
}

/// Random density matrix with eigenvalues bounded away from zero: a mixture
/// of a Hilbert-Schmidt state with `I/d` at weight `floor * d`.
pub fn random_full_rank_density<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    floor: f64,
) -> Result<DensityMatrix<T>> {
    let hs = random_density::<T, R>(rng, d)?;
    let w = T::lit((floor * d as f64).clamp(0.0, 1.0));
    let mixed = HermitianOperator::identity(d).scale(T::one() / T::from_usize(d).expect("fits"));
    DensityMatrix::new(hs.op().linear_combination(T::one() - w, &mixed, w)?)
}

/// Random Bloch vector with `|r| < max_len`.
pub fn random_bloch<R: Rng + ?Sized>(rng: &mut R, max_len: f64) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n < 1.0 && n > 0.0 {
            let s = max_len;
            return [v[0] * s, v[1] * s, v[2] * s];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..10 {
            let u = haar_unitary::<f64, _>(&mut rng, d);
            let g = crate::linalg::mul_adj_lhs(u.as_ref(), u.as_ref());
            let id = Mat::<C<f64>>::identity(d, d);
            assert!(crate::linalg::frobenius_diff(g.as_ref(), id.as_ref()) < 1e-13);
        }
    }

    #[test]
    fn random_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2, 5, 16] {
            let rho = random_full_rank_density::<f64, _>(&mut rng, d, 1e-3).unwrap();
            assert!(rho.is_full_rank());
            assert!(rho.spectral().eigenvalues()[0] >= 1e-3 * 0.999);
        }
        let r = random_bloch(&mut rng, 0.999);
        assert!((r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt() < 0.999);
    }
}
