use faer::Mat;

use crate::error::{Error, Result};
use crate::operator::{spectral_decompose, HermitianOperator, PureState, SpectralDecomposition};
use crate::scalar::{xlogx_neg, Real, C};
use crate::tolerance::Tolerances;

/// Where the spectral form of a [`DensityMatrix`] came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralOrigin {
    /// Supplied in closed form (Boltzmann weights, unitary images, ...).
    Analytic,
    /// Obtained by diagonalizing the matrix.
    Numerical,
}

/// Positive, unit-trace Hermitian operator together with its spectral form.
///
/// States built from a known spectrum keep that spectrum verbatim; this is
/// what keeps `sqrt(rho)` accurate when populations span many decades.
#[derive(Clone, Debug)]
pub struct DensityMatrix<T: Real> {
    op: HermitianOperator<T>,
    spectral: SpectralDecomposition<T>,
    origin: SpectralOrigin,
    rank_floor: f64,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(op: HermitianOperator<T>) -> Result<Self> {
        Self::with_tolerances(op, &Tolerances::for_precision::<T>())
    }

    /// Validates trace and positivity, diagonalizing `op` numerically.
    pub fn with_tolerances(op: HermitianOperator<T>, tol: &Tolerances) -> Result<Self> {
        check_trace(op.trace(), tol)?;
        let spectral = spectral_decompose(&op)?;
        check_positive(spectral.eigenvalues(), tol)?;
        Ok(Self { op, spectral, origin: SpectralOrigin::Numerical, rank_floor: tol.rank_floor })
    }

    /// Builds the state `V diag(p) V^†` from a closed-form spectrum.
    pub fn from_spectral(spectral: SpectralDecomposition<T>) -> Result<Self> {
        Self::from_spectral_with(spectral, &Tolerances::for_precision::<T>())
    }

    pub fn from_spectral_with(spectral: SpectralDecomposition<T>, tol: &Tolerances) -> Result<Self> {
        check_positive(spectral.eigenvalues(), tol)?;
        let total = spectral.eigenvalues().iter().fold(T::zero(), |a, &b| a + b);
        check_trace(total, tol)?;
        let op = spectral.reconstruct();
        Ok(Self { op, spectral, origin: SpectralOrigin::Analytic, rank_floor: tol.rank_floor })
    }

    /// Pairs an operator with a spectral form the caller guarantees is consistent.
    pub(crate) fn from_parts_unchecked(
        op: HermitianOperator<T>,
        spectral: SpectralDecomposition<T>,
        tol: &Tolerances,
    ) -> Self {
        Self { op, spectral, origin: SpectralOrigin::Analytic, rank_floor: tol.rank_floor }
    }

    /// `U rho U^†` for unitary `u`; the spectrum is carried over unchanged.
    pub(crate) fn unitary_image(&self, u: faer::MatRef<'_, C<T>>) -> Self {
        let op = HermitianOperator::symmetrized(crate::linalg::unconjugate_by(self.op.as_mat(), u));
        let mut vecs = crate::linalg::mul(u, self.spectral.eigenvectors());
        super::fix_phases(&mut vecs);
        let spectral = SpectralDecomposition::from_unsorted(self.spectral.eigenvalues().to_vec(), vecs);
        Self { op, spectral, origin: self.origin, rank_floor: self.rank_floor }
    }

    /// `I/d`, with the computational basis as its eigenbasis.
    pub fn maximally_mixed(d: usize) -> Result<Self> {
        let tol = Tolerances::for_precision::<T>();
        tol.check_dim(d)?;
        let p = T::one() / T::from_usize(d).expect("dimension fits");
        let spectral = SpectralDecomposition::from_parts(vec![p; d], Mat::identity(d, d))?;
        Ok(Self::from_parts_unchecked(HermitianOperator::identity(d).scale(p), spectral, &tol))
    }

    pub fn from_pure(psi: &PureState<T>) -> Result<Self> {
        Self::new(HermitianOperator::symmetrized(psi.projector()))
    }

    /// Qubit state `(I + r·σ)/2`, `|r| <= 1`.
    pub fn from_bloch(r: [T; 3]) -> Result<Self> {
        let half = T::lit(0.5);
        let m = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => C::new(half * (T::one() + r[2]), T::zero()),
            (1, 1) => C::new(half * (T::one() - r[2]), T::zero()),
            (0, 1) => C::new(half * r[0], -half * r[1]),
            _ => C::new(half * r[0], half * r[1]),
        });
        Self::new(HermitianOperator::new(m)?)
    }

    /// Overrides the relative floor used by [`is_full_rank`](Self::is_full_rank).
    pub fn with_rank_floor(mut self, floor: f64) -> Self {
        self.rank_floor = floor;
        self
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    #[inline]
    pub fn op(&self) -> &HermitianOperator<T> {
        &self.op
    }

    #[inline]
    pub fn spectral(&self) -> &SpectralDecomposition<T> {
        &self.spectral
    }

    pub fn origin(&self) -> SpectralOrigin {
        self.origin
    }

    pub fn rank_floor(&self) -> f64 {
        self.rank_floor
    }

    /// Eigenvalues with rounding-level negatives clamped to zero.
    pub fn populations(&self) -> Vec<T> {
        self.spectral.eigenvalues().iter().map(|&x| x.max(T::zero())).collect()
    }

    /// `lambda_min / lambda_max`.
    pub fn rank_ratio(&self) -> T {
        let ev = self.spectral.eigenvalues();
        let max = *ev.last().expect("non-empty");
        if max > T::zero() {
            ev[0].max(T::zero()) / max
        } else {
            T::zero()
        }
    }

    /// Analytic spectra only need a strictly positive smallest eigenvalue;
    /// numerical ones must clear the relative rank floor.
    pub fn is_full_rank(&self) -> bool {
        self.clears_floor(self.rank_floor)
    }

    fn clears_floor(&self, floor: f64) -> bool {
        match self.origin {
            SpectralOrigin::Analytic => self.spectral.eigenvalues()[0] > T::zero(),
            SpectralOrigin::Numerical => self.rank_ratio() > T::lit(floor),
        }
    }

    /// Fails unless the state is full rank at relative floor `floor`.
    pub(crate) fn require_full_rank(&self, floor: f64) -> Result<()> {
        if self.clears_floor(floor) {
            Ok(())
        } else {
            Err(Error::RankDeficient { ratio: self.rank_ratio().to_f64_lossy(), floor })
        }
    }

    /// `sqrt(rho)` from the stored spectral form.
    pub fn sqrt(&self) -> HermitianOperator<T> {
        self.spectral.map(|x| x.max(T::zero()).sqrt())
    }

    pub fn purity(&self) -> T {
        self.spectral.eigenvalues().iter().fold(T::zero(), |a, &x| a + x * x)
    }

    /// Von Neumann entropy in nats.
    pub fn entropy(&self) -> T {
        self.spectral.eigenvalues().iter().fold(T::zero(), |a, &x| a + xlogx_neg(x))
    }

    pub fn trace(&self) -> T {
        self.op.trace()
    }

    /// `||rho - sigma||_F`
    pub fn distance(&self, other: &Self) -> Result<T> {
        self.op.distance(&other.op)
    }

    /// Bloch vector of a qubit state.
    pub fn bloch_vector(&self) -> Result<[T; 3]> {
        if self.dim() != 2 {
            return Err(Error::InvalidParameter("Bloch vector needs d = 2".into()));
        }
        let two = T::lit(2.0);
        let off = self.op.entry(1, 0);
        Ok([two * off.re, two * off.im, self.op.entry(0, 0).re - self.op.entry(1, 1).re])
    }
}

fn check_trace<T: Real>(tr: T, tol: &Tolerances) -> Result<()> {
    if (tr - T::one()).abs() > T::lit(tol.trace) {
        return Err(Error::InvalidOperator(format!("density matrix trace {:.15} differs from 1", tr.to_f64_lossy())));
    }
    Ok(())
}

fn check_positive<T: Real>(eigenvalues: &[T], tol: &Tolerances) -> Result<()> {
    if let Some(&min) = eigenvalues.iter().min_by(|a, b| a.partial_cmp(b).expect("finite")) {
        if min < -T::lit(tol.positivity) {
            return Err(Error::InvalidOperator(format!(
                "density matrix is not positive (min eigenvalue {:e})",
                min.to_f64_lossy()
            )));
        }
    }
    Ok(())
}

/// Gibbs state `exp(-beta H0) / Z`.
///
/// The spectrum is carried in closed form from the decomposition of `h0`
/// (log-sum-exp normalized) and never re-diagonalized.
pub fn boltzmann_state<T: Real>(h0: &HermitianOperator<T>, beta: T) -> Result<DensityMatrix<T>> {
    if !beta.is_finite() {
        return Err(Error::InvalidParameter("beta must be finite".into()));
    }
    boltzmann_from_spectrum(&spectral_decompose(h0)?, beta)
}

/// Same as [`boltzmann_state`] for an already diagonalized generator.
pub fn boltzmann_from_spectrum<T: Real>(h0: &SpectralDecomposition<T>, beta: T) -> Result<DensityMatrix<T>> {
    if !beta.is_finite() {
        return Err(Error::InvalidParameter("beta must be finite".into()));
    }
    let weights = gibbs_weights(h0.eigenvalues(), beta);
    let (_, vecs) = h0.clone().into_parts();
    let spectral = SpectralDecomposition::from_unsorted(weights, vecs);
    let tol = Tolerances::for_precision::<T>();
    let op = spectral.reconstruct();
    Ok(DensityMatrix::from_parts_unchecked(op, spectral, &tol))
}

/// Normalized `exp(-beta E_i)` with the largest exponent shifted to zero.
pub fn gibbs_weights<T: Real>(energies: &[T], beta: T) -> Vec<T> {
    let exponents: Vec<T> = energies.iter().map(|&e| -beta * e).collect();
    let shift = exponents.iter().fold(T::neg_infinity(), |m, &x| m.max(x));
    let raw: Vec<T> = exponents.iter().map(|&x| (x - shift).exp()).collect();
    let z = raw.iter().fold(T::zero(), |a, &b| a + b);
    raw.into_iter().map(|w| w / z).collect()
}
