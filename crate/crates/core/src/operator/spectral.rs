use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::HermitianOperator;
use crate::scalar::{Real, C};

/// Relative window within which two component magnitudes count as tied when
/// choosing the phase reference of an eigenvector.
const PHASE_TIE_REL: f64 = 1e-10;

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// Hermitian operator.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition<T: Real> {
    eigenvalues: Vec<T>,
    eigenvectors: Mat<C<T>>,
}

/// Scalar maps that can be lifted to operators through their spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarFn<T> {
    Sqrt,
    Log,
    /// `x -> exp(-beta x)`
    ExpNegBeta(T),
    /// Indicator of the closed window `[lo, hi]`.
    Projector {
        lo: T,
        hi: T,
    },
}

impl<T: Real> ScalarFn<T> {
    fn eval(&self, x: T) -> T {
        match *self {
            ScalarFn::Sqrt => x.sqrt(),
            ScalarFn::Log => x.ln(),
            ScalarFn::ExpNegBeta(beta) => (-beta * x).exp(),
            ScalarFn::Projector { lo, hi } => {
                if x >= lo && x <= hi {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }
}

/// Diagonalizes `a` and applies the deterministic phase convention.
pub fn spectral_decompose<T: Real>(a: &HermitianOperator<T>) -> Result<SpectralDecomposition<T>> {
    let evd = a
        .as_mat()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NumericalError(format!("eigensolver failed: {e:?}")))?;
    let eigenvalues: Vec<T> = (0..a.dim()).map(|i| evd.S().column_vector()[i].re).collect();
    let mut eigenvectors = evd.U().to_owned();
    fix_phases(&mut eigenvectors);
    // faer sorts ascending already; keep the contract explicit.
    if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::NumericalError("eigenvalues not sorted".into()));
    }
    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}

/// Eigenvalues only (ascending); cheaper than a full decomposition.
pub fn eigenvalues<T: Real>(a: &HermitianOperator<T>) -> Result<Vec<T>> {
    let mut vals = a
        .as_mat()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::NumericalError(format!("eigensolver failed: {e:?}")))?;
    vals.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(vals)
}

/// Makes the largest-magnitude component of every column real and positive.
/// Ties (within a relative window) go to the lowest index.
pub(crate) fn fix_phases<T: Real>(v: &mut Mat<C<T>>) {
    let n = v.nrows();
    let tie = T::lit(PHASE_TIE_REL);
    for j in 0..v.ncols() {
        let col = v.col_as_slice_mut(j);
        let max = col.iter().fold(T::zero(), |m, z| m.max(z.norm()));
        if max == T::zero() {
            continue;
        }
        let threshold = max * (T::one() - tie);
        let pivot = (0..n).find(|&i| col[i].norm() >= threshold).unwrap_or(0);
        let z = col[pivot];
        let phase = z.conj() / z.norm();
        for x in col.iter_mut() {
            *x *= phase;
        }
        col[pivot] = C::new(col[pivot].norm(), T::zero());
    }
}

impl<T: Real> SpectralDecomposition<T> {
    /// Assembles a decomposition from known parts, e.g. an analytic spectrum
    /// over eigenvectors obtained elsewhere. Eigenvalues must be ascending.
    pub fn from_parts(eigenvalues: Vec<T>, eigenvectors: Mat<C<T>>) -> Result<Self> {
        let d = eigenvalues.len();
        if eigenvectors.nrows() != d || eigenvectors.ncols() != d {
            return Err(Error::InvalidParameter(format!(
                "eigenvector matrix is {}x{}, expected {d}x{d}",
                eigenvectors.nrows(),
                eigenvectors.ncols()
            )));
        }
        if eigenvalues.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidParameter("eigenvalues must be ascending and finite".into()));
        }
        Ok(Self { eigenvalues, eigenvectors })
    }

    /// Reorders an arbitrary (value, column) pairing into ascending order.
    pub(crate) fn from_unsorted(eigenvalues: Vec<T>, eigenvectors: Mat<C<T>>) -> Self {
        let d = eigenvalues.len();
        let mut order: Vec<usize> = (0..d).collect();
        // Stable sort keeps the original column order among equal values.
        order.sort_by(|&a, &b| eigenvalues[a].partial_cmp(&eigenvalues[b]).expect("finite"));
        let vals = order.iter().map(|&k| eigenvalues[k]).collect();
        let vecs = Mat::from_fn(d, d, |i, j| eigenvectors[(i, order[j])]);
        Self { eigenvalues: vals, eigenvectors: vecs }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    #[inline]
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    #[inline]
    pub fn eigenvectors(&self) -> MatRef<'_, C<T>> {
        self.eigenvectors.as_ref()
    }

    pub fn into_parts(self) -> (Vec<T>, Mat<C<T>>) {
        (self.eigenvalues, self.eigenvectors)
    }

    /// `V diag(f(λ)) V^†` for an arbitrary real map.
    pub fn map(&self, f: impl Fn(T) -> T) -> HermitianOperator<T> {
        let w: Vec<T> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        self.with_spectrum(&w)
    }

    /// `V diag(w) V^†` for the given replacement spectrum.
    pub fn with_spectrum(&self, w: &[T]) -> HermitianOperator<T> {
        let scaled = linalg::scale_columns(self.eigenvectors(), w);
        HermitianOperator::symmetrized(linalg::mul_adj_rhs(scaled.as_ref(), self.eigenvectors()))
    }

    pub fn matrix_function(&self, f: ScalarFn<T>) -> Result<HermitianOperator<T>> {
        if matches!(f, ScalarFn::Sqrt | ScalarFn::Log) {
            if let Some(&min) = self.eigenvalues.first() {
                if !(min > T::zero()) {
                    return Err(Error::DomainError(format!(
                        "{f:?} requires a positive spectrum (min eigenvalue {:e})",
                        min.to_f64_lossy()
                    )));
                }
            }
        }
        if let ScalarFn::ExpNegBeta(beta) = f {
            if !beta.is_finite() {
                return Err(Error::InvalidParameter("beta must be finite".into()));
            }
        }
        Ok(self.map(|x| f.eval(x)))
    }

    pub fn reconstruct(&self) -> HermitianOperator<T> {
        self.with_spectrum(&self.eigenvalues)
    }

    /// `||V^† V - I||_F`
    pub fn orthonormality_error(&self) -> T {
        let g = linalg::mul_adj_lhs(self.eigenvectors(), self.eigenvectors());
        let mut acc = T::zero();
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                let target = if i == j { T::one() } else { T::zero() };
                acc += (g[(i, j)] - C::new(target, T::zero())).norm_sqr();
            }
        }
        acc.sqrt()
    }
}
