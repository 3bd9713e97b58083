use faer::{Mat, MatRef};

use crate::error::{check_dims, Error, Result};
use crate::linalg;
use crate::scalar::{re, Real, C};
use crate::tolerance::Tolerances;

/// Dense complex Hermitian matrix.
///
/// Construction checks Hermiticity relative to the largest entry magnitude and
/// then stores the exactly symmetrized matrix `(A + A^†)/2`.
#[derive(Clone, Debug)]
pub struct HermitianOperator<T: Real> {
    mat: Mat<C<T>>,
}

impl<T: Real> HermitianOperator<T> {
    /// Validates `mat` with the default tolerances for `T`.
    pub fn new(mat: Mat<C<T>>) -> Result<Self> {
        Self::with_tolerances(mat, &Tolerances::for_precision::<T>())
    }

    pub fn with_tolerances(mat: Mat<C<T>>, tol: &Tolerances) -> Result<Self> {
        let (n, m) = mat.shape();
        if n != m {
            return Err(Error::InvalidOperator(format!("matrix is not square: {n}x{m}")));
        }
        tol.check_dim(n)?;
        let mut scale = T::zero();
        for j in 0..n {
            for i in 0..n {
                let z = mat[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::InvalidOperator(format!("non-finite entry at ({i}, {j})")));
                }
                scale = scale.max(z.norm());
            }
        }
        let bound = T::lit(tol.herm) * scale;
        for j in 0..n {
            for i in 0..=j {
                let dev = (mat[(i, j)] - mat[(j, i)].conj()).norm();
                if dev > bound {
                    return Err(Error::InvalidOperator(format!(
                        "not Hermitian: |A[{i},{j}] - conj(A[{j},{i}])| = {:e} exceeds {:e}",
                        dev.to_f64_lossy(),
                        bound.to_f64_lossy()
                    )));
                }
            }
        }
        Ok(Self::symmetrized(mat))
    }

    /// Wraps a matrix that is Hermitian up to rounding, symmetrizing it.
    pub(crate) fn symmetrized(mut mat: Mat<C<T>>) -> Self {
        let n = mat.nrows();
        let half = T::lit(0.5);
        for j in 0..n {
            for i in 0..j {
                let avg = (mat[(i, j)] + mat[(j, i)].conj()) * half;
                mat[(i, j)] = avg;
                mat[(j, i)] = avg.conj();
            }
            mat[(j, j)] = re(mat[(j, j)].re);
        }
        Self { mat }
    }

    pub fn identity(d: usize) -> Self {
        Self { mat: Mat::identity(d, d) }
    }

    pub fn zeros(d: usize) -> Self {
        Self { mat: Mat::zeros(d, d) }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let d = diag.len();
        let mut mat = Mat::zeros(d, d);
        for (i, &x) in diag.iter().enumerate() {
            mat[(i, i)] = re(x);
        }
        Self { mat }
    }

    /// Builds from an entry generator; the result is validated.
    pub fn from_fn(d: usize, f: impl FnMut(usize, usize) -> C<T>) -> Result<Self> {
        Self::new(Mat::from_fn(d, d, f))
    }

    /// Builds a real symmetric operator from row-major entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidOperator("rows must form a square matrix".into()));
        }
        Self::new(Mat::from_fn(d, d, |i, j| re(T::lit(rows[i][j]))))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    #[inline]
    pub fn as_mat(&self) -> MatRef<'_, C<T>> {
        self.mat.as_ref()
    }

    pub fn into_mat(self) -> Mat<C<T>> {
        self.mat
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> C<T> {
        self.mat[(i, j)]
    }

    pub fn trace(&self) -> T {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).fold(T::zero(), |a, b| a + b)
    }

    pub fn frobenius_norm(&self) -> T {
        linalg::frobenius(self.as_mat())
    }

    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                m = m.max(self.mat[(i, j)].norm());
            }
        }
        m
    }

    pub fn scale(&self, a: T) -> Self {
        Self { mat: Mat::from_fn(self.dim(), self.dim(), |i, j| self.mat[(i, j)] * a) }
    }

    /// `a * self + b * other`
    pub fn linear_combination(&self, a: T, other: &Self, b: T) -> Result<Self> {
        check_dims("linear combination", self.dim(), other.dim())?;
        Ok(Self { mat: Mat::from_fn(self.dim(), self.dim(), |i, j| self.mat[(i, j)] * a + other.mat[(i, j)] * b) })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.linear_combination(T::one(), other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.linear_combination(T::one(), other, -T::one())
    }

    /// Plain matrix product (not Hermitian in general).
    pub fn product(&self, other: &Self) -> Result<Mat<C<T>>> {
        check_dims("product", self.dim(), other.dim())?;
        Ok(linalg::mul(self.as_mat(), other.as_mat()))
    }

    /// Hermitian part of the product, `(AB + BA)/2`.
    pub fn half_anticommutator(&self, other: &Self) -> Result<Self> {
        let ab = self.product(other)?;
        // (AB)^† = BA for Hermitian A, B.
        let d = self.dim();
        let half = T::lit(0.5);
        Ok(Self::symmetrized(Mat::from_fn(d, d, |i, j| (ab[(i, j)] + ab[(j, i)].conj()) * half)))
    }

    /// `||AB - BA||_F`
    pub fn commutator_norm(&self, other: &Self) -> Result<T> {
        let ab = self.product(other)?;
        let d = self.dim();
        let mut acc = T::zero();
        for j in 0..d {
            for i in 0..d {
                acc += (ab[(i, j)] - ab[(j, i)].conj()).norm_sqr();
            }
        }
        Ok(acc.sqrt())
    }

    /// `tr[A B]` for Hermitian A, B (always real).
    pub fn trace_product(&self, other: &Self) -> Result<T> {
        check_dims("trace product", self.dim(), other.dim())?;
        let d = self.dim();
        let mut acc = T::zero();
        for j in 0..d {
            for i in 0..d {
                acc += (self.mat[(i, j)] * other.mat[(j, i)]).re;
            }
        }
        Ok(acc)
    }

    /// `A * states`
    pub fn apply(&self, states: MatRef<'_, C<T>>) -> Result<Mat<C<T>>> {
        check_dims("apply", self.dim(), states.nrows())?;
        Ok(linalg::mul(self.as_mat(), states))
    }

    /// Expresses the operator in another orthonormal basis: `V^† A V`.
    pub fn in_basis(&self, v: MatRef<'_, C<T>>) -> Result<Self> {
        check_dims("change of basis", self.dim(), v.nrows())?;
        Ok(Self::symmetrized(linalg::conjugate_by(self.as_mat(), v)))
    }

    /// Inverse of [`in_basis`](Self::in_basis): `V A V^†`.
    pub fn from_basis(&self, v: MatRef<'_, C<T>>) -> Result<Self> {
        check_dims("change of basis", self.dim(), v.ncols())?;
        Ok(Self::symmetrized(linalg::unconjugate_by(self.as_mat(), v)))
    }

    pub fn is_diagonal(&self, tol: T) -> bool {
        let d = self.dim();
        (0..d).all(|j| (0..d).all(|i| i == j || self.mat[(i, j)].norm() <= tol))
    }

    /// Distance `||A - B||_F`.
    pub fn distance(&self, other: &Self) -> Result<T> {
        check_dims("distance", self.dim(), other.dim())?;
        Ok(linalg::frobenius_diff(self.as_mat(), other.as_mat()))
    }

    pub fn cast<U: Real>(&self) -> HermitianOperator<U> {
        HermitianOperator {
            mat: Mat::from_fn(self.dim(), self.dim(), |i, j| {
                let z = self.mat[(i, j)];
                C::new(U::lit(z.re.to_f64_lossy()), U::lit(z.im.to_f64_lossy()))
            }),
        }
    }
}
