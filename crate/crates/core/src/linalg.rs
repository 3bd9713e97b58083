//! Thin wrappers over `faer` kernels used throughout the crate.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef};

use crate::scalar::{Real, C};

#[inline]
pub(crate) fn par() -> faer::Par {
    faer::get_global_parallelism()
}

/// `a * b`
pub(crate) fn mul<T: Real>(a: MatRef<'_, C<T>>, b: MatRef<'_, C<T>>) -> Mat<C<T>> {
    let mut out = Mat::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a, b, C::new(T::one(), T::zero()), par());
    out
}

/// `a^† * b`
pub(crate) fn mul_adj_lhs<T: Real>(a: MatRef<'_, C<T>>, b: MatRef<'_, C<T>>) -> Mat<C<T>> {
    let mut out = Mat::zeros(a.ncols(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a.adjoint(), b, C::new(T::one(), T::zero()), par());
    out
}

/// `a * b^†`
pub(crate) fn mul_adj_rhs<T: Real>(a: MatRef<'_, C<T>>, b: MatRef<'_, C<T>>) -> Mat<C<T>> {
    let mut out = Mat::zeros(a.nrows(), b.nrows());
    matmul(out.as_mut(), Accum::Replace, a, b.adjoint(), C::new(T::one(), T::zero()), par());
    out
}

/// `v^† a v` for unitary-like `v`, i.e. a change of basis.
pub(crate) fn conjugate_by<T: Real>(a: MatRef<'_, C<T>>, v: MatRef<'_, C<T>>) -> Mat<C<T>> {
    let av = mul(a, v);
    mul_adj_lhs(v, av.as_ref())
}

/// `v a v^†`
pub(crate) fn unconjugate_by<T: Real>(a: MatRef<'_, C<T>>, v: MatRef<'_, C<T>>) -> Mat<C<T>> {
    let va = mul(v, a);
    mul_adj_rhs(va.as_ref(), v)
}

/// Returns a copy of `a` with column `j` multiplied by `w[j]`.
pub(crate) fn scale_columns<T: Real>(a: MatRef<'_, C<T>>, w: &[T]) -> Mat<C<T>> {
    debug_assert_eq!(a.ncols(), w.len());
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * w[j])
}

pub(crate) fn frobenius<T: Real>(a: MatRef<'_, C<T>>) -> T {
    let mut acc = T::zero();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

pub(crate) fn frobenius_diff<T: Real>(a: MatRef<'_, C<T>>, b: MatRef<'_, C<T>>) -> T {
    debug_assert_eq!(a.shape(), b.shape());
    let mut acc = T::zero();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += (a[(i, j)] - b[(i, j)]).norm_sqr();
        }
    }
    acc.sqrt()
}

/// Real parts of `diag(x^† y)`, column by column, with the largest imaginary residue.
pub(crate) fn column_inner<T: Real>(x: MatRef<'_, C<T>>, y: MatRef<'_, C<T>>) -> (Vec<T>, T) {
    let mut worst = T::zero();
    let vals = (0..x.ncols())
        .map(|j| {
            let mut acc = C::new(T::zero(), T::zero());
            for i in 0..x.nrows() {
                acc += x[(i, j)].conj() * y[(i, j)];
            }
            worst = worst.max(acc.im.abs());
            acc.re
        })
        .collect();
    (vals, worst)
}
