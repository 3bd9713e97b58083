//! Dense Hermitian operator algebra.

mod basis;
mod density;
mod hermitian;
mod spectral;
mod state;

pub use basis::{gell_mann, pauli_string, Axis, PauliString};
pub use density::{boltzmann_from_spectrum, boltzmann_state, gibbs_weights, DensityMatrix, SpectralOrigin};
pub use hermitian::HermitianOperator;
pub use spectral::{eigenvalues, spectral_decompose, ScalarFn, SpectralDecomposition};
pub use state::PureState;

pub(crate) use spectral::fix_phases;

use faer::{Mat, MatRef};

use crate::error::{check_dims, Error, Result};
use crate::linalg;
use crate::scalar::{Real, C};
use crate::tolerance::Tolerances;

/// Anything that acts linearly and Hermitian-ly on state vectors.
///
/// Dense operators and structured Pauli strings both implement this, so
/// diagnostics on large chains never need to materialize local observables.
pub trait Observable<T: Real>: Send + Sync {
    fn dim(&self) -> usize;

    /// `O * states`, column by column.
    fn apply(&self, states: MatRef<'_, C<T>>) -> Result<Mat<C<T>>>;

    fn to_operator(&self) -> Result<HermitianOperator<T>>;

    /// `<v_j|O|v_j>` for every column, with the largest imaginary residue.
    fn column_inner(&self, states: MatRef<'_, C<T>>) -> Result<(Vec<T>, T)> {
        let ov = self.apply(states)?;
        Ok(linalg::column_inner(states, ov.as_ref()))
    }
}

impl<T: Real> Observable<T> for HermitianOperator<T> {
    fn dim(&self) -> usize {
        HermitianOperator::dim(self)
    }

    fn apply(&self, states: MatRef<'_, C<T>>) -> Result<Mat<C<T>>> {
        HermitianOperator::apply(self, states)
    }

    fn to_operator(&self) -> Result<HermitianOperator<T>> {
        Ok(self.clone())
    }
}

/// `<v_j|O|v_j>` for every column `v_j` of `states`.
pub fn column_expectations<T: Real, O: Observable<T> + ?Sized>(o: &O, states: MatRef<'_, C<T>>) -> Result<Vec<T>> {
    let (vals, worst) = o.column_inner(states)?;
    check_residue(worst, &vals)?;
    Ok(vals)
}

/// Either kind of state accepted by [`expectation`].
#[derive(Clone, Copy, Debug)]
pub enum StateRef<'a, T: Real> {
    Mixed(&'a DensityMatrix<T>),
    Pure(&'a PureState<T>),
}

impl<'a, T: Real> From<&'a DensityMatrix<T>> for StateRef<'a, T> {
    fn from(rho: &'a DensityMatrix<T>) -> Self {
        StateRef::Mixed(rho)
    }
}

impl<'a, T: Real> From<&'a PureState<T>> for StateRef<'a, T> {
    fn from(psi: &'a PureState<T>) -> Self {
        StateRef::Pure(psi)
    }
}

/// `tr[rho O]` or `<psi|O|psi>`.
pub fn expectation<'a, T: Real>(o: &HermitianOperator<T>, state: impl Into<StateRef<'a, T>>) -> Result<T> {
    match state.into() {
        StateRef::Mixed(rho) => {
            check_dims("expectation", o.dim(), rho.dim())?;
            let d = o.dim();
            let (mut acc_re, mut acc_im) = (T::zero(), T::zero());
            for j in 0..d {
                for i in 0..d {
                    let z = rho.op().entry(i, j) * o.entry(j, i);
                    acc_re += z.re;
                    acc_im += z.im;
                }
            }
            check_residue(acc_im.abs(), &[acc_re])?;
            Ok(acc_re)
        }
        StateRef::Pure(psi) => {
            check_dims("expectation", o.dim(), psi.dim())?;
            Ok(column_expectations(o, psi.as_column())?[0])
        }
    }
}

/// `<psi|H^2|psi> - <psi|H|psi>^2`, computed as `||(H - <H>) psi||^2`.
pub fn variance<T: Real>(h: &HermitianOperator<T>, psi: &PureState<T>) -> Result<T> {
    check_dims("variance", h.dim(), psi.dim())?;
    Ok(column_variances(h, psi.as_column())?[0])
}

/// Energy variance of every column of `states` (columns assumed normalized).
pub fn column_variances<T: Real, O: Observable<T> + ?Sized>(h: &O, states: MatRef<'_, C<T>>) -> Result<Vec<T>> {
    let hv = h.apply(states)?;
    let (means, worst) = linalg::column_inner(states, hv.as_ref());
    check_residue(worst, &means)?;
    Ok((0..states.ncols())
        .map(|j| {
            let mut acc = T::zero();
            for i in 0..states.nrows() {
                acc += (hv[(i, j)] - states[(i, j)] * means[j]).norm_sqr();
            }
            acc
        })
        .collect())
}

fn check_residue<T: Real>(imag: T, vals: &[T]) -> Result<()> {
    let scale = vals.iter().fold(T::one(), |m, v| m.max(v.abs()));
    let tol = T::lit(Tolerances::for_precision::<T>().imag_residue) * scale;
    if imag > tol {
        return Err(Error::NumericalError(format!(
            "imaginary residue {:e} in a Hermitian expectation value",
            imag.to_f64_lossy()
        )));
    }
    Ok(())
}
