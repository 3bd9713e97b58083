use faer::{Mat, MatRef};

use crate::error::{check_dims, Error, Result};
use crate::scalar::{c, re, Real, C};
use crate::tolerance::Tolerances;

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState<T: Real> {
    amps: Vec<C<T>>,
}

impl<T: Real> PureState<T> {
    /// Accepts amplitudes that already have unit norm.
    pub fn new(amps: Vec<C<T>>) -> Result<Self> {
        let tol = Tolerances::for_precision::<T>();
        if amps.is_empty() {
            return Err(Error::InvalidParameter("state must have dimension >= 1".into()));
        }
        let n = norm(&amps);
        if (n - T::one()).abs() > T::lit(tol.norm) {
            return Err(Error::InvalidParameter(format!("state norm {:.15} differs from 1", n.to_f64_lossy())));
        }
        Ok(Self { amps })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amps: Vec<C<T>>) -> Result<Self> {
        let n = norm(&amps);
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::InvalidParameter("cannot normalize a zero or non-finite vector".into()));
        }
        for a in amps.iter_mut() {
            *a /= n;
        }
        Ok(Self { amps })
    }

    /// Computational basis state `|index>`.
    pub fn basis(d: usize, index: usize) -> Result<Self> {
        if index >= d {
            return Err(Error::InvalidParameter(format!("basis index {index} out of range for d={d}")));
        }
        let mut amps = vec![re(T::zero()); d];
        amps[index] = re(T::one());
        Ok(Self { amps })
    }

    /// Qubit state with Bloch vector `n` (unit length), `cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>`.
    pub fn from_bloch(n: [T; 3]) -> Result<Self> {
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if (len - T::one()).abs() > T::lit(1e-10).max(T::epsilon() * T::lit(16.0)) {
            return Err(Error::InvalidParameter("Bloch vector of a pure state must be unit".into()));
        }
        let half = T::lit(0.5);
        let up = ((T::one() + n[2]) * half).max(T::zero()).sqrt();
        let down = ((T::one() - n[2]) * half).max(T::zero()).sqrt();
        let t = (n[0] * n[0] + n[1] * n[1]).sqrt();
        let phase = if t > T::zero() { c(n[0] / t, n[1] / t) } else { re(T::one()) };
        Self::normalized(vec![re(up), phase * down])
    }

    /// Column `j` of a matrix, renormalized.
    pub fn from_column(m: MatRef<'_, C<T>>, j: usize) -> Result<Self> {
        Self::normalized((0..m.nrows()).map(|i| m[(i, j)]).collect())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    pub fn as_column(&self) -> MatRef<'_, C<T>> {
        MatRef::from_column_major_slice(&self.amps, self.amps.len(), 1)
    }

    pub fn to_column(&self) -> Mat<C<T>> {
        self.as_column().to_owned()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> Result<C<T>> {
        check_dims("inner product", self.dim(), other.dim())?;
        Ok(self.amps.iter().zip(&other.amps).fold(re(T::zero()), |acc, (a, b)| acc + a.conj() * b))
    }

    /// `|<self|other>|`
    pub fn overlap(&self, other: &Self) -> Result<T> {
        Ok(self.inner(other)?.norm())
    }

    /// Bloch vector of a qubit state.
    pub fn bloch_vector(&self) -> Result<[T; 3]> {
        if self.dim() != 2 {
            return Err(Error::InvalidParameter("Bloch vector needs d = 2".into()));
        }
        let (a, b) = (self.amps[0], self.amps[1]);
        let off = a.conj() * b;
        let two = T::lit(2.0);
        Ok([two * off.re, two * off.im, a.norm_sqr() - b.norm_sqr()])
    }

    /// `|ψ><ψ|` as a dense matrix.
    pub fn projector(&self) -> Mat<C<T>> {
        let d = self.dim();
        Mat::from_fn(d, d, |i, j| self.amps[i] * self.amps[j].conj())
    }
}

fn norm<T: Real>(v: &[C<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}
