use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{binary_entropy, Real};

/// Closed-form leaf geometry of a qubit under `H ∝ σ^z`.
///
/// The leaf through a pure state `n̂` is the chord joining `n̂` and its mirror
/// image through the equatorial plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitLeafGeometry<T> {
    pub n_hat: [T; 3],
    /// `n̂` itself.
    pub endpoint_plus: [T; 3],
    /// `n̂` reflected through the xy-plane.
    pub endpoint_minus: [T; 3],
    /// `|n̂ × ẑ|`
    pub transverse_norm: T,
    /// Von Neumann entropy of the chord midpoint, `H₁((1 - t)/2)`, in nats.
    pub barycenter_entropy: T,
}

impl<T: Real> QubitLeafGeometry<T> {
    /// Geometry of the leaf containing the pure state with unit Bloch vector `n_hat`.
    pub fn from_pure(n_hat: [T; 3]) -> Result<Self> {
        let norm = (n_hat[0] * n_hat[0] + n_hat[1] * n_hat[1] + n_hat[2] * n_hat[2]).sqrt();
        if !((norm - T::one()).abs() <= T::lit(1e-10)) {
            return Err(Error::InvalidParameter(format!("Bloch vector must be unit, got norm {norm}")));
        }
        let t = (n_hat[0] * n_hat[0] + n_hat[1] * n_hat[1]).sqrt();
        let half = T::lit(0.5);
        Ok(Self {
            n_hat,
            endpoint_plus: n_hat,
            endpoint_minus: [n_hat[0], n_hat[1], -n_hat[2]],
            transverse_norm: t,
            barycenter_entropy: binary_entropy((T::one() - t) * half),
        })
    }

    /// Geometry of the leaf through a mixed state with Bloch vector `r`;
    /// `endpoint_plus` is the upper (`z > 0`) end of the chord.
    pub fn through(r: [T; 3]) -> Result<Self> {
        let t2 = r[0] * r[0] + r[1] * r[1];
        let len2 = t2 + r[2] * r[2];
        if !(len2 <= T::one()) {
            return Err(Error::InvalidParameter("Bloch vector outside the unit ball".into()));
        }
        Self::from_pure([r[0], r[1], (T::one() - t2).max(T::zero()).sqrt()])
    }
}

/// Shorthand for [`QubitLeafGeometry::from_pure`].
pub fn qubit_leaf_geometry<T: Real>(n_hat: [T; 3]) -> Result<QubitLeafGeometry<T>> {
    QubitLeafGeometry::from_pure(n_hat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirrored_endpoints() {
        let g = qubit_leaf_geometry::<f64>([0.6, 0.0, 0.8]).unwrap();
        assert_eq!(g.endpoint_plus, [0.6, 0.0, 0.8]);
        assert_eq!(g.endpoint_minus, [0.6, 0.0, -0.8]);
        assert!((g.transverse_norm - 0.6).abs() < 1e-15);
        assert!((g.barycenter_entropy - 0.500_402_423_538_187_9).abs() < 1e-14);
    }

    #[test]
    fn poles_and_equator() {
        let pole = qubit_leaf_geometry::<f64>([0.0, 0.0, 1.0]).unwrap();
        assert_eq!(pole.endpoint_minus, [0.0, 0.0, -1.0]);
        assert_eq!(pole.transverse_norm, 0.0);
        // commuting leaf: barycenter I/2
        assert!((pole.barycenter_entropy - 2f64.ln()).abs() < 1e-15);
        let eq = qubit_leaf_geometry::<f64>([1.0, 0.0, 0.0]).unwrap();
        assert_eq!(eq.endpoint_plus, eq.endpoint_minus);
        assert_eq!(eq.transverse_norm, 1.0);
        assert!(eq.barycenter_entropy.abs() < 1e-15);
        assert!(qubit_leaf_geometry([0.5, 0.0, 0.0]).is_err());
        assert!(QubitLeafGeometry::through([0.9, 0.9, 0.0]).is_err());
    }
}
