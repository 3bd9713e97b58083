//! Numerical thresholds shared across the crate.
//!
//! The defaults are tuned for `f64`. For narrower types every threshold is
//! scaled by the ratio of machine epsilons, so `f32` runs get proportionally
//! looser checks.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Thresholds used for validation, rank and degeneracy decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Hermiticity check, relative to the largest entry magnitude.
    pub herm: f64,
    /// Allowed deviation of a density matrix trace from one.
    pub trace: f64,
    /// Smallest eigenvalue accepted as "non-negative".
    pub positivity: f64,
    /// Relative floor `lambda_min / lambda_max` below which a state counts as rank deficient.
    pub rank_floor: f64,
    /// Relative gap of the state Hamiltonian below which it counts as degenerate.
    pub gap_tol: f64,
    /// Discarded imaginary residue in expectation values.
    pub imag_residue: f64,
    /// Populations below this are flagged unreliable.
    pub population_floor: f64,
    /// Unit-norm check for pure states.
    pub norm: f64,
    /// Largest dense dimension allocated without an explicit override.
    pub max_dim: usize,
}

pub const DEFAULT_MAX_DIM: usize = 1 << 14;

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-12,
            trace: 1e-12,
            positivity: 1e-12,
            rank_floor: 1e-14,
            gap_tol: 1e-10,
            imag_residue: 1e-10,
            population_floor: 1e-300,
            norm: 1e-12,
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

impl Tolerances {
    /// Defaults scaled to the precision of `T`.
    pub fn for_precision<T: Real>() -> Self {
        let base = Self::default();
        let scale = (T::epsilon().to_f64_lossy() / f64::EPSILON).max(1.0);
        if scale == 1.0 {
            return base;
        }
        let min_pos = T::min_positive_value().to_f64_lossy();
        Self {
            herm: base.herm * scale,
            trace: base.trace * scale,
            positivity: base.positivity * scale,
            rank_floor: base.rank_floor * scale,
            // spectral resolution, not accumulated rounding
            gap_tol: base.gap_tol.max(100.0 * T::epsilon().to_f64_lossy()),
            imag_residue: base.imag_residue.max(1000.0 * T::epsilon().to_f64_lossy()),
            population_floor: min_pos,
            norm: base.norm * scale,
            max_dim: base.max_dim,
        }
    }

    /// Lifts the dense memory guard.
    pub fn without_dim_guard(mut self) -> Self {
        self.max_dim = usize::MAX;
        self
    }

    pub(crate) fn check_dim(&self, d: usize) -> crate::Result<()> {
        if d == 0 {
            return Err(crate::error::invalid("dimension must be at least 1"));
        }
        if d > self.max_dim {
            return Err(crate::error::invalid(format!(
                "dimension {d} exceeds the dense allocation guard {} (override required)",
                self.max_dim
            )));
        }
        Ok(())
    }
}
