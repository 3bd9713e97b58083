//! Minimum-variance foliation of mixed quantum states.
//!
//! Every full-rank state `ρ` with a Hamiltonian `H` has a distinguished
//! pure-state decomposition minimizing the average energy variance. Its
//! members are the eigenvectors of the state Hamiltonian `H_ρ` mapped
//! through `√ρ`; reweighting them sweeps out a leaf of states sharing the
//! same family. This crate computes leaves, their incoherence and Fisher
//! information, leaf-canonical ensembles, and the energy-shell statistics
//! used to test typicality of local observables on spin chains.
//!
//! All numerical types are generic over the real scalar ([`Real`], `f32`
//! or `f64`). The `*F64` and `*F32` aliases below fix the precision.
//!
//! ```
//! use leafkit_core::{optimal_ensemble, qfi, DensityMatrixF64, HermitianOperatorF64};
//!
//! let rho = DensityMatrixF64::from_bloch([0.6, 0.0, 0.0]).unwrap();
//! let h = HermitianOperatorF64::from_real_diagonal(&[1.0, -1.0]);
//! let leaf = optimal_ensemble(&rho, &h).unwrap();
//! assert!((leaf.energies()[1] - 0.8).abs() < 1e-12);
//! assert!((qfi(&rho, &h).unwrap() - 1.44).abs() < 1e-12);
//! ```

pub mod dynamics;
pub mod error;
pub mod foliation;
mod linalg;
pub mod operator;
pub mod qmat;
pub mod random;
pub mod scalar;
pub mod spinchain;
pub mod tolerance;
pub mod typicality;

pub use error::{Error, Result};
pub use scalar::{binary_entropy, Real, C};
pub use tolerance::Tolerances;

pub use operator::{
    boltzmann_from_spectrum, boltzmann_state, column_expectations, column_variances, eigenvalues, expectation,
    gell_mann, gibbs_weights, pauli_string, spectral_decompose, variance, Axis, DensityMatrix, HermitianOperator,
    Observable, PauliString, PureState, ScalarFn, SpectralDecomposition, SpectralOrigin,
};

pub use foliation::{
    average_variance, barycenter, decomposition_variance_oracle, incoherence, leaf_canonical, leaf_entropy,
    leaf_microcanonical, leaf_transport, nondegeneracy_gap, optimal_ensemble, optimal_ensemble_with, qfi,
    qubit_leaf_geometry, state_hamiltonian, FoliationOptions, Leaf, LeafFlags, QubitLeafGeometry,
};

pub use spinchain::{build_hamiltonian, local_observables, thermal_state, Boundary, ChainSpec, ObservableCatalog};

pub use dynamics::{
    compare_evolutions, evolve_density, evolve_pure, representative_state, EvolutionComparison, Propagator,
};

pub use typicality::{
    diagnostics, incoherence_ratio, shell_partition, shell_values, DeltaGrid, DiagnosticsCurve, ShellReport,
};

/// Thread count for dense kernels (matrix products, eigensolvers).
///
/// `1` selects the sequential kernels, whose results do not depend on the
/// machine. Larger values use the global rayon pool.
pub fn set_dense_threads(threads: usize) {
    let par = if threads <= 1 { faer::Par::Seq } else { faer::Par::rayon(threads) };
    faer::set_global_parallelism(par);
}

pub type HermitianOperatorF64 = HermitianOperator<f64>;
pub type HermitianOperatorF32 = HermitianOperator<f32>;
pub type DensityMatrixF64 = DensityMatrix<f64>;
pub type DensityMatrixF32 = DensityMatrix<f32>;
pub type PureStateF64 = PureState<f64>;
pub type PureStateF32 = PureState<f32>;
pub type SpectralDecompositionF64 = SpectralDecomposition<f64>;
pub type SpectralDecompositionF32 = SpectralDecomposition<f32>;
pub type LeafF64 = Leaf<f64>;
pub type LeafF32 = Leaf<f32>;
pub type PropagatorF64 = Propagator<f64>;
pub type PropagatorF32 = Propagator<f32>;
pub type QubitLeafGeometryF64 = QubitLeafGeometry<f64>;
pub type QubitLeafGeometryF32 = QubitLeafGeometry<f32>;
