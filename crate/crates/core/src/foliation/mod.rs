//! Minimum-variance pure-state families ("leaves") of mixed states.

mod ensembles;
mod io;
mod leaf;
mod oracle;
mod qfi;
mod qubit;
mod state_hamiltonian;

pub use ensembles::{leaf_canonical, leaf_microcanonical, leaf_transport};
pub use io::{read_leaf, write_leaf, LeafManifest, StoredLeaf, LEAF_FORMAT};
pub use leaf::{
    barycenter, incoherence, leaf_entropy, nondegeneracy_gap, optimal_ensemble, optimal_ensemble_with, relative_gap,
    FoliationOptions, Leaf, LeafFlags,
};
pub use oracle::{decomposition_variance_oracle, decomposition_variance_samples, ORACLE_MAX_DIM};
pub use qfi::{average_variance, qfi};
pub use qubit::{qubit_leaf_geometry, QubitLeafGeometry};
pub use state_hamiltonian::state_hamiltonian;
