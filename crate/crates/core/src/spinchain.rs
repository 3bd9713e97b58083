//! Spin-1/2 chain Hamiltonians, thermal states and local observable catalogs.
//!
//! `H = Σ_ℓ [x_ℓ x_{ℓ+1} + g x_ℓ + h z_ℓ + D (z_ℓ y_{ℓ+1} - y_ℓ z_{ℓ+1})]`
//! with Pauli matrices `x, y, z`. Periodic chains identify site `L+1` with 1.

use std::fmt;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{boltzmann_state, Axis, DensityMatrix, HermitianOperator, PauliString};
use crate::scalar::{Real, C};

pub const MIN_SITES: usize = 2;
pub const MAX_SITES: usize = 14;

/// Default σ^x field of the nonintegrable chain, `(√5 + 5)/8`.
pub fn default_g() -> f64 {
    (5f64.sqrt() + 5.0) / 8.0
}

/// Default σ^z field of the nonintegrable chain, `√5/2`.
pub fn default_h() -> f64 {
    5f64.sqrt() / 2.0
}

/// Default antisymmetric coupling, `π/20`.
pub fn default_dm() -> f64 {
    std::f64::consts::PI / 20.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        })
    }
}

/// Chain length, couplings and boundary condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(rename = "D", default = "default_dm")]
    pub dm: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

impl ChainSpec {
    pub fn new(sites: usize, g: f64, h: f64, dm: f64, boundary: Boundary) -> Result<Self> {
        let spec = Self { sites, g, h, dm, boundary };
        spec.validate()?;
        Ok(spec)
    }

    /// The nonintegrable chain with default couplings.
    pub fn chaotic(sites: usize) -> Result<Self> {
        Self::new(sites, default_g(), default_h(), default_dm(), Boundary::Periodic)
    }

    /// Transverse-field Ising point `(0, 3/2, 0)`.
    pub fn paramagnetic(sites: usize) -> Result<Self> {
        Self::new(sites, 0.0, 1.5, 0.0, Boundary::Periodic)
    }

    /// Transverse-field Ising point `(0, 1/2, 0)`.
    pub fn ferromagnetic(sites: usize) -> Result<Self> {
        Self::new(sites, 0.0, 0.5, 0.0, Boundary::Periodic)
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_SITES..=MAX_SITES).contains(&self.sites) {
            return Err(Error::InvalidParameter(format!(
                "chain length L={} outside {MIN_SITES}..={MAX_SITES}",
                self.sites
            )));
        }
        for (name, v) in [("g", self.g), ("h", self.h), ("D", self.dm)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("coupling {name} must be finite")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.sites
    }

    /// Bonds `(ℓ, ℓ+1)`; the periodic chain adds `(L, 1)`.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let l = self.sites;
        let mut bonds: Vec<(usize, usize)> = (1..l).map(|s| (s, s + 1)).collect();
        if self.boundary == Boundary::Periodic {
            bonds.push((l, 1));
        }
        bonds
    }

    /// Hamiltonian as a list of weighted Pauli strings (zero couplings omitted).
    pub fn terms(&self) -> Result<Vec<(f64, PauliString)>> {
        self.validate()?;
        let l = self.sites;
        let mut terms = Vec::new();
        for (a, b) in self.bonds() {
            terms.push((1.0, PauliString::new(l, &[(a, Axis::X), (b, Axis::X)])?));
            if self.dm != 0.0 {
                terms.push((self.dm, PauliString::new(l, &[(a, Axis::Z), (b, Axis::Y)])?));
                terms.push((-self.dm, PauliString::new(l, &[(a, Axis::Y), (b, Axis::Z)])?));
            }
        }
        for s in 1..=l {
            if self.g != 0.0 {
                terms.push((self.g, PauliString::new(l, &[(s, Axis::X)])?));
            }
            if self.h != 0.0 {
                terms.push((self.h, PauliString::new(l, &[(s, Axis::Z)])?));
            }
        }
        Ok(terms)
    }
}

/// Dense chain Hamiltonian.
pub fn build_hamiltonian<T: Real>(spec: &ChainSpec) -> Result<HermitianOperator<T>> {
    let terms = spec.terms()?;
    let d = spec.dim();
    let mut m = Mat::<C<T>>::zeros(d, d);
    for (coeff, p) in &terms {
        p.accumulate_into(T::lit(*coeff), &mut m);
    }
    Ok(HermitianOperator::symmetrized(m))
}

/// Gibbs state of the chain at inverse temperature `beta`, with its
/// spectrum in closed form.
pub fn thermal_state<T: Real>(spec0: &ChainSpec, beta: T) -> Result<DensityMatrix<T>> {
    boltzmann_state(&build_hamiltonian::<T>(spec0)?, beta)
}

/// One labeled local observable.
#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub label: String,
    pub observable: PauliString,
}

/// Local Pauli observables, kept in structured form and materialized on
/// demand.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObservableCatalog {
    entries: Vec<CatalogEntry>,
}

impl ObservableCatalog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.iter()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.label.as_str()).collect()
    }

    pub fn get(&self, label: &str) -> Option<&PauliString> {
        self.entries.iter().find(|e| e.label == label).map(|e| &e.observable)
    }

    /// Dense matrix of the observable named `label`.
    pub fn operator<T: Real>(&self, label: &str) -> Result<HermitianOperator<T>> {
        self.get(label).ok_or_else(|| Error::InvalidParameter(format!("unknown observable {label:?}")))?.to_operator()
    }
}

/// The 12 Pauli observables on `site` and on the bond `(site, site+1)`,
/// wrapping to site 1 at the end of the chain.
pub fn local_observables(sites: usize, site: usize) -> Result<ObservableCatalog> {
    if !(MIN_SITES..=MAX_SITES).contains(&sites) {
        return Err(Error::InvalidParameter(format!("chain length L={sites} outside {MIN_SITES}..={MAX_SITES}")));
    }
    if !(1..=sites).contains(&site) {
        return Err(Error::InvalidParameter(format!("site {site} outside 1..={sites}")));
    }
    let next = if site == sites { 1 } else { site + 1 };
    let mut entries = Vec::with_capacity(12);
    for a in Axis::ALL {
        entries.push(CatalogEntry {
            label: format!("{}@{site}", a.letter()),
            observable: PauliString::new(sites, &[(site, a)])?,
        });
    }
    for a in Axis::ALL {
        for b in Axis::ALL {
            entries.push(CatalogEntry {
                label: format!("{}{}@{site},{next}", a.letter(), b.letter()),
                observable: PauliString::new(sites, &[(site, a), (next, b)])?,
            });
        }
    }
    Ok(ObservableCatalog { entries })
}
