//! On-disk cache of chain Hamiltonian eigendecompositions.

use std::path::{Path, PathBuf};

use leafkit_core::qmat::{self, QmatKind};
use leafkit_core::{build_hamiltonian, spectral_decompose, ChainSpec, SpectralDecomposition, C};

use crate::error::{CliResult, Context};
use crate::manifest::sha256_hex;

pub const CACHE_ENV: &str = "LEAFKIT_CACHE";
const KEY_PREFIX: &str = "leafkit-spectrum/1 f64\n";

/// Eigendecompositions keyed by a content hash of the [`ChainSpec`].
///
/// Entries are QMAT1 pairs (eigenvalues as a state vector, eigenvectors as
/// a unitary). Unreadable entries are recomputed.
#[derive(Clone, Debug, Default)]
pub struct SpectrumCache {
    dir: Option<PathBuf>,
}

impl SpectrumCache {
    pub fn disabled() -> Self {
        Self { dir: None }
    }

    pub fn at(dir: impl Into<PathBuf>) -> Self {
        Self { dir: Some(dir.into()) }
    }

    /// `$LEAFKIT_CACHE`, else `$HOME/.cache/leafkit`. An empty value disables caching.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(v) if v.is_empty() => Self::disabled(),
            Some(v) => Self::at(v),
            None => std::env::var_os("HOME")
                .map(|h| Self::at(Path::new(&h).join(".cache").join("leafkit")))
                .unwrap_or_default(),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn key(spec: &ChainSpec) -> String {
        let body = serde_json::to_string(spec).expect("spec serializes");
        sha256_hex(format!("{KEY_PREFIX}{body}").as_bytes())
    }

    fn paths(&self, spec: &ChainSpec) -> Option<(PathBuf, PathBuf)> {
        let key = Self::key(spec);
        self.dir.as_ref().map(|d| (d.join(format!("{key}_values.qmat")), d.join(format!("{key}_vectors.qmat"))))
    }

    pub fn spectrum(&self, spec: &ChainSpec) -> CliResult<SpectralDecomposition<f64>> {
        if let Some(hit) = self.load(spec) {
            return Ok(hit);
        }
        let h = build_hamiltonian::<f64>(spec).context(|| format!("building Hamiltonian L={}", spec.sites))?;
        let s = spectral_decompose(&h).context(|| format!("diagonalizing Hamiltonian L={}", spec.sites))?;
        drop(h);
        self.store(spec, &s);
        Ok(s)
    }

    fn load(&self, spec: &ChainSpec) -> Option<SpectralDecomposition<f64>> {
        let (vals, vecs) = self.paths(spec)?;
        let values: Vec<C<f64>> = qmat::read_file(&vals).ok()?.to_vector().ok()?;
        let vectors = qmat::read_file(&vecs).ok()?;
        if vectors.kind != QmatKind::Unitary || values.len() != spec.dim() {
            return None;
        }
        let vectors = vectors.to_matrix::<f64>().ok()?;
        SpectralDecomposition::from_parts(values.iter().map(|z| z.re).collect(), vectors).ok()
    }

    /// Best effort: a failed write only costs a recomputation later.
    fn store(&self, spec: &ChainSpec, s: &SpectralDecomposition<f64>) {
        let Some((vals, vecs)) = self.paths(spec) else { return };
        let Some(dir) = vals.parent() else { return };
        if std::fs::create_dir_all(dir).is_err() {
            return;
        }
        let values: Vec<C<f64>> = s.eigenvalues().iter().map(|&e| C::new(e, 0.0)).collect();
        let tmp_vals = vals.with_extension("qmat.tmp");
        let tmp_vecs = vecs.with_extension("qmat.tmp");
        let ok = qmat::write_vector_file(&tmp_vals, &values).is_ok()
            && qmat::write_matrix_file(&tmp_vecs, QmatKind::Unitary, s.eigenvectors()).is_ok()
            && std::fs::rename(&tmp_vecs, &vecs).is_ok()
            && std::fs::rename(&tmp_vals, &vals).is_ok();
        if !ok {
            let _ = std::fs::remove_file(&tmp_vals);
            let _ = std::fs::remove_file(&tmp_vecs);
        }
    }
}
