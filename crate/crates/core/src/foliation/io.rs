use std::fs;
use std::path::{Path, PathBuf};

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::HermitianOperator;
use crate::qmat::{self, QmatKind};
use crate::scalar::{Real, C};

use super::{Leaf, LeafFlags};

pub const LEAF_FORMAT: &str = "leafkit-leaf/1";

/// JSON side of a stored leaf; matrices live in the referenced QMAT1 files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeafManifest {
    pub format: String,
    pub dim: usize,
    pub energies: Vec<f64>,
    pub populations: Vec<f64>,
    pub source_energy: f64,
    pub flags: LeafFlags,
    /// File name of `H_ρ` (kind `hermitian`), relative to the manifest.
    pub h_rho: String,
    /// File name of the state matrix, columns `φ_i` (kind `unitary`).
    pub states: String,
}

/// A leaf read back from disk.
#[derive(Clone, Debug)]
pub struct StoredLeaf<T: Real> {
    pub manifest: LeafManifest,
    pub h_rho: HermitianOperator<T>,
    pub states: Mat<C<T>>,
}

/// Writes `<stem>.json`, `<stem>_h_rho.qmat` and `<stem>_states.qmat` into `dir`.
/// Returns the paths written, manifest first.
pub fn write_leaf<T: Real>(dir: &Path, stem: &str, leaf: &Leaf<T>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let manifest = LeafManifest {
        format: LEAF_FORMAT.into(),
        dim: leaf.dim(),
        energies: leaf.energies().iter().map(|e| e.to_f64_lossy()).collect(),
        populations: leaf.populations().iter().map(|p| p.to_f64_lossy()).collect(),
        source_energy: leaf.source_energy().to_f64_lossy(),
        flags: leaf.flags().clone(),
        h_rho: format!("{stem}_h_rho.qmat"),
        states: format!("{stem}_states.qmat"),
    };
    let h_path = dir.join(&manifest.h_rho);
    let s_path = dir.join(&manifest.states);
    qmat::write_matrix_file(&h_path, QmatKind::Hermitian, leaf.h_rho().as_mat())?;
    qmat::write_matrix_file(&s_path, QmatKind::Unitary, leaf.states())?;
    let json_path = dir.join(format!("{stem}.json"));
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| format_err(e.to_string()))?;
    fs::write(&json_path, text + "\n")?;
    Ok(vec![json_path, h_path, s_path])
}

/// Reads a leaf written by [`write_leaf`] from its manifest path.
pub fn read_leaf<T: Real>(manifest_path: &Path) -> Result<StoredLeaf<T>> {
    let text = fs::read_to_string(manifest_path)?;
    let manifest: LeafManifest = serde_json::from_str(&text).map_err(|e| format_err(e.to_string()))?;
    if manifest.format != LEAF_FORMAT {
        return Err(format_err(format!("unsupported format {:?}", manifest.format)));
    }
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let h = qmat::read_file(&dir.join(&manifest.h_rho))?;
    let s = qmat::read_file(&dir.join(&manifest.states))?;
    let d = manifest.dim;
    if h.dim != d || s.dim != d || manifest.energies.len() != d || manifest.populations.len() != d {
        return Err(format_err("dimension mismatch between manifest and matrices".into()));
    }
    if h.kind != QmatKind::Hermitian || s.kind != QmatKind::Unitary {
        return Err(format_err("unexpected QMAT1 kinds".into()));
    }
    Ok(StoredLeaf { h_rho: HermitianOperator::new(h.to_matrix()?)?, states: s.to_matrix()?, manifest })
}

fn format_err(detail: String) -> Error {
    Error::Format { what: "leaf manifest".into(), detail }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foliation::optimal_ensemble;
    use crate::operator::DensityMatrix;

    #[test]
    fn roundtrip() {
        let rho = DensityMatrix::from_bloch([0.3, 0.2, -0.1]).unwrap();
        let h = HermitianOperator::from_real_rows(&[&[1.0, 0.5], &[0.5, -0.2]]).unwrap();
        let leaf = optimal_ensemble(&rho, &h).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = write_leaf(dir.path(), "leaf", &leaf).unwrap();
        let back = read_leaf::<f64>(&paths[0]).unwrap();
        assert_eq!(back.manifest.energies, leaf.energies());
        assert_eq!(back.states, leaf.states().to_owned());
        assert!(back.h_rho.distance(leaf.h_rho()).unwrap() == 0.0);

        fs::write(&paths[0], "{\"format\": 1}").unwrap();
        assert!(matches!(read_leaf::<f64>(&paths[0]), Err(Error::Format { .. })));
    }
}
