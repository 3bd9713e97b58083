//! `QMAT1` binary matrix container.
//!
//! Layout: one ASCII header line `QMAT1 d=<int> kind=<kind>\n`, then `d*d`
//! entries (or `d` for `kind=state`) in row-major order, each entry stored as
//! two little-endian binary64 values (real, imaginary). No padding.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

const MAGIC: &str = "QMAT1";
const MAX_HEADER: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QmatKind {
    Hermitian,
    Density,
    Unitary,
    State,
}

impl QmatKind {
    pub fn as_str(self) -> &'static str {
        match self {
            QmatKind::Hermitian => "hermitian",
            QmatKind::Density => "density",
            QmatKind::Unitary => "unitary",
            QmatKind::State => "state",
        }
    }

    fn entries(self, d: usize) -> Option<usize> {
        match self {
            QmatKind::State => Some(d),
            _ => d.checked_mul(d),
        }
    }
}

impl fmt::Display for QmatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QmatKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hermitian" => Ok(QmatKind::Hermitian),
            "density" => Ok(QmatKind::Density),
            "unitary" => Ok(QmatKind::Unitary),
            "state" => Ok(QmatKind::State),
            other => Err(format_err(format!("unknown kind {other:?}"))),
        }
    }
}

/// Decoded container contents; `entries` is row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct QmatBlob {
    pub dim: usize,
    pub kind: QmatKind,
    pub entries: Vec<C<f64>>,
}

fn format_err(detail: impl Into<String>) -> Error {
    Error::Format { what: "QMAT1 container".into(), detail: detail.into() }
}

pub fn header(dim: usize, kind: QmatKind) -> String {
    format!("{MAGIC} d={dim} kind={kind}\n")
}

pub fn write_entries<W: Write>(
    mut w: W,
    dim: usize,
    kind: QmatKind,
    entries: impl IntoIterator<Item = C<f64>>,
) -> Result<()> {
    w.write_all(header(dim, kind).as_bytes())?;
    let expected = kind.entries(dim).ok_or_else(|| format_err("dimension overflow"))?;
    let mut n = 0usize;
    for z in entries {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
        n += 1;
    }
    if n != expected {
        return Err(format_err(format!("wrote {n} entries, expected {expected}")));
    }
    w.flush()?;
    Ok(())
}

/// Writes a square matrix (row-major on disk).
pub fn write_matrix<T: Real, W: Write>(w: W, kind: QmatKind, m: MatRef<'_, C<T>>) -> Result<()> {
    if kind == QmatKind::State || m.nrows() != m.ncols() {
        return Err(format_err("matrix kinds require a square matrix"));
    }
    let d = m.nrows();
    let it = (0..d).flat_map(move |i| (0..d).map(move |j| widen(m[(i, j)])));
    write_entries(w, d, kind, it)
}

pub fn write_vector<T: Real, W: Write>(w: W, v: &[C<T>]) -> Result<()> {
    write_entries(w, v.len(), QmatKind::State, v.iter().map(|&z| widen(z)))
}

pub fn read<R: Read>(mut r: R) -> Result<QmatBlob> {
    let mut head = Vec::with_capacity(48);
    let mut byte = [0u8; 1];
    loop {
        if r.read(&mut byte)? == 0 {
            return Err(format_err("unterminated header"));
        }
        if byte[0] == b'\n' {
            break;
        }
        head.push(byte[0]);
        if head.len() > MAX_HEADER {
            return Err(format_err("header too long"));
        }
    }
    let head = std::str::from_utf8(&head).map_err(|_| format_err("header is not ASCII"))?;
    let (dim, kind) = parse_header(head)?;
    let count = kind.entries(dim).ok_or_else(|| format_err("dimension overflow"))?;
    let bytes = count.checked_mul(16).ok_or_else(|| format_err("dimension overflow"))?;
    let mut buf = vec![0u8; bytes];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => format_err(format!("truncated payload (expected {count} entries)")),
        _ => Error::Io(e),
    })?;
    if r.read(&mut byte)? != 0 {
        return Err(format_err("trailing bytes after payload"));
    }
    let entries = buf
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            C::new(re, im)
        })
        .collect();
    Ok(QmatBlob { dim, kind, entries })
}

fn parse_header(head: &str) -> Result<(usize, QmatKind)> {
    let mut parts = head.split(' ');
    if parts.next() != Some(MAGIC) {
        return Err(format_err("missing QMAT1 magic"));
    }
    let dim = parts.next().and_then(|p| p.strip_prefix("d=")).ok_or_else(|| format_err("missing d= field"))?;
    let dim: usize = dim.parse().map_err(|_| format_err(format!("bad dimension {dim:?}")))?;
    if dim == 0 {
        return Err(format_err("dimension must be positive"));
    }
    let kind =
        parts.next().and_then(|p| p.strip_prefix("kind=")).ok_or_else(|| format_err("missing kind= field"))?.parse()?;
    if parts.next().is_some() {
        return Err(format_err("unexpected header fields"));
    }
    Ok((dim, kind))
}

impl QmatBlob {
    /// Column-major matrix view of a matrix-kind blob.
    pub fn to_matrix<T: Real>(&self) -> Result<Mat<C<T>>> {
        if self.kind == QmatKind::State {
            return Err(format_err("expected a matrix, found kind=state"));
        }
        let d = self.dim;
        Ok(Mat::from_fn(d, d, |i, j| narrow(self.entries[i * d + j])))
    }

    pub fn to_vector<T: Real>(&self) -> Result<Vec<C<T>>> {
        if self.kind != QmatKind::State {
            return Err(format_err(format!("expected kind=state, found kind={}", self.kind)));
        }
        Ok(self.entries.iter().map(|&z| narrow(z)).collect())
    }
}

pub fn write_matrix_file<T: Real>(path: &Path, kind: QmatKind, m: MatRef<'_, C<T>>) -> Result<()> {
    write_matrix(BufWriter::new(File::create(path)?), kind, m)
}

pub fn write_vector_file<T: Real>(path: &Path, v: &[C<T>]) -> Result<()> {
    write_vector(BufWriter::new(File::create(path)?), v)
}

pub fn read_file(path: &Path) -> Result<QmatBlob> {
    read(BufReader::new(File::open(path)?))
}

#[inline]
fn widen<T: Real>(z: C<T>) -> C<f64> {
    C::new(z.re.to_f64_lossy(), z.im.to_f64_lossy())
}

#[inline]
fn narrow<T: Real>(z: C<f64>) -> C<T> {
    C::new(T::lit(z.re), T::lit(z.im))
}
