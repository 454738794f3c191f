//! JSON state files: `{"dims": [dA, dB], "matrix": [[[re, im], ...], ...]}`
//! or `{"dims": [dA, dB], "vector": [[re, im], ...]}`, row-major over the
//! composite index `a * dB + b`.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;
use truncent::space::harmonic_space;
use truncent::{BipartiteSpace, CMatrix, CVector, DensityOperator, PureState};

use crate::CliError;

/// Tolerance for Hermiticity, trace and norm checks on loaded files.
pub const FILE_TOL: f64 = 1e-8;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    dims: [usize; 2],
    matrix: Option<Vec<Vec<[f64; 2]>>>,
    vector: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Content {
    Matrix(CMatrix),
    Vector(CVector),
}

/// File contents exactly as written, plus the validated state.
#[derive(Clone, Debug)]
pub struct StateFile {
    pub dims: [usize; 2],
    pub content: Content,
}

#[derive(Clone, Debug)]
pub enum LoadedState {
    Pure(PureState),
    Mixed(DensityOperator),
}

impl LoadedState {
    pub fn density(&self) -> DensityOperator {
        match self {
            LoadedState::Pure(p) => DensityOperator::from_pure(p),
            LoadedState::Mixed(d) => d.clone(),
        }
    }
}

fn complex(pair: &[f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

impl StateFile {
    pub fn from_pure(dims: [usize; 2], psi: &PureState) -> Self {
        Self {
            dims,
            content: Content::Vector(psi.amplitudes().clone()),
        }
    }

    pub fn from_density(dims: [usize; 2], rho: &DensityOperator) -> Self {
        Self {
            dims,
            content: Content::Matrix(rho.matrix().clone()),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawFile = serde_json::from_str(text)
            .map_err(|e| CliError::io(format!("malformed state file: {e}")))?;
        let dim = raw.dims[0] * raw.dims[1];
        let content = match (raw.matrix, raw.vector) {
            (Some(rows), None) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(CliError::io(format!(
                        "matrix must be {dim}x{dim} for dims {:?}",
                        raw.dims
                    )));
                }
                Content::Matrix(CMatrix::from_fn(dim, dim, |i, j| complex(&rows[i][j])))
            }
            (None, Some(v)) => {
                if v.len() != dim {
                    return Err(CliError::io(format!(
                        "vector must have {dim} entries for dims {:?}, got {}",
                        raw.dims,
                        v.len()
                    )));
                }
                Content::Vector(CVector::from_iterator(dim, v.iter().map(complex)))
            }
            (Some(_), Some(_)) => {
                return Err(CliError::io("state file has both \"matrix\" and \"vector\""))
            }
            (None, None) => {
                return Err(CliError::io("state file needs a \"matrix\" or a \"vector\""))
            }
        };
        Ok(Self {
            dims: raw.dims,
            content,
        })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| e.context(&path.display().to_string()))
    }

    pub fn space(&self) -> Result<BipartiteSpace, CliError> {
        harmonic_space(self.dims[0], self.dims[1])
            .map_err(|e| CliError::io(format!("bad dims {:?}: {e}", self.dims)))
    }

    /// Checks the contents against [`FILE_TOL`].
    pub fn state(&self) -> Result<LoadedState, CliError> {
        match &self.content {
            Content::Matrix(m) => {
                let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
                if herm > FILE_TOL {
                    return Err(CliError::io(format!(
                        "matrix is not Hermitian: max |M - M†| = {herm:.3e} exceeds {FILE_TOL:.0e}"
                    )));
                }
                let tr = m.trace().re;
                if (tr - 1.0).abs() > FILE_TOL {
                    return Err(CliError::io(format!(
                        "matrix trace is {tr}, expected 1 within {FILE_TOL:.0e}"
                    )));
                }
                DensityOperator::with_tolerance(m.clone(), FILE_TOL, FILE_TOL)
                    .map(LoadedState::Mixed)
                    .map_err(|e| CliError::io(format!("invalid density matrix: {e}")))
            }
            Content::Vector(v) => {
                let norm = v.norm();
                if (norm - 1.0).abs() > FILE_TOL {
                    return Err(CliError::io(format!(
                        "vector norm is {norm}, expected 1 within {FILE_TOL:.0e}"
                    )));
                }
                PureState::new(v.clone())
                    .map(LoadedState::Pure)
                    .map_err(|e| CliError::io(format!("invalid state vector: {e}")))
            }
        }
    }

    /// Every number is written with 17 significant digits, which round-trips
    /// binary64 exactly.
    pub fn to_json(&self) -> String {
        let num = |x: f64| format!("{x:.16e}");
        let pair = |z: &Complex64| format!("[{}, {}]", num(z.re), num(z.im));
        let mut out = format!("{{\n  \"dims\": [{}, {}],\n", self.dims[0], self.dims[1]);
        match &self.content {
            Content::Vector(v) => {
                let items: Vec<String> = v.iter().map(pair).collect();
                let _ = write!(out, "  \"vector\": [{}]\n", items.join(", "));
            }
            Content::Matrix(m) => {
                out.push_str("  \"matrix\": [\n");
                for i in 0..m.nrows() {
                    let items: Vec<String> = m.row(i).iter().map(pair).collect();
                    let sep = if i + 1 < m.nrows() { "," } else { "" };
                    let _ = writeln!(out, "    [{}]{sep}", items.join(", "));
                }
                out.push_str("  ]\n");
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_json())
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_vector_and_matrix() {
        let v = StateFile::parse(r#"{"dims": [2, 2], "vector": [[1,0],[0,0],[0,0],[0,0]]}"#).unwrap();
        assert!(matches!(v.state().unwrap(), LoadedState::Pure(_)));
        let m = StateFile::parse(
            r#"{"dims": [2, 2], "matrix": [[[0.5,0],[0,0],[0,0],[0,0]],[[0,0],[0.5,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]]]}"#,
        )
        .unwrap();
        assert!(matches!(m.state().unwrap(), LoadedState::Mixed(_)));
    }

    #[test]
    fn specific_messages() {
        let m = StateFile::parse(
            r#"{"dims": [2, 2], "matrix": [[[0.5,0],[0.1,0],[0,0],[0,0]],[[0,0],[0.5,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]]]}"#,
        )
        .unwrap();
        assert!(m.state().unwrap_err().message.contains("not Hermitian"));
        let m = StateFile::parse(
            r#"{"dims": [2, 2], "matrix": [[[0.6,0],[0,0],[0,0],[0,0]],[[0,0],[0.5,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]]]}"#,
        )
        .unwrap();
        assert!(m.state().unwrap_err().message.contains("trace"));
        let bad = StateFile::parse(r#"{"dims": [2, 2], "vector": [[1,0]]}"#);
        assert!(bad.unwrap_err().message.contains("4 entries"));
    }
}
