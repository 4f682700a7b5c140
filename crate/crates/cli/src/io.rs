use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use specshort::nalgebra::DVector;
use specshort::{Subspace, SymMatrix, Tolerances};

use crate::error::CliError;

/// On-disk form of a symmetric matrix: row-major `data` of length `n * n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub n: usize,
    pub data: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl MatrixFile {
    pub fn from_matrix(m: &SymMatrix) -> Self {
        MatrixFile { n: m.n(), data: m.to_row_major(), name: None }
    }

    pub fn to_matrix(&self, tol: &Tolerances) -> Result<SymMatrix, CliError> {
        if self.data.len() != self.n * self.n {
            return Err(CliError::Input(format!(
                "matrix data has {} entries, expected n*n = {}",
                self.data.len(),
                self.n * self.n
            )));
        }
        Ok(SymMatrix::from_row_major(self.n, &self.data, tol.sym_tol)?)
    }
}

/// A subspace given by spanning vectors, or a single vector `xi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum SubspaceFile {
    Basis { n: usize, basis: Vec<Vec<f64>> },
    Vector { n: usize, xi: Vec<f64> },
}

impl SubspaceFile {
    fn n(&self) -> usize {
        match self {
            SubspaceFile::Basis { n, .. } | SubspaceFile::Vector { n, .. } => *n,
        }
    }

    fn vectors(&self) -> Result<Vec<DVector<f64>>, CliError> {
        let n = self.n();
        let raw: Vec<&Vec<f64>> = match self {
            SubspaceFile::Basis { basis, .. } => basis.iter().collect(),
            SubspaceFile::Vector { xi, .. } => vec![xi],
        };
        raw.into_iter()
            .enumerate()
            .map(|(i, v)| {
                if v.len() != n {
                    return Err(CliError::Input(format!("vector {i} has length {}, expected {n}", v.len())));
                }
                if v.iter().all(|x| *x == 0.0) {
                    return Err(CliError::Input(format!("vector {i} is zero")));
                }
                Ok(DVector::from_column_slice(v))
            })
            .collect()
    }

    /// Orthonormalizes the spanning vectors, dropping dependent ones.
    pub fn to_subspace(&self, tol: &Tolerances) -> Result<Subspace, CliError> {
        let vectors = self.vectors()?;
        Ok(Subspace::span_of(self.n(), &vectors, tol.orth_tol)?)
    }

    /// The single vector of a `xi` file or of a one-vector basis.
    pub fn to_vector(&self) -> Result<DVector<f64>, CliError> {
        let mut vectors = self.vectors()?;
        if vectors.len() != 1 {
            return Err(CliError::Input(format!("expected a single vector, found {}", vectors.len())));
        }
        Ok(vectors.remove(0))
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_owned(), source })
}

/// Writes pretty JSON with a trailing newline to `out`, or to stdout.
pub fn write_json<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report types always serialize");
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip_is_bitwise() {
        let data = vec![0.1 + 0.2, 1.0 / 3.0, 1.0 / 3.0, std::f64::consts::PI * 1e-300];
        let file = MatrixFile { n: 2, data: data.clone(), name: None };
        let m = file.to_matrix(&Tolerances::default()).unwrap();
        let text = serde_json::to_string(&MatrixFile::from_matrix(&m)).unwrap();
        let back: MatrixFile = serde_json::from_str(&text).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.data), bits(&data));
    }

    #[test]
    fn subspace_file_forms() {
        let tol = Tolerances::default();
        let basis: SubspaceFile = serde_json::from_str(r#"{"n": 3, "basis": [[1, 0, 0], [2, 0, 0], [0, 1, 1]]}"#).unwrap();
        assert_eq!(basis.to_subspace(&tol).unwrap().dim(), 2);
        let line: SubspaceFile = serde_json::from_str(r#"{"n": 2, "xi": [3, 4]}"#).unwrap();
        assert_eq!(line.to_subspace(&tol).unwrap().dim(), 1);
        assert_eq!(line.to_vector().unwrap()[1], 4.0);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let tol = Tolerances::default();
        let zero: SubspaceFile = serde_json::from_str(r#"{"n": 2, "xi": [0, 0]}"#).unwrap();
        assert!(matches!(zero.to_subspace(&tol), Err(CliError::Input(_))));
        let short: SubspaceFile = serde_json::from_str(r#"{"n": 3, "basis": [[1, 0]]}"#).unwrap();
        assert!(matches!(short.to_subspace(&tol), Err(CliError::Input(_))));
        let bad = MatrixFile { n: 2, data: vec![1.0; 3], name: None };
        assert!(matches!(bad.to_matrix(&tol), Err(CliError::Input(_))));
    }
}
