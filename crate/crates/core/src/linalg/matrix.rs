use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::jacobi::jacobi_eigen;
use crate::error::{Error, Result};

/// Dense real symmetric matrix.
///
/// Construction symmetrizes the input as `(M + Mᵀ) / 2`, so every value of this
/// type is exactly symmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RowMajor", into = "RowMajor")]
pub struct SymMatrix {
    m: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct RowMajor {
    n: usize,
    data: Vec<f64>,
}

impl TryFrom<RowMajor> for SymMatrix {
    type Error = Error;

    fn try_from(value: RowMajor) -> Result<Self> {
        SymMatrix::from_row_major(value.n, &value.data, crate::Tolerances::default().sym_tol)
    }
}

impl From<SymMatrix> for RowMajor {
    fn from(value: SymMatrix) -> Self {
        RowMajor { n: value.n(), data: value.to_row_major() }
    }
}

impl SymMatrix {
    /// Checks squareness and symmetry (relative to `max(1, max |a_ij|)`), then symmetrizes.
    pub fn new(m: DMatrix<f64>, sym_tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = m.nrows();
        let scale = m.amax().max(1.0);
        for i in 0..n {
            for j in (i + 1)..n {
                let diff = (m[(i, j)] - m[(j, i)]).abs();
                if diff > sym_tol * scale {
                    return Err(Error::NotSymmetric { i, j, diff });
                }
            }
        }
        Ok(Self::symmetrize(m))
    }

    pub fn from_row_major(n: usize, data: &[f64], sym_tol: f64) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        Self::new(DMatrix::from_row_slice(n, n, data), sym_tol)
    }

    /// Symmetrizes without checking. Used for results of computations that are
    /// symmetric up to roundoff.
    pub fn symmetrize(m: DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "symmetrize needs a square matrix");
        let t = m.transpose();
        Self { m: (m + t) * 0.5 }
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: DMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: DMatrix::identity(n, n) }
    }

    pub fn diag(values: &[f64]) -> Self {
        Self { m: DMatrix::from_diagonal(&DVector::from_column_slice(values)) }
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.m[(i, j)]);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.m.amax()
    }

    /// Eigenvalues in ascending order; all `NaN` if the input is not finite.
    pub fn eigenvalues(&self) -> Vec<f64> {
        jacobi_eigen(&self.m).map_or_else(|_| vec![f64::NAN; self.n()], |(values, _)| values)
    }

    /// Spectral norm, i.e. the largest eigenvalue magnitude.
    pub fn norm2(&self) -> f64 {
        let values = self.eigenvalues();
        match (values.first(), values.last()) {
            (Some(lo), Some(hi)) => lo.abs().max(hi.abs()),
            _ => 0.0,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { m: &self.m * c }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { m: &self.m + &other.m }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { m: &self.m - &other.m }
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.m * x
    }

    pub fn quad(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.m * x))
    }

    /// `X A Xᵀ` for a (possibly rectangular) `X`.
    pub fn congruence(&self, x: &DMatrix<f64>) -> Self {
        Self::symmetrize(x * &self.m * x.transpose())
    }

    /// `Bᵀ A B`, the compression of `A` onto the column span of `B`.
    pub fn compress(&self, basis: &DMatrix<f64>) -> Self {
        Self::symmetrize(basis.transpose() * &self.m * basis)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.m - &other.m).amax()
    }

    /// Smallest eigenvalue (`+inf` for the empty matrix).
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(f64::INFINITY)
    }

    /// Löwner order `self ≤ other` up to `tol`: every eigenvalue of
    /// `other - self` is at least `-tol`.
    pub fn loewner_le(&self, other: &Self, tol: f64) -> bool {
        other.sub(self).min_eigenvalue() >= -tol
    }
}
