use nalgebra::{DMatrix, DVector};

use super::jacobi::jacobi_svd;
use super::{eig_sym_raw, SymMatrix};
use crate::error::{Error, Result};
use crate::tol::Tolerances;

/// A subspace of `ℝⁿ` held as an `n × k` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Wraps a basis that is already orthonormal (checked against `orth_tol`).
    pub fn from_orthonormal(basis: DMatrix<f64>, orth_tol: f64) -> Result<Self> {
        let k = basis.ncols();
        let gram = basis.transpose() * &basis;
        let residual = (gram - DMatrix::<f64>::identity(k, k)).amax();
        if k > 0 && residual > orth_tol.max(64.0 * f64::EPSILON) {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(Self { basis })
    }

    /// Orthonormal basis for the span of the given columns.
    ///
    /// Pivoted modified Gram-Schmidt with one reorthogonalization pass; a
    /// column whose remaining norm drops to `rel_tol` times its original norm
    /// is discarded as dependent.
    pub fn span_of(n: usize, columns: &[DVector<f64>], rel_tol: f64) -> Result<Self> {
        let mut work: Vec<(DVector<f64>, f64)> = Vec::with_capacity(columns.len());
        for c in columns {
            if c.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.len() });
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite);
            }
            let norm = c.norm();
            if norm == 0.0 {
                return Err(Error::ZeroVector);
            }
            work.push((c.clone(), norm));
        }
        Ok(Self { basis: pivoted_gram_schmidt(n, n, work, rel_tol) })
    }

    pub fn zero(n: usize) -> Self {
        Self { basis: DMatrix::zeros(n, 0) }
    }

    pub fn full(n: usize) -> Self {
        Self { basis: DMatrix::identity(n, n) }
    }

    /// Span of the listed coordinate axes.
    pub fn coordinate(n: usize, axes: &[usize]) -> Self {
        let mut basis = DMatrix::zeros(n, axes.len());
        for (j, &i) in axes.iter().enumerate() {
            basis[(i, j)] = 1.0;
        }
        Self { basis }
    }

    /// One-dimensional span of a nonzero vector.
    pub fn line(xi: &DVector<f64>) -> Result<Self> {
        let norm = xi.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { basis: DMatrix::from_column_slice(xi.len(), 1, (xi / norm).as_slice()) })
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Orthogonal projection `B Bᵀ`.
    pub fn projection(&self) -> SymMatrix {
        SymMatrix::symmetrize(&self.basis * self.basis.transpose())
    }

    /// Orthogonal complement, built by pivoted Gram-Schmidt on the coordinate axes.
    pub fn complement(&self) -> Self {
        let n = self.ambient_dim();
        let want = n - self.dim();
        let candidates = (0..n)
            .map(|i| {
                let mut e = DVector::zeros(n);
                e[i] = 1.0;
                (project_out(&project_out(&e, &self.basis), &self.basis), 1.0)
            })
            .collect();
        Self { basis: pivoted_gram_schmidt(n, want, candidates, 0.0) }
    }

    /// `||(I − P) v||` for this subspace's projection `P`.
    pub fn distance(&self, v: &DVector<f64>) -> f64 {
        project_out(v, &self.basis).norm()
    }

    /// `||(I − P_self) B_other||₂`: zero exactly when `other ⊆ self`.
    pub fn containment_residual(&self, other: &Subspace) -> f64 {
        if other.is_zero() {
            return 0.0;
        }
        let outside = &other.basis - &self.basis * (self.basis.transpose() * &other.basis);
        spectral_norm(&outside)
    }

    /// `||P_self − P_other||_max`.
    pub fn projection_distance(&self, other: &Subspace) -> f64 {
        self.projection().max_abs_diff(&other.projection())
    }

    /// Compression `Bᵀ A B` of a matrix to this subspace.
    pub fn compress(&self, a: &SymMatrix) -> SymMatrix {
        a.compress(&self.basis)
    }
}

fn project_out(v: &DVector<f64>, basis: &DMatrix<f64>) -> DVector<f64> {
    if basis.ncols() == 0 {
        return v.clone();
    }
    v - basis * (basis.transpose() * v)
}

/// Picks at most `max_cols` columns, always the one with the largest remaining
/// relative norm next.
fn pivoted_gram_schmidt(n: usize, max_cols: usize, mut work: Vec<(DVector<f64>, f64)>, rel_tol: f64) -> DMatrix<f64> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    while !work.is_empty() && out.len() < max_cols {
        let (best, ratio) =
            work.iter()
                .enumerate()
                .map(|(i, (v, orig))| (i, v.norm() / orig))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if ratio <= rel_tol {
            break;
        }
        let (v, _) = work.remove(best);
        let q = v.normalize();
        for (w, _) in work.iter_mut() {
            for _ in 0..2 {
                let d = q.dot(w);
                w.axpy(-d, &q, 1.0);
            }
        }
        out.push(q);
    }
    let mut basis = DMatrix::zeros(n, out.len());
    for (j, q) in out.iter().enumerate() {
        basis.set_column(j, q);
    }
    basis
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    jacobi_svd(m).map_or(f64::NAN, |(sigma, _)| sigma[0])
}

/// `P ∧ Q`: the span of eigenvectors of `P_P + P_Q` with eigenvalue at least
/// `2 − meet_tol`.
pub fn projection_meet(p: &Subspace, q: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    let n = p.ambient_dim();
    if q.ambient_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: q.ambient_dim() });
    }
    if p.is_zero() || q.is_zero() {
        return Ok(Subspace::zero(n));
    }
    let sum = p.projection().add(&q.projection());
    let (values, vectors) = eig_sym_raw(&sum)?;
    let first = values.iter().position(|&v| v >= 2.0 - tol.meet_tol).unwrap_or(n);
    let basis = vectors.columns(first, n - first).into_owned();
    Ok(Subspace { basis })
}

/// Orthonormal basis of `A·S`; the rank is the number of singular values of
/// `A·basis(S)` above `rank_tol · ||A||₂`.
pub fn image_subspace(a: &SymMatrix, s: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    image_with_cutoff(a, s, tol.rank_tol)
}

pub(crate) fn image_with_cutoff(a: &SymMatrix, s: &Subspace, rel_cutoff: f64) -> Result<Subspace> {
    let n = a.n();
    if s.ambient_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: s.ambient_dim() });
    }
    if s.is_zero() {
        return Ok(Subspace::zero(n));
    }
    let norm = a.norm2();
    let image = a.as_matrix() * s.basis();
    let (sigma, columns) = jacobi_svd(&image)?;
    let cutoff = rel_cutoff * norm;
    let rank = sigma.iter().take_while(|&&s| s > cutoff && s > 0.0).count();
    let mut basis = DMatrix::zeros(n, rank);
    for j in 0..rank {
        basis.set_column(j, &(columns.column(j) / sigma[j]));
    }
    Ok(Subspace { basis })
}
