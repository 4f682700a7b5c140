//! Dense symmetric linear algebra: eigendecomposition with level clustering,
//! functional calculus, pseudo-inverse, spectral projections and the
//! projection lattice.

pub(crate) mod jacobi;
mod matrix;
mod subspace;

use nalgebra::{DMatrix, DVector};

pub use matrix::SymMatrix;
pub(crate) use subspace::image_with_cutoff;
pub use subspace::{image_subspace, projection_meet, spectral_norm, Subspace};

use crate::error::{Error, Result};
use crate::tol::Tolerances;

/// A maximal run of eigenvalues treated as one distinct spectral value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    /// First eigenvalue index of the level (indices are ascending).
    pub start: usize,
    /// One past the last index.
    pub end: usize,
    /// Representative value: the mean of the member eigenvalues.
    pub value: f64,
}

impl Level {
    pub fn multiplicity(&self) -> usize {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    vectors: DMatrix<f64>,
    levels: Vec<Level>,
    norm: f64,
    cluster_abs: f64,
}

pub(crate) fn eig_sym_raw(a: &SymMatrix) -> Result<(Vec<f64>, DMatrix<f64>)> {
    jacobi::jacobi_eigen(a.as_matrix())
}

/// Eigendecomposition with eigenvalues clustered into levels.
///
/// A new level starts whenever an eigenvalue exceeds the first member of the
/// current level by more than `cluster_tol · max(1, ||A||₂)`, so members of a
/// level pairwise differ by at most that width.
pub fn eig_sym(a: &SymMatrix, tol: &Tolerances) -> Result<SpectralDecomposition> {
    let (eigenvalues, vectors) = eig_sym_raw(a)?;
    let norm = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cluster_abs = tol.cluster_abs(norm);
    let mut levels: Vec<Level> = Vec::new();
    let mut start = 0;
    for i in 1..=eigenvalues.len() {
        if i == eigenvalues.len() || eigenvalues[i] - eigenvalues[start] > cluster_abs {
            let value = eigenvalues[start..i].iter().sum::<f64>() / (i - start) as f64;
            levels.push(Level { start, end: i, value });
            start = i;
        }
    }
    Ok(SpectralDecomposition { eigenvalues, vectors, levels, norm, cluster_abs })
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level_values(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.value).collect()
    }

    /// Spectral norm of the decomposed matrix.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn cluster_abs(&self) -> f64 {
        self.cluster_abs
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn eigenvector(&self, i: usize) -> DVector<f64> {
        self.vectors.column(i).into_owned()
    }

    /// Levels whose value exceeds the zero cutoff `rank_tol · ||A||₂`, in ascending order.
    pub fn positive_levels(&self, tol: &Tolerances) -> Vec<Level> {
        let cut = tol.rank_abs(self.norm);
        self.levels.iter().copied().filter(|l| l.value > cut).collect()
    }

    /// Index of the level containing eigenvalue index `i`.
    pub fn level_index_of(&self, i: usize) -> usize {
        self.levels.iter().position(|l| l.start <= i && i < l.end).expect("index in range")
    }

    /// Index of the level whose value is closest to `x`.
    pub fn nearest_level(&self, x: f64) -> Option<usize> {
        self.levels.iter().enumerate().min_by(|a, b| (a.1.value - x).abs().total_cmp(&(b.1.value - x).abs())).map(|(i, _)| i)
    }

    /// First eigenvalue index belonging to `ℵ_[λ,∞)`: whole levels with
    /// value `≥ λ − cluster_abs` are included.
    pub fn first_index_at_least(&self, lambda: f64) -> usize {
        self.levels.iter().find(|l| l.value >= lambda - self.cluster_abs).map_or(self.n(), |l| l.start)
    }

    /// Span of the eigenvector columns in `range`.
    pub fn span(&self, range: std::ops::Range<usize>) -> Subspace {
        let basis = self.vectors.columns(range.start, range.end - range.start).into_owned();
        Subspace::from_orthonormal(basis, f64::INFINITY).expect("eigenvectors are orthonormal")
    }

    /// `V diag(f(λ)) Vᵀ` with `f` evaluated once per level.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> Result<SymMatrix> {
        let n = self.n();
        let mut image = vec![0.0; n];
        for level in &self.levels {
            let y = f(level.value);
            if !y.is_finite() {
                return Err(Error::Domain(format!("function is undefined at eigenvalue {}", level.value)));
            }
            image[level.start..level.end].fill(y);
        }
        let mut scaled = self.vectors.clone();
        for (j, y) in image.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*y);
        }
        Ok(SymMatrix::symmetrize(&scaled * self.vectors.transpose()))
    }

    /// `V diag(f(λᵢ)) Vᵀ` evaluated per eigenvalue on levels above `cut`, and
    /// zero on the others. Meant for continuous `f`, where evaluating at the
    /// level value would move the eigenvalues of a cluster by up to its width.
    pub(crate) fn apply_above<F: Fn(f64) -> f64>(&self, cut: f64, f: F) -> Result<SymMatrix> {
        let mut image = vec![0.0; self.n()];
        for level in self.levels.iter().filter(|l| l.value > cut) {
            for j in level.start..level.end {
                let x = if self.eigenvalues[j] > cut { self.eigenvalues[j] } else { level.value };
                let y = f(x);
                if !y.is_finite() {
                    return Err(Error::Domain(format!("function is undefined at eigenvalue {x}")));
                }
                image[j] = y;
            }
        }
        let mut scaled = self.vectors.clone();
        for (j, y) in image.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*y);
        }
        Ok(SymMatrix::symmetrize(&scaled * self.vectors.transpose()))
    }

    pub fn reconstruct(&self) -> SymMatrix {
        let mut scaled = self.vectors.clone();
        for (j, y) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*y);
        }
        SymMatrix::symmetrize(&scaled * self.vectors.transpose())
    }

    /// Fails with `NotPsd` if an eigenvalue lies below `−psd_tol · ||A||₂`.
    pub fn check_psd(&self, tol: &Tolerances) -> Result<()> {
        let bound = tol.psd_abs(self.norm);
        match self.eigenvalues.first() {
            Some(&min) if min < -bound => Err(Error::NotPsd { eigenvalue: min, bound }),
            _ => Ok(()),
        }
    }
}

/// `eig_sym` followed by the PSD check.
pub fn eig_psd(a: &SymMatrix, tol: &Tolerances) -> Result<SpectralDecomposition> {
    let d = eig_sym(a, tol)?;
    d.check_psd(tol)?;
    Ok(d)
}

/// `f(M)` for a symmetric matrix without level clustering.
pub(crate) fn sym_function_raw<F: Fn(f64) -> f64>(m: &DMatrix<f64>, f: F) -> Result<DMatrix<f64>> {
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    let (values, vectors) = eig_sym_raw(&SymMatrix::symmetrize(m.clone()))?;
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let y = f(v);
        if !y.is_finite() {
            return Err(Error::Domain(format!("function is undefined at eigenvalue {v}")));
        }
        scaled.column_mut(j).scale_mut(y);
    }
    let out = &scaled * vectors.transpose();
    Ok((&out + out.transpose()) * 0.5)
}

/// `ξ / ||ξ||`, rejecting zero and non-finite vectors.
pub fn unit(xi: &DVector<f64>) -> Result<DVector<f64>> {
    if xi.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let norm = xi.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(xi / norm)
}

/// Realizes `ℵ_[λ,∞)(A)`.
pub fn spectral_projection(d: &SpectralDecomposition, lambda: f64) -> Subspace {
    d.span(d.first_index_at_least(lambda)..d.n())
}

/// `f(A)` through the decomposition.
pub fn matrix_function<F: Fn(f64) -> f64>(d: &SpectralDecomposition, f: F) -> Result<SymMatrix> {
    d.apply(f)
}

/// `A^t` for PSD `A` and `t > 0`; eigenvalues at or below `rank_tol · ||A||₂`
/// map to zero.
pub fn matrix_power(a: &SymMatrix, t: f64, tol: &Tolerances) -> Result<SymMatrix> {
    let d = eig_sym(a, tol)?;
    power_of(&d, t, tol)
}

pub(crate) fn power_of(d: &SpectralDecomposition, t: f64, tol: &Tolerances) -> Result<SymMatrix> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("matrix power needs a finite t > 0, got {t}")));
    }
    d.check_psd(tol)?;
    d.apply_above(tol.rank_abs(d.norm()), |x| x.powf(t))
}

/// Moore-Penrose pseudo-inverse of a PSD matrix.
pub fn pseudo_inverse(a: &SymMatrix, tol: &Tolerances) -> Result<SymMatrix> {
    let d = eig_sym(a, tol)?;
    pseudo_inverse_of(&d, tol)
}

pub(crate) fn pseudo_inverse_of(d: &SpectralDecomposition, tol: &Tolerances) -> Result<SymMatrix> {
    d.check_psd(tol)?;
    d.apply_above(tol.rank_abs(d.norm()), |x| 1.0 / x)
}

/// Orthogonal projection onto `R(A)`, i.e. the positive levels.
pub(crate) fn range_subspace(d: &SpectralDecomposition, tol: &Tolerances) -> Subspace {
    match d.positive_levels(tol).first() {
        Some(l) => d.span(l.start..d.n()),
        None => Subspace::zero(d.n()),
    }
}
