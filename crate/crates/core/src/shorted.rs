//! The shorted operator `Σ(S, A)`: the largest PSD matrix below `A` whose range
//! lies in `S`.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eig_psd, eig_sym_raw, image_with_cutoff, power_of, pseudo_inverse_of, unit, Subspace, SymMatrix};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShortMethod {
    AndersonTrapp,
    Schur,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShortedResult {
    /// `Σ(S, A)` as an `n × n` matrix, zero on `S^⊥`.
    pub value: SymMatrix,
    pub method: ShortMethod,
    /// `||(I − P_S) Σ||_max`.
    pub residual_range: f64,
}

impl ShortedResult {
    /// The shorted operator acting on `S`, in the coordinates of `s.basis()`.
    pub fn on_subspace(&self, s: &Subspace) -> SymMatrix {
        s.compress(&self.value)
    }
}

pub(crate) fn check_dims(a: &SymMatrix, s: &Subspace) -> Result<()> {
    if s.ambient_dim() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: s.ambient_dim() });
    }
    Ok(())
}

fn range_residual(value: &SymMatrix, s: &Subspace) -> f64 {
    let v = value.as_matrix();
    (v - s.basis() * (s.basis().transpose() * v)).amax()
}

/// `Σ(S, A) = A^{1/2} P_M A^{1/2}` with `M = (A^{1/2}(S^⊥))^⊥`.
///
/// The image `A^{1/2}(S^⊥)` keeps singular values above
/// `√rank_tol · ||A^{1/2}||₂`, which is the same cutoff the Schur route applies
/// to the eigenvalues of `A₂₂`.
pub fn short_at(a: &SymMatrix, s: &Subspace, tol: &Tolerances) -> Result<ShortedResult> {
    check_dims(a, s)?;
    let d = eig_psd(a, tol)?;
    let root = power_of(&d, 0.5, tol)?;
    let m = image_with_cutoff(&root, &s.complement(), tol.rank_tol.sqrt())?.complement();
    let x = root.as_matrix() * m.basis();
    let value = SymMatrix::symmetrize(&x * x.transpose());
    let residual_range = range_residual(&value, s);
    Ok(ShortedResult { value, method: ShortMethod::AndersonTrapp, residual_range })
}

/// The generalized Schur complement `A₁₁ − A₁₂ A₂₂^† A₂₁` in the block basis
/// `S ⊕ S^⊥`, embedded back into `ℝⁿ`.
///
/// Eigenvalues of `A₂₂` at or below `rank_tol · ||A||₂` are treated as zero.
pub fn short_schur(a: &SymMatrix, s: &Subspace, tol: &Tolerances) -> Result<ShortedResult> {
    check_dims(a, s)?;
    let d = eig_psd(a, tol)?;
    let n = a.n();
    let bs = s.basis();
    let perp = s.complement();
    let bp = perp.basis();
    let am = a.as_matrix();
    let a11 = bs.transpose() * am * bs;
    let mut c = a11;
    if bp.ncols() > 0 && bs.ncols() > 0 {
        let a12 = bs.transpose() * am * bp;
        let a22 = bp.transpose() * am * bp;
        let (values, vectors) = eig_sym_raw(&SymMatrix::symmetrize(a22))?;
        let cut = tol.rank_abs(d.norm());
        // A₁₂ A₂₂^† A₂₁ = Σ over kept eigenpairs of (A₁₂ v)(A₁₂ v)ᵀ / λ.
        for (j, &lambda) in values.iter().enumerate() {
            if lambda > cut {
                let w = &a12 * vectors.column(j);
                c -= (&w * w.transpose()) / lambda;
            }
        }
    }
    let value = if bs.ncols() == 0 { SymMatrix::zeros(n) } else { SymMatrix::symmetrize(bs * c * bs.transpose()) };
    let residual_range = range_residual(&value, s);
    Ok(ShortedResult { value, method: ShortMethod::Schur, residual_range })
}

/// The scalar `Σ(A, ξ)` with `Σ(span ξ, A) = Σ(A, ξ) P_ξ`.
///
/// For invertible `A` this is `⟨A⁻¹ξ, ξ⟩⁻¹`; otherwise it is read off
/// [`short_at`]. `ξ` is normalized first.
pub fn short_vector(a: &SymMatrix, xi: &DVector<f64>, tol: &Tolerances) -> Result<f64> {
    if xi.len() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: xi.len() });
    }
    let xi = unit(xi)?;
    let d = eig_psd(a, tol)?;
    if d.lambda_min() > tol.rank_abs(d.norm()) {
        let inv = pseudo_inverse_of(&d, tol)?;
        return Ok(1.0 / inv.quad(&xi));
    }
    let line = Subspace::line(&xi)?;
    Ok(short_at(a, &line, tol)?.value.quad(&xi).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn diag_line() -> (SymMatrix, Subspace, DVector<f64>) {
        let xi = DVector::from_vec(vec![1.0, 1.0]) / 2f64.sqrt();
        (SymMatrix::diag(&[1.0, 2.0]), Subspace::line(&xi).unwrap(), xi)
    }

    #[test]
    fn projection_shorted_to_subspace_is_meet() {
        let a = Subspace::coordinate(3, &[0, 1]).projection();
        let s = Subspace::coordinate(3, &[1, 2]);
        let expected = Subspace::coordinate(3, &[1]).projection();
        for r in [short_at(&a, &s, &tol()).unwrap(), short_schur(&a, &s, &tol()).unwrap()] {
            assert!(r.value.max_abs_diff(&expected) < 1e-12, "{:?}", r.method);
        }
    }

    #[test]
    fn commuting_case_is_compression() {
        let a = SymMatrix::diag(&[1.0, 2.0]);
        let s = Subspace::coordinate(2, &[1]);
        let expected = SymMatrix::diag(&[0.0, 2.0]);
        assert!(short_at(&a, &s, &tol()).unwrap().value.max_abs_diff(&expected) < 1e-12);
        assert!(short_schur(&a, &s, &tol()).unwrap().value.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn skew_line_gives_four_thirds() {
        let (a, s, xi) = diag_line();
        let expected = s.projection().scale(4.0 / 3.0);
        let at = short_at(&a, &s, &tol()).unwrap();
        let schur = short_schur(&a, &s, &tol()).unwrap();
        assert!(at.value.max_abs_diff(&expected) < 1e-14);
        assert!(schur.value.max_abs_diff(&expected) < 1e-14);
        assert!((at.on_subspace(&s).get(0, 0) - 4.0 / 3.0).abs() < 1e-14);
        assert!((short_vector(&a, &xi, &tol()).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!(at.residual_range < 1e-15);
    }

    #[test]
    fn short_vector_examples() {
        let xi = DVector::from_vec(vec![0.6, 0.8, 0.0]);
        assert!((short_vector(&SymMatrix::identity(3), &xi, &tol()).unwrap() - 1.0).abs() < 1e-15);
        let e2 = DVector::from_vec(vec![0.0, 1.0]);
        assert_eq!(short_vector(&SymMatrix::diag(&[1.0, 0.0]), &e2, &tol()).unwrap(), 0.0);
        assert!(matches!(short_vector(&SymMatrix::identity(2), &DVector::zeros(2), &tol()), Err(Error::ZeroVector)));
    }

    #[test]
    fn trivial_subspaces() {
        let a = SymMatrix::from_row_major(2, &[2.0, 1.0, 1.0, 2.0], 0.0).unwrap();
        for f in [short_at, short_schur] {
            assert_eq!(f(&a, &Subspace::zero(2), &tol()).unwrap().value, SymMatrix::zeros(2));
            assert!(f(&a, &Subspace::full(2), &tol()).unwrap().value.max_abs_diff(&a) < 1e-14);
        }
    }

    #[test]
    fn rejects_indefinite_and_mismatched() {
        let bad = SymMatrix::diag(&[1.0, -1.0]);
        assert!(matches!(short_at(&bad, &Subspace::full(2), &tol()), Err(Error::NotPsd { .. })));
        assert!(matches!(short_schur(&SymMatrix::identity(3), &Subspace::full(2), &tol()), Err(Error::DimensionMismatch { .. })));
    }
}
