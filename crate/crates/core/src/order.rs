//! The spectral order `A ≼ B` decided through nested spectral projections.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eig_psd, spectral_projection, SymMatrix};
use crate::tol::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderCertificate {
    pub holds: bool,
    /// A `λ` at which `ℵ_[λ,∞)(A) ≤ ℵ_[λ,∞)(B)` fails, the worst one if several do.
    pub witness_lambda: Option<f64>,
    /// `max_λ ||(I − Q_B(λ)) Q_A(λ)||₂` over the evaluation grid.
    pub worst_residual: f64,
}

/// Decides `A ≼ B`.
///
/// Both families `λ ↦ ℵ_[λ,∞)` are piecewise constant with jumps only at
/// levels, so the inclusion is tested at every level of either matrix and at
/// the midpoints between consecutive ones.
pub fn spectral_leq(a: &SymMatrix, b: &SymMatrix, tol: &Tolerances) -> Result<OrderCertificate> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: b.n() });
    }
    let da = eig_psd(a, tol)?;
    let db = eig_psd(b, tol)?;
    let mut grid: Vec<f64> = da.level_values().into_iter().chain(db.level_values()).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let midpoints: Vec<f64> = grid.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    grid.extend(midpoints);
    grid.sort_by(f64::total_cmp);

    let mut worst = 0.0f64;
    let mut witness = None;
    for &lambda in &grid {
        let qa = spectral_projection(&da, lambda);
        let qb = spectral_projection(&db, lambda);
        let r = qb.containment_residual(&qa);
        if r > worst {
            worst = r;
            if r > tol.meet_tol {
                witness = Some(lambda);
            }
        }
    }
    Ok(OrderCertificate { holds: worst <= tol.meet_tol, witness_lambda: witness, worst_residual: worst })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn commuting_ordered_pair_holds() {
        let c = spectral_leq(&SymMatrix::diag(&[1.0, 2.0]), &SymMatrix::diag(&[2.0, 3.0]), &tol()).unwrap();
        assert!(c.holds);
        assert_eq!(c.witness_lambda, None);
    }

    #[test]
    fn reflexive() {
        let a = SymMatrix::from_row_major(3, &[2.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 1.0], 0.0).unwrap();
        let c = spectral_leq(&a, &a, &tol()).unwrap();
        assert!(c.holds, "{c:?}");
    }

    #[test]
    fn loewner_but_not_spectral() {
        let a = SymMatrix::from_row_major(2, &[1.0, 1.0, 1.0, 1.0], 0.0).unwrap();
        let b = SymMatrix::from_row_major(2, &[2.0, 1.0, 1.0, 1.0], 0.0).unwrap();
        assert!(a.loewner_le(&b, 1e-12));
        let sq = |m: &SymMatrix| SymMatrix::symmetrize(m.as_matrix() * m.as_matrix());
        assert!(sq(&b).sub(&sq(&a)).min_eigenvalue() < 0.0);
        let c = spectral_leq(&a, &b, &tol()).unwrap();
        assert!(!c.holds);
        assert!(c.witness_lambda.is_some());
        assert!(c.worst_residual > 0.1);
    }
}
