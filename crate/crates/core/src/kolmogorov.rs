//! Generalized Kolmogorov complexity `k(A, ξ) = lim ⟨Aⁿξ, ξ⟩^{1/n}`: the top of
//! the spectral support of `ξ` under `A`.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eig_psd, pseudo_inverse_of, range_subspace, unit, SpectralDecomposition, SymMatrix};
use crate::spectral_short::rho_vector;
use crate::tol::Tolerances;
use crate::trace::{ConvergenceTrace, TraceStep, TraceValue};

pub const DEFAULT_N_MAX: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KolmogorovMethod {
    ClosedForm,
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KolmogorovResult {
    pub value: f64,
    pub method: KolmogorovMethod,
    pub trace: Option<ConvergenceTrace>,
    /// Set when the power estimate disagreed with the closed form, in which
    /// case `value` holds the closed form.
    pub replaced_by_closed_form: bool,
}

impl KolmogorovResult {
    /// `K(A, ξ) = log k(A, ξ)`, which is `−∞` when `k = 0`.
    pub fn log_value(&self) -> f64 {
        if self.value > 0.0 {
            self.value.ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

fn prepare(a: &SymMatrix, xi: &DVector<f64>, tol: &Tolerances) -> Result<(SpectralDecomposition, DVector<f64>)> {
    if xi.len() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: xi.len() });
    }
    let xi = unit(xi)?;
    Ok((eig_psd(a, tol)?, xi))
}

fn closed_from(d: &SpectralDecomposition, xi: &DVector<f64>, tol: &Tolerances) -> f64 {
    let n = d.n();
    d.positive_levels(tol)
        .iter()
        .rev()
        .find(|level| (d.vectors().columns(level.start, n - level.start).transpose() * xi).norm() > tol.orth_tol)
        .map_or(0.0, |level| level.value)
}

/// `k(A, ξ) = sup { μ ∈ σ(A) : ℵ_[μ,∞)(A) ξ ≠ 0 }` over the positive levels;
/// `ξ` is normalized first, so the result does not depend on its scale.
pub fn kolmogorov_closed(a: &SymMatrix, xi: &DVector<f64>, tol: &Tolerances) -> Result<KolmogorovResult> {
    let (d, xi) = prepare(a, xi, tol)?;
    Ok(KolmogorovResult {
        value: closed_from(&d, &xi, tol),
        method: KolmogorovMethod::ClosedForm,
        trace: None,
        replaced_by_closed_form: false,
    })
}

/// `k(A, ξ)` from the sequence `sₙ = ⟨Aⁿξ, ξ⟩^{1/n}`.
///
/// Powers are applied to a renormalized vector `wⱼ = Aʲξ / ||Aʲξ||` while
/// `log ||Aʲξ||` is accumulated, so `⟨A^{2j}ξ, ξ⟩ = ||Aʲξ||²` and
/// `⟨A^{2j+1}ξ, ξ⟩ = ||Aʲξ||² ⟨Awⱼ, wⱼ⟩` never overflow. The raw terms `sₙ`
/// approach the limit like `1/n`; the consecutive ratios
/// `⟨A^{n+1}ξ, ξ⟩ / ⟨Aⁿξ, ξ⟩` converge geometrically and serve as the estimate
/// that decides when to stop.
///
/// If the final estimate differs from the closed form by more than
/// `1e-6 · max(1, ||A||₂)` the closed form is returned and the result is flagged.
pub fn kolmogorov_power(a: &SymMatrix, xi: &DVector<f64>, n_max: u32, tol: &Tolerances) -> Result<KolmogorovResult> {
    let (d, xi) = prepare(a, xi, tol)?;
    let mut w = xi.clone();
    let mut ln_norm = 0.0; // log ||Aʲξ||
    let mut steps: Vec<TraceStep> = Vec::new();
    let mut converged = false;
    let mut final_delta = f64::INFINITY;
    let mut estimate = 0.0;
    let mut push = |n: u32, ln_moment: f64, ratio: f64, steps: &mut Vec<TraceStep>| -> bool {
        let s = if ln_moment == f64::NEG_INFINITY { 0.0 } else { (ln_moment / n as f64).exp() };
        let prev =
            steps.last().map(|p| (p.value.as_scalar().unwrap_or(0.0), p.estimate.as_ref().and_then(TraceValue::as_scalar)));
        let estimate_delta = prev.and_then(|(_, e)| e).map(|e| (ratio - e).abs());
        steps.push(TraceStep {
            power: n as u64,
            value: TraceValue::Scalar(s),
            delta: prev.map(|(v, _)| (s - v).abs()),
            estimate: Some(TraceValue::Scalar(ratio)),
            estimate_delta,
            identity_residual: None,
        });
        estimate = ratio;
        if let Some(x) = estimate_delta {
            final_delta = x;
            return x <= tol.conv_tol;
        }
        false
    };
    let mut n = 0;
    while n < n_max {
        let aw = a.mul_vec(&w);
        let rayleigh = aw.dot(&w).max(0.0);
        let next_norm = aw.norm();
        // n + 1 = 2j + 1: moment ||Aʲξ||² ⟨Awⱼ, wⱼ⟩, ratio to the previous moment ⟨Awⱼ, wⱼ⟩.
        n += 1;
        let ln_odd = 2.0 * ln_norm + rayleigh.ln();
        if push(n, ln_odd, rayleigh, &mut steps) {
            converged = true;
            break;
        }
        if n >= n_max {
            break;
        }
        // n + 1 = 2j + 2: moment ||A^{j+1}ξ||², ratio ||Awⱼ||² / ⟨Awⱼ, wⱼ⟩.
        n += 1;
        let ratio = if rayleigh > 0.0 { next_norm * next_norm / rayleigh } else { 0.0 };
        let ln_even = 2.0 * (ln_norm + next_norm.ln());
        if push(n, ln_even, ratio, &mut steps) {
            converged = true;
            break;
        }
        if next_norm == 0.0 {
            converged = true;
            final_delta = 0.0;
            break;
        }
        ln_norm += next_norm.ln();
        w = aw / next_norm;
    }
    let closed = closed_from(&d, &xi, tol);
    let disagree = (estimate - closed).abs() > 1e-6 * d.norm().max(1.0);
    Ok(KolmogorovResult {
        value: if disagree { closed } else { estimate },
        method: KolmogorovMethod::Power,
        trace: Some(ConvergenceTrace { steps, converged, final_delta }),
        replaced_by_closed_form: disagree,
    })
}

/// `(k(A, ξ), ρ(A^†, Pξ / ||Pξ||)⁻¹)` with `P` the projection onto `R(A)`;
/// both are 0 when `Pξ = 0`.
pub fn kolmogorov_duality(a: &SymMatrix, xi: &DVector<f64>, tol: &Tolerances) -> Result<(f64, f64)> {
    let (d, xi) = prepare(a, xi, tol)?;
    let range = range_subspace(&d, tol);
    let pxi = range.basis() * (range.basis().transpose() * &xi);
    if pxi.norm() <= tol.orth_tol {
        return Ok((0.0, 0.0));
    }
    let k = closed_from(&d, &xi, tol);
    let pinv = pseudo_inverse_of(&d, tol)?;
    let rho = rho_vector(&pinv, &pxi, tol)?;
    Ok((k, if rho > 0.0 { 1.0 / rho } else { 0.0 }))
}

/// The three level-grid characterizations of `k(A, ξ)`, computed independently:
///
/// 1. the least level `λ` with `ξ ∈ R(ℵ_(−∞,λ](A))`;
/// 2. the greatest level `μ` whose own eigenspace meets `ξ`;
/// 3. the greatest level `μ` with `ℵ_[μ,∞)(A) ξ ≠ 0`.
///
/// Levels at or below the zero cutoff report as 0.
pub fn kolmogorov_characterizations(a: &SymMatrix, xi: &DVector<f64>, tol: &Tolerances) -> Result<[f64; 3]> {
    let (d, xi) = prepare(a, xi, tol)?;
    let n = d.n();
    let cut = tol.rank_abs(d.norm());
    let snap = |x: f64| if x <= cut { 0.0 } else { x };
    let coords = d.vectors().transpose() * &xi;
    let levels = d.levels();

    let below = levels.iter().find(|l| coords.rows(l.end, n - l.end).norm() <= tol.orth_tol).map_or(0.0, |l| snap(l.value));
    let own =
        levels.iter().rev().find(|l| coords.rows(l.start, l.multiplicity()).norm() > tol.orth_tol).map_or(0.0, |l| snap(l.value));
    let above = closed_from(&d, &xi, tol);
    Ok([below, own, above])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn ones3() -> DVector<f64> {
        DVector::from_vec(vec![1.0, 1.0, 1.0]) / 3f64.sqrt()
    }

    #[test]
    fn closed_examples() {
        let a = SymMatrix::diag(&[1.0, 2.0, 3.0]);
        assert_eq!(kolmogorov_closed(&a, &ones3(), &tol()).unwrap().value, 3.0);
        assert_eq!(kolmogorov_closed(&a, &DVector::from_vec(vec![0.0, 4.0, 0.0]), &tol()).unwrap().value, 2.0);
        let r = kolmogorov_closed(&SymMatrix::diag(&[2.0, 0.0]), &DVector::from_vec(vec![0.0, 1.0]), &tol()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.log_value(), f64::NEG_INFINITY);
        assert!(matches!(kolmogorov_closed(&a, &DVector::zeros(3), &tol()), Err(Error::ZeroVector)));
    }

    #[test]
    fn power_examples() {
        let a = SymMatrix::diag(&[1.0, 2.0, 3.0]);
        let r = kolmogorov_power(&a, &ones3(), DEFAULT_N_MAX, &tol()).unwrap();
        let trace = r.trace.as_ref().unwrap();
        let s = trace.scalars();
        assert!((s[0] - 2.0).abs() < 1e-15);
        assert!((s[1] - (14.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(trace.converged);
        assert!(!r.replaced_by_closed_form);
        assert!((r.value - 3.0).abs() < 1e-8);
        assert!(trace.scalar_monotonicity_violation(true) <= 1e-15);

        let c = SymMatrix::identity(3).scale(1.7);
        let r = kolmogorov_power(&c, &ones3(), DEFAULT_N_MAX, &tol()).unwrap();
        assert!(r.trace.unwrap().scalars().iter().all(|&x| (x - 1.7).abs() < 1e-15));
    }

    #[test]
    fn power_in_kernel_is_zero() {
        let r = kolmogorov_power(&SymMatrix::diag(&[2.0, 0.0]), &DVector::from_vec(vec![0.0, 1.0]), 10, &tol()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn truncation_invariance() {
        let a = SymMatrix::diag(&[1.0, 2.0, 3.0]);
        let truncated = DVector::from_vec(vec![0.0, 1.0, 1.0]);
        let r = kolmogorov_power(&a, &truncated, DEFAULT_N_MAX, &tol()).unwrap();
        assert!((r.value - 3.0).abs() < 1e-8);
    }

    #[test]
    fn duality_examples() {
        let a = SymMatrix::diag(&[1.0, 2.0, 3.0]);
        let (k, dual) = kolmogorov_duality(&a, &ones3(), &tol()).unwrap();
        assert_eq!(k, 3.0);
        assert!((k / dual - 1.0).abs() < 1e-15);

        let xi = DVector::from_vec(vec![1.0, 1.0]) / 2f64.sqrt();
        let (k, dual) = kolmogorov_duality(&SymMatrix::diag(&[2.0, 0.0]), &xi, &tol()).unwrap();
        assert_eq!((k, dual), (2.0, 2.0));
        let zero = kolmogorov_duality(&SymMatrix::diag(&[2.0, 0.0]), &DVector::from_vec(vec![0.0, 3.0]), &tol()).unwrap();
        assert_eq!(zero, (0.0, 0.0));
    }

    #[test]
    fn characterizations_agree() {
        let a = SymMatrix::diag(&[0.0, 1.0, 2.0, 3.0]);
        for xi in [[1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0], [1.0, 0.0, 0.0, 0.0], [0.3, 0.0, 2.0, 0.0]] {
            let c = kolmogorov_characterizations(&a, &DVector::from_vec(xi.to_vec()), &tol()).unwrap();
            assert!(c[0] == c[1] && c[1] == c[2], "{xi:?}: {c:?}");
        }
    }
}
