//! The spectral shorted operator `ρ(S, A) = lim_m Σ(S, A^m)^{1/m}` and its
//! one-dimensional scalar `ρ(A, ξ)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graded::graded_right_svd;
use crate::linalg::{
    eig_psd, eig_sym, power_of, projection_meet, pseudo_inverse_of, range_subspace, sym_function_raw, unit,
    SpectralDecomposition, Subspace, SymMatrix,
};
use crate::shorted::{check_dims, short_at};
use crate::tol::Tolerances;
use crate::trace::{ConvergenceTrace, TraceStep, TraceValue};

pub const DEFAULT_K_MAX: u32 = 20;
pub const DEFAULT_M_MAX: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMethod {
    ClosedForm,
    Iterative,
}

/// One term `μⱼ (Qⱼ − Qⱼ₋₁)` of the closed-form construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShortLevel {
    pub mu: f64,
    /// `dim Qⱼ − dim Qⱼ₋₁`.
    pub rank: usize,
    pub increment: SymMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralShortResult {
    pub value: SymMatrix,
    pub levels: Vec<ShortLevel>,
    pub method: SpectralMethod,
    pub trace: Option<ConvergenceTrace>,
    /// Largest `||(I − Qⱼ) Qⱼ₋₁||₂` seen while building the nested meets.
    pub nesting_residual: f64,
}

impl SpectralShortResult {
    /// `ρ(S, A)` acting on `S`, in the coordinates of `s.basis()`.
    pub fn on_subspace(&self, s: &Subspace) -> SymMatrix {
        s.compress(&self.value)
    }

    pub fn converged(&self) -> bool {
        self.trace.as_ref().is_none_or(|t| t.converged)
    }
}

/// `ρ(S, A) = Σⱼ μⱼ (Qⱼ − Qⱼ₋₁)` where `μ₁ > μ₂ > …` are the positive levels
/// of `A` and `Qⱼ = ℵ_[μⱼ,∞)(A) ∧ P_S`.
pub fn spectral_short_closed(a: &SymMatrix, s: &Subspace, tol: &Tolerances) -> Result<SpectralShortResult> {
    check_dims(a, s)?;
    let d = eig_psd(a, tol)?;
    closed_from(&d, s, tol)
}

pub(crate) fn closed_from(d: &SpectralDecomposition, s: &Subspace, tol: &Tolerances) -> Result<SpectralShortResult> {
    let n = d.n();
    let mut value = SymMatrix::zeros(n);
    let mut prev = Subspace::zero(n);
    let mut prev_p = SymMatrix::zeros(n);
    let mut levels = Vec::new();
    let mut nesting_residual = 0.0f64;
    for level in d.positive_levels(tol).iter().rev() {
        let q = projection_meet(&d.span(level.start..n), s, tol)?;
        nesting_residual = nesting_residual.max(q.containment_residual(&prev));
        if q.dim() <= prev.dim() {
            continue;
        }
        let p = q.projection();
        let increment = p.sub(&prev_p);
        value = value.add(&increment.scale(level.value));
        levels.push(ShortLevel { mu: level.value, rank: q.dim() - prev.dim(), increment });
        prev = q;
        prev_p = p;
    }
    Ok(SpectralShortResult { value, levels, method: SpectralMethod::ClosedForm, trace: None, nesting_residual })
}

/// `ρ(S, A)` as the limit of `Bₖ = Σ(S, A^{2^k})^{1/2^k}`.
///
/// Each `Bₖ` is evaluated in the eigenbasis of `A`. With `S'` the part of `S`
/// inside `R(A)`, `Σ(S, A^m) = B (Gᵀ Λ^{−m} G)⁻¹ Bᵀ` where `B` is a basis of
/// `S'` and `G = V₊ᵀ B`. The rows of `Λ^{−m/2} G` are scaled far beyond the
/// `f64` range for large `m`, so its SVD is computed in extended-exponent
/// arithmetic and only `Lₘ = −(1/m) log(Gᵀ Λ^{−m} G)` is brought back to `f64`.
///
/// `Lₘ = L + C/m + O(rᵐ)` where `r < 1` is the largest ratio between
/// consecutive positive levels, so the extrapolation `2L_{2m} − Lₘ` converges
/// geometrically while `Bₖ` itself only converges like `2^{−k}`. The trace
/// records every `Bₖ` together with the extrapolated estimate; iteration stops
/// once either sequence moves by at most `conv_tol`.
pub fn spectral_short_iterative(a: &SymMatrix, s: &Subspace, k_max: u32, tol: &Tolerances) -> Result<SpectralShortResult> {
    check_dims(a, s)?;
    let d = eig_psd(a, tol)?;
    let n = d.n();
    let sp = projection_meet(s, &range_subspace(&d, tol), tol)?;
    let embed = |core: &DMatrix<f64>| SymMatrix::symmetrize(sp.basis() * core * sp.basis().transpose());

    if sp.is_zero() {
        let zero = SymMatrix::zeros(n);
        let step = TraceStep {
            power: 1,
            value: TraceValue::Matrix(zero.clone()),
            delta: None,
            estimate: None,
            estimate_delta: None,
            identity_residual: None,
        };
        let trace = ConvergenceTrace { steps: vec![step], converged: true, final_delta: 0.0 };
        return Ok(iterative_result(zero, trace));
    }

    let first = d.positive_levels(tol)[0].start;
    let ln_lambda: Vec<f64> = d.eigenvalues()[first..].iter().map(|x| x.ln()).collect();
    let g = d.vectors().columns(first, n - first).transpose() * sp.basis();

    let mut steps: Vec<TraceStep> = Vec::new();
    let mut prev_l: Option<DMatrix<f64>> = None;
    let mut prev_raw: Option<SymMatrix> = None;
    let mut prev_est: Option<SymMatrix> = None;
    let mut converged = false;
    let mut final_delta = f64::INFINITY;
    for k in 0..=k_max {
        let m = 2f64.powi(k as i32);
        let ln_scale: Vec<f64> = ln_lambda.iter().map(|l| -0.5 * m * l).collect();
        let (ln_sigma, u) = graded_right_svd(&g, &ln_scale)?;
        let mut scaled = u.clone();
        for (j, ls) in ln_sigma.iter().enumerate() {
            scaled.column_mut(j).scale_mut(-2.0 * ls / m);
        }
        let l = &scaled * u.transpose();
        let l = (&l + l.transpose()) * 0.5;

        let raw = embed(&sym_function_raw(&l, f64::exp)?);
        let delta = prev_raw.as_ref().map(|p| raw.max_abs_diff(p));
        let estimate = match &prev_l {
            Some(pl) => Some(embed(&sym_function_raw(&(&l * 2.0 - pl), f64::exp)?)),
            None => None,
        };
        let estimate_delta = match (&estimate, &prev_est) {
            (Some(e), Some(p)) => Some(e.max_abs_diff(p)),
            _ => None,
        };
        steps.push(TraceStep {
            power: 1u64 << k,
            value: TraceValue::Matrix(raw.clone()),
            delta,
            estimate: estimate.clone().map(TraceValue::Matrix),
            estimate_delta,
            identity_residual: None,
        });
        if let Some(x) = estimate_delta.into_iter().chain(delta).reduce(f64::min) {
            final_delta = x;
        }
        prev_l = Some(l);
        prev_raw = Some(raw);
        prev_est = estimate;
        if final_delta <= tol.conv_tol {
            converged = true;
            break;
        }
    }
    let value = prev_est.or(prev_raw).expect("at least one iterate");
    Ok(iterative_result(value, ConvergenceTrace { steps, converged, final_delta }))
}

fn iterative_result(value: SymMatrix, trace: ConvergenceTrace) -> SpectralShortResult {
    SpectralShortResult {
        value,
        levels: Vec::new(),
        method: SpectralMethod::Iterative,
        trace: Some(trace),
        nesting_residual: 0.0,
    }
}

fn check_vector(a: &SymMatrix, xi: &DVector<f64>) -> Result<DVector<f64>> {
    if xi.len() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: xi.len() });
    }
    unit(xi)
}

/// `ρ(A, ξ)`: the largest level `μ` of `A` with `ξ ∈ R(ℵ_[μ,∞)(A))`, or 0.
pub fn rho_vector(a: &SymMatrix, xi: &DVector<f64>, tol: &Tolerances) -> Result<f64> {
    let xi = check_vector(a, xi)?;
    let d = eig_psd(a, tol)?;
    Ok(rho_vector_from(&d, &xi, tol))
}

pub(crate) fn rho_vector_from(d: &SpectralDecomposition, xi: &DVector<f64>, tol: &Tolerances) -> f64 {
    let n = d.n();
    d.positive_levels(tol)
        .iter()
        .rev()
        .find(|level| d.span(level.start..n).distance(xi) <= tol.orth_tol)
        .map_or(0.0, |level| level.value)
}

/// `ρ(A, ξ) = lim ||(A^†)^m ξ||^{−1/m}`.
///
/// Returns 0 at once when `ξ ∉ R(A)`. The trace holds the raw terms
/// `||(A^†)^m ξ||^{−1/m}` (non-increasing) and, as the estimate, the ratios
/// `||(A^†)^{m−1} ξ|| / ||(A^†)^m ξ||`, which converge geometrically and
/// decide when to stop. For invertible `A` and `m ≤ 8` each step also records
/// `|Σ(A^{2m}, ξ)^{1/2m} − ||A^{−m} ξ||^{−1/m}|`.
pub fn rho_vector_power(a: &SymMatrix, xi: &DVector<f64>, m_max: u32, tol: &Tolerances) -> Result<(f64, ConvergenceTrace)> {
    let xi = check_vector(a, xi)?;
    let d = eig_psd(a, tol)?;
    if range_subspace(&d, tol).distance(&xi) > tol.orth_tol {
        let step = TraceStep {
            power: 0,
            value: TraceValue::Scalar(0.0),
            delta: None,
            estimate: None,
            estimate_delta: None,
            identity_residual: None,
        };
        return Ok((0.0, ConvergenceTrace { steps: vec![step], converged: true, final_delta: 0.0 }));
    }
    let pinv = pseudo_inverse_of(&d, tol)?;
    let invertible = d.lambda_min() > tol.rank_abs(d.norm());
    let mut eta = xi.clone();
    let mut ln_norm = 0.0;
    let mut steps: Vec<TraceStep> = Vec::new();
    let mut estimate = 0.0;
    let mut converged = false;
    let mut final_delta = f64::INFINITY;
    for m in 1..=m_max {
        let next = pinv.mul_vec(&eta);
        let r = next.norm();
        if r == 0.0 || !r.is_finite() {
            return Err(Error::Domain("pseudo-inverse iteration lost its range component".into()));
        }
        ln_norm += r.ln();
        eta = next / r;
        let raw = (-ln_norm / m as f64).exp();
        let prev = steps.last().map(|s: &TraceStep| (s.value.as_scalar().unwrap_or(0.0), estimate));
        estimate = 1.0 / r;
        let identity_residual = if invertible && m <= 8 {
            let (shorted, inverse) = identity_pair_from(&d, &pinv, &xi, m, tol)?;
            Some((shorted - inverse).abs())
        } else {
            None
        };
        let estimate_delta = prev.map(|(_, e)| (estimate - e).abs());
        steps.push(TraceStep {
            power: m as u64,
            value: TraceValue::Scalar(raw),
            delta: prev.map(|(v, _)| (raw - v).abs()),
            estimate: Some(TraceValue::Scalar(estimate)),
            estimate_delta,
            identity_residual,
        });
        if let Some(x) = estimate_delta {
            final_delta = x;
            if x <= tol.conv_tol {
                converged = true;
                break;
            }
        }
    }
    Ok((estimate, ConvergenceTrace { steps, converged, final_delta }))
}

/// Both sides of `Σ(A^{2m}, ξ)^{1/2m} = ||A^{−m} ξ||^{−1/m}` for invertible `A`:
/// the left through [`short_at`] applied to `A^{2m}`, the right by applying
/// `A⁻¹` `m` times.
pub fn inverse_power_identity(a: &SymMatrix, xi: &DVector<f64>, m: u32, tol: &Tolerances) -> Result<(f64, f64)> {
    let xi = check_vector(a, xi)?;
    if m == 0 {
        return Err(Error::Domain("identity needs m ≥ 1".into()));
    }
    let d = eig_psd(a, tol)?;
    if d.lambda_min() <= tol.rank_abs(d.norm()) {
        return Err(Error::Domain("identity needs an invertible matrix".into()));
    }
    let pinv = pseudo_inverse_of(&d, tol)?;
    identity_pair_from(&d, &pinv, &xi, m, tol)
}

fn identity_pair_from(
    d: &SpectralDecomposition,
    inv: &SymMatrix,
    xi: &DVector<f64>,
    m: u32,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    let power = power_of(d, 2.0 * m as f64, tol)?;
    let shorted = short_at(&power, &Subspace::line(xi)?, tol)?.value.quad(xi);
    let lhs = shorted.max(0.0).powf(1.0 / (2.0 * m as f64));
    let mut eta = xi.clone();
    for _ in 0..m {
        eta = inv.mul_vec(&eta);
    }
    let rhs = eta.norm().powf(-1.0 / m as f64);
    Ok((lhs, rhs))
}

/// `min σ(ρ(S, A)|_S) = max { λ ≥ 0 : P_S ≤ ℵ_[λ,∞)(A) }`, evaluated on the
/// level grid of `A`.
pub fn min_spectrum_rho(a: &SymMatrix, s: &Subspace, tol: &Tolerances) -> Result<f64> {
    check_dims(a, s)?;
    if s.is_zero() {
        return Err(Error::Domain("minimum of the spectrum needs a nonzero subspace".into()));
    }
    let d = eig_psd(a, tol)?;
    let n = d.n();
    Ok(d.positive_levels(tol)
        .iter()
        .rev()
        .find(|level| d.span(level.start..n).containment_residual(s) <= tol.orth_tol)
        .map_or(0.0, |level| level.value))
}

/// `||P_S f(ρ(S, A)) P_S − ρ(S, f(A))||_max` for a nondecreasing,
/// right-continuous `f ≥ 0`.
///
/// The left side is compressed to `S` because `f(ρ)` carries `f(0)` on
/// `S^⊥`, where `ρ(S, f(A))` vanishes. Eigenvalues at or below
/// `rank_tol · ||A||₂` are evaluated as exact zeros on both sides.
pub fn monotone_calculus_check<F: Fn(f64) -> f64>(a: &SymMatrix, s: &Subspace, f: F, tol: &Tolerances) -> Result<f64> {
    check_dims(a, s)?;
    let d = eig_psd(a, tol)?;
    let cut = tol.rank_abs(d.norm());
    let snap = |x: f64| if x <= cut { 0.0 } else { x };

    let mut samples = vec![0.0];
    samples.extend(d.level_values().into_iter().map(snap));
    let images: Vec<f64> = samples.iter().map(|&x| f(x)).collect();
    if images.iter().any(|y| !y.is_finite() || *y < 0.0) {
        return Err(Error::Domain("f must be finite and nonnegative on the spectrum".into()));
    }
    if samples.windows(2).zip(images.windows(2)).any(|(x, y)| x[1] > x[0] && y[1] < y[0]) {
        return Err(Error::Domain("f must be nondecreasing on the spectrum".into()));
    }

    let rho = closed_from(&d, s, tol)?.value;
    let f_rho = eig_sym(&rho, tol)?.apply(|x| f(snap(x)))?;
    let lhs = f_rho.congruence(s.projection().as_matrix());
    let f_a = d.apply(|x| f(snap(x)))?;
    let rhs = spectral_short_closed(&f_a, s, tol)?.value;
    Ok(lhs.max_abs_diff(&rhs))
}

/// A point of `σ_ρ(A)` together with the eigenvector that attains it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoSpectrumPoint {
    pub level: f64,
    pub witness: Vec<f64>,
    /// `ρ(A, witness)`, which equals `level`.
    pub rho: f64,
}

/// `σ_ρ(A) = { ρ(A, ξ) : ||ξ|| = 1 }`, which in finite dimension is the set of
/// levels of `A`; each is certified by one of its eigenvectors.
pub fn rho_spectrum_set(a: &SymMatrix, tol: &Tolerances) -> Result<Vec<RhoSpectrumPoint>> {
    let d = eig_psd(a, tol)?;
    let cut = tol.rank_abs(d.norm());
    Ok(d.levels()
        .iter()
        .map(|level| {
            let v = d.eigenvector(level.start);
            RhoSpectrumPoint {
                level: if level.value <= cut { 0.0 } else { level.value },
                rho: rho_vector_from(&d, &v, tol),
                witness: v.iter().copied().collect(),
            }
        })
        .collect())
}
