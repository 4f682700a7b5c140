use serde::Serialize;

use crate::linalg::SymMatrix;

/// One iterate of a limit-based algorithm.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TraceValue {
    Scalar(f64),
    Matrix(SymMatrix),
}

impl TraceValue {
    /// Max-norm distance to another value of the same shape.
    pub fn distance(&self, other: &TraceValue) -> f64 {
        match (self, other) {
            (TraceValue::Scalar(a), TraceValue::Scalar(b)) => (a - b).abs(),
            (TraceValue::Matrix(a), TraceValue::Matrix(b)) => a.max_abs_diff(b),
            _ => f64::INFINITY,
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            TraceValue::Scalar(x) => Some(*x),
            TraceValue::Matrix(_) => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&SymMatrix> {
        match self {
            TraceValue::Matrix(m) => Some(m),
            TraceValue::Scalar(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    /// Exponent of the iterate (`2^k`, `n` or `m` depending on the algorithm).
    pub power: u64,
    /// The raw term of the defining sequence.
    pub value: TraceValue,
    /// Distance to the previous raw term; absent on the first step.
    pub delta: Option<f64>,
    /// Extrapolated estimate of the limit built from the raw terms so far.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<TraceValue>,
    /// Distance between consecutive extrapolated estimates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate_delta: Option<f64>,
    /// Residual of an exact identity checked alongside the iteration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity_residual: Option<f64>,
}

/// The sequence of iterates produced by a limit-based algorithm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTrace {
    pub steps: Vec<TraceStep>,
    pub converged: bool,
    pub final_delta: f64,
}

impl ConvergenceTrace {
    pub fn scalars(&self) -> Vec<f64> {
        self.steps.iter().filter_map(|s| s.value.as_scalar()).collect()
    }

    /// Most negative amount by which consecutive scalar terms violate the
    /// requested direction (0 when the sequence is monotone).
    pub fn scalar_monotonicity_violation(&self, increasing: bool) -> f64 {
        self.scalars().windows(2).map(|w| if increasing { w[0] - w[1] } else { w[1] - w[0] }).fold(0.0, f64::max)
    }

    /// Largest `−λ_min(B_{k−1} − B_k)` over consecutive matrix terms, clipped at 0:
    /// how far the sequence is from being non-increasing in the Löwner order.
    pub fn psd_monotonicity_violation(&self) -> f64 {
        let mats: Vec<&SymMatrix> = self.steps.iter().filter_map(|s| s.value.as_matrix()).collect();
        mats.windows(2).map(|w| -w[0].sub(w[1]).min_eigenvalue()).fold(0.0, f64::max)
    }

    /// The last extrapolated estimate, falling back to the last raw term.
    pub fn final_estimate(&self) -> Option<&TraceValue> {
        let last = self.steps.last()?;
        Some(last.estimate.as_ref().unwrap_or(&last.value))
    }
}
