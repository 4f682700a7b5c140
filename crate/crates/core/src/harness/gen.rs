//! Seeded random PSD matrices, subspaces and vectors.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Subspace, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    /// Distinct eigenvalues with `λᵢ₊₁ ≥ (1 + gap) λᵢ`, starting in `[0.5, 1.5]`.
    WellSeparated,
    /// About `n/2` well-separated values, each repeated exactly.
    Clustered,
    /// `zero_count` zeros followed by well-separated positive values.
    WithZeros,
    /// An orthogonal projection of rank `max(1, n/2)`.
    Projection,
    /// A commuting pair `A ≤ B`; [`gen_psd`] returns `A`.
    CommutingPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub kind: SpectrumKind,
    pub n: usize,
    pub gap: f64,
    pub zero_count: usize,
}

impl SpectrumSpec {
    /// Gap 0.2 and, for [`SpectrumKind::WithZeros`], `max(1, n/3)` zeros.
    pub fn new(kind: SpectrumKind, n: usize) -> Self {
        let zero_count = if kind == SpectrumKind::WithZeros { (n / 3).max(1) } else { 0 };
        SpectrumSpec { kind, n, gap: 0.2, zero_count }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("spectrum needs n ≥ 1".into()));
        }
        if !(self.gap > 0.0 && self.gap.is_finite()) {
            return Err(Error::Domain(format!("gap must be positive, got {}", self.gap)));
        }
        if self.kind == SpectrumKind::WithZeros && (self.zero_count == 0 || self.zero_count >= self.n) {
            return Err(Error::Domain(format!("zero_count must lie in 1..{}, got {}", self.n, self.zero_count)));
        }
        Ok(())
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer, used to derive independent sub-seeds.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    // Filled row by row so the draw order does not depend on storage layout.
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    m
}

/// Orthonormal `n × k` frame: the Q factor of a Gaussian matrix with the signs
/// fixed so that `R` has a positive diagonal.
pub fn random_frame<R: Rng>(n: usize, k: usize, rng: &mut R) -> DMatrix<f64> {
    if k == 0 {
        return DMatrix::zeros(n, 0);
    }
    let qr = gaussian_matrix(n, k, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    random_frame(n, n, rng)
}

pub fn random_unit<R: Rng>(n: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-3 {
            return v / norm;
        }
    }
}

fn separated<R: Rng>(count: usize, gap: f64, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut x = rng.random_range(0.5..1.5);
    for _ in 0..count {
        out.push(x);
        x *= (1.0 + gap) * (1.0 + 0.25 * rng.random::<f64>());
    }
    out
}

fn spectrum<R: Rng>(spec: &SpectrumSpec, rng: &mut R) -> Vec<f64> {
    let n = spec.n;
    match spec.kind {
        SpectrumKind::WellSeparated | SpectrumKind::CommutingPair => separated(n, spec.gap, rng),
        SpectrumKind::Clustered => {
            let distinct = separated(n.div_ceil(2), spec.gap, rng);
            (0..n).map(|i| distinct[i * distinct.len() / n]).collect()
        }
        SpectrumKind::WithZeros => {
            let mut v = vec![0.0; spec.zero_count];
            v.extend(separated(n - spec.zero_count, spec.gap, rng));
            v
        }
        SpectrumKind::Projection => {
            let rank = (n / 2).max(1);
            (0..n).map(|i| if i >= n - rank { 1.0 } else { 0.0 }).collect()
        }
    }
}

/// `V diag(λ) Vᵀ` for a random orthogonal `V`.
pub fn with_spectrum<R: Rng>(values: &[f64], rng: &mut R) -> SymMatrix {
    let v = random_orthogonal(values.len(), rng);
    assemble(&v, values)
}

fn assemble(v: &DMatrix<f64>, values: &[f64]) -> SymMatrix {
    let mut scaled = v.clone();
    for (j, &x) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(x);
    }
    SymMatrix::symmetrize(&scaled * v.transpose())
}

/// A random PSD matrix whose spectrum follows `spec`; bitwise reproducible per seed.
pub fn gen_psd(spec: &SpectrumSpec, seed: u64) -> Result<SymMatrix> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let values = spectrum(spec, &mut rng);
    Ok(with_spectrum(&values, &mut rng))
}

/// A commuting pair `A ≤ B`, hence `A ≼ B`: shared eigenvectors and
/// `λ_B ≥ λ_A` entrywise. Some eigenvalues are left equal.
pub fn gen_pair(spec: &SpectrumSpec, seed: u64) -> Result<(SymMatrix, SymMatrix)> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let la = spectrum(spec, &mut rng);
    let v = random_orthogonal(spec.n, &mut rng);
    let lb: Vec<f64> =
        la.iter().map(|&x| if rng.random_bool(0.25) { x } else { x * (1.0 + 0.5 * rng.random::<f64>()) }).collect();
    Ok((assemble(&v, &la), assemble(&v, &lb)))
}

/// A random `k`-dimensional subspace of `ℝⁿ`.
pub fn gen_subspace(n: usize, k: usize, seed: u64) -> Result<Subspace> {
    if k > n {
        return Err(Error::Domain(format!("subspace dimension {k} exceeds ambient dimension {n}")));
    }
    let mut rng = rng_from_seed(seed);
    Subspace::from_orthonormal(random_frame(n, k, &mut rng), 1e-12)
}

/// Random subspaces `S ⊆ T` with `dim S = k_small`, `dim T = k_big`: `S` is
/// spanned by the first columns of a frame for `T`.
pub fn gen_nested(n: usize, k_small: usize, k_big: usize, seed: u64) -> Result<(Subspace, Subspace)> {
    if k_small > k_big || k_big > n {
        return Err(Error::Domain(format!("need {k_small} ≤ {k_big} ≤ {n}")));
    }
    let mut rng = rng_from_seed(seed);
    let frame = random_frame(n, k_big, &mut rng);
    let small = frame.columns(0, k_small).into_owned();
    Ok((Subspace::from_orthonormal(small, 1e-12)?, Subspace::from_orthonormal(frame, 1e-12)?))
}
