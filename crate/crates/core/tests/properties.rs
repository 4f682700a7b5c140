use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use specshort::harness::gen::{random_frame, random_unit, rng_from_seed, with_spectrum};
use specshort::harness::{gen_nested, gen_psd, gen_subspace, SpectrumKind, SpectrumSpec};
use specshort::kolmogorov::kolmogorov_closed;
use specshort::linalg::{eig_psd, eig_sym, matrix_power, projection_meet, pseudo_inverse, spectral_projection};
use specshort::shorted::{short_at, short_schur};
use specshort::spectral_short::spectral_short_closed;
use specshort::{Subspace, SymMatrix, Tolerances};

const KINDS: [SpectrumKind; 5] = [
    SpectrumKind::WellSeparated,
    SpectrumKind::Clustered,
    SpectrumKind::WithZeros,
    SpectrumKind::Projection,
    SpectrumKind::CommutingPair,
];

fn config() -> ProptestConfig {
    ProptestConfig { cases: 96, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..ProptestConfig::default() }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn psd(kind: usize, n: usize, seed: u64) -> SymMatrix {
    let kind = KINDS[kind % KINDS.len()];
    let kind = if kind == SpectrumKind::WithZeros && n < 2 { SpectrumKind::WellSeparated } else { kind };
    gen_psd(&SpectrumSpec::new(kind, n), seed).unwrap()
}

/// `λ_min(B − A) / max(1, ||B||)`; nonnegative exactly when `A ≤ B`.
fn loewner_slack(a: &SymMatrix, b: &SymMatrix) -> f64 {
    b.sub(a).min_eigenvalue() / b.norm2().max(1.0)
}

fn matmul(a: &SymMatrix, b: &SymMatrix) -> DMatrix<f64> {
    a.as_matrix() * b.as_matrix()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn decomposition_reconstructs(seed in any::<u64>(), n in 1usize..=16) {
        let mut rng = rng_from_seed(seed);
        let values: Vec<f64> = (0..n).map(|i| (i as f64 - n as f64 / 2.0) * 0.7).collect();
        let a = with_spectrum(&values, &mut rng);
        let d = eig_sym(&a, &tol()).unwrap();
        let v = d.vectors();
        let lambda = DMatrix::from_diagonal(&DVector::from_column_slice(d.eigenvalues()));
        let scale = a.norm2().max(1.0);
        prop_assert!((v * lambda * v.transpose() - a.as_matrix()).amax() <= 1e-12 * scale);
        prop_assert!((v.transpose() * v - DMatrix::identity(n, n)).amax() <= 1e-12);
        prop_assert!(d.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn spectral_projections_decrease(kind in 0usize..5, n in 1usize..=10, seed in any::<u64>(), x in 0.0f64..4.0, y in 0.0f64..4.0) {
        let a = psd(kind, n, seed);
        let d = eig_psd(&a, &tol()).unwrap();
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let big = spectral_projection(&d, lo);
        let small = spectral_projection(&d, hi);
        prop_assert!(big.containment_residual(&small) <= 1e-12);
        prop_assert_eq!(spectral_projection(&d, 0.0).dim(), n);
    }

    #[test]
    fn meet_is_a_lattice_operation(n in 1usize..=8, k in 0usize..=8, l in 0usize..=8, seed in any::<u64>()) {
        let p = gen_subspace(n, k.min(n), seed).unwrap();
        let q = gen_subspace(n, l.min(n), seed ^ 0xabcdef).unwrap();
        let pq = projection_meet(&p, &q, &tol()).unwrap();
        let qp = projection_meet(&q, &p, &tol()).unwrap();
        prop_assert!(p.containment_residual(&pq) <= 1e-9);
        prop_assert!(q.containment_residual(&pq) <= 1e-9);
        prop_assert!(pq.projection_distance(&qp) <= 1e-9);
        prop_assert_eq!(pq.dim(), (p.dim() + q.dim()).saturating_sub(n));
        prop_assert!(projection_meet(&p, &p, &tol()).unwrap().projection_distance(&p) <= 1e-9);
        prop_assert!(projection_meet(&p, &Subspace::full(n), &tol()).unwrap().projection_distance(&p) <= 1e-9);
        let (small, large) = gen_nested(n, k.min(n), l.max(k).min(n), seed).unwrap();
        prop_assert!(projection_meet(&small, &large, &tol()).unwrap().projection_distance(&small) <= 1e-9);
    }

    #[test]
    fn pseudo_inverse_identities(kind in 0usize..5, n in 1usize..=10, seed in any::<u64>()) {
        let a = psd(kind, n, seed);
        let p = pseudo_inverse(&a, &tol()).unwrap();
        let scale = a.norm2().max(1.0);
        let inv_scale = p.norm2().max(1.0);
        let apa = &matmul(&a, &p) * a.as_matrix();
        let pap = &matmul(&p, &a) * p.as_matrix();
        prop_assert!((apa - a.as_matrix()).amax() <= 1e-9 * scale);
        prop_assert!((pap - p.as_matrix()).amax() <= 1e-9 * inv_scale);
        let ap = matmul(&a, &p);
        let pa = matmul(&p, &a);
        prop_assert!((&ap - ap.transpose()).amax() <= 1e-9);
        prop_assert!((&pa - pa.transpose()).amax() <= 1e-9);
    }

    #[test]
    fn powers_compose(kind in 0usize..5, n in 1usize..=8, seed in any::<u64>(), s in prop::sample::select(vec![0.5, 1.0, 2.0, 2.5, 3.0]), t in 0.25f64..3.0) {
        let a = psd(kind, n, seed);
        let lhs = matrix_power(&matrix_power(&a, s, &tol()).unwrap(), t, &tol()).unwrap();
        let rhs = matrix_power(&a, s * t, &tol()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-8 * rhs.norm2().max(1.0));
    }

    #[test]
    fn shorted_operator_invariants(kind in 0usize..5, n in 1usize..=8, k in 0usize..=8, l in 0usize..=8, seed in any::<u64>()) {
        let a = psd(kind, n, seed);
        let (small, large) = gen_nested(n, k.min(n), l.max(k).min(n), seed ^ 1).unwrap();
        let at = short_at(&a, &large, &tol()).unwrap();
        let schur = short_schur(&a, &large, &tol()).unwrap();
        let scale = a.norm2().max(1.0);
        prop_assert!(at.value.max_abs_diff(&schur.value) <= 1e-8 * scale);
        prop_assert!(at.residual_range <= 1e-9 * scale && schur.residual_range <= 1e-9 * scale);
        prop_assert!(loewner_slack(&schur.value, &a) >= -1e-9);
        prop_assert!(schur.value.min_eigenvalue() >= -1e-9 * scale);
        let inner = short_schur(&a, &small, &tol()).unwrap();
        prop_assert!(loewner_slack(&inner.value, &schur.value) >= -1e-9);
        if schur.value.norm2() > 1e-8 * scale {
            let twice = short_schur(&schur.value, &small, &tol()).unwrap();
            prop_assert!(twice.value.max_abs_diff(&inner.value) <= 1e-8 * scale);
        }
    }

    #[test]
    fn rho_sits_below_a_in_the_spectral_order(kind in 0usize..5, n in 1usize..=8, k in 0usize..=8, seed in any::<u64>()) {
        let a = psd(kind, n, seed);
        let s = gen_subspace(n, k.min(n), seed ^ 2).unwrap();
        let rho = spectral_short_closed(&a, &s, &tol()).unwrap();
        let scale = a.norm2().max(1.0);
        let range = (rho.value.as_matrix() - s.projection().as_matrix() * rho.value.as_matrix()).amax();
        prop_assert!(range <= 1e-9 * scale);
        prop_assert!(rho.nesting_residual <= 1e-9);
        for m in 1..=4 {
            let am = matrix_power(&a, m as f64, &tol()).unwrap();
            let rm = matrix_power(&rho.value, m as f64, &tol()).unwrap();
            prop_assert!(am.sub(&rm).min_eigenvalue() >= -1e-9 * scale.powi(m));
        }
        let sigma = short_schur(&a, &s, &tol()).unwrap();
        prop_assert!(loewner_slack(&rho.value, &sigma.value) >= -1e-9);
    }

    #[test]
    fn kolmogorov_reads_the_top_occupied_level(n in 1usize..=8, seed in any::<u64>(), mask in any::<u16>()) {
        let mut rng = rng_from_seed(seed);
        let values: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { 1.0 + i as f64 }).collect();
        let v = random_frame(n, n, &mut rng);
        let a = SymMatrix::symmetrize(&v * DMatrix::from_diagonal(&DVector::from_vec(values.clone())) * v.transpose());
        let chosen: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        prop_assume!(!chosen.is_empty());
        let coeffs = random_unit(chosen.len(), &mut rng);
        let mut xi = DVector::zeros(n);
        for (c, &i) in coeffs.iter().zip(&chosen) {
            xi += v.column(i) * (*c + c.signum() * 0.1);
        }
        let expected = chosen.iter().map(|&i| values[i]).fold(0.0, f64::max);
        let k = kolmogorov_closed(&a, &xi, &tol()).unwrap().value;
        prop_assert!((k - expected).abs() <= 1e-9 * (1.0 + expected));
        prop_assert!(k == 0.0 || values.iter().any(|&x| (x - k).abs() <= 1e-9 * (1.0 + x)));
    }

    #[test]
    fn generators_are_reproducible(kind in 0usize..5, n in 1usize..=10, seed in any::<u64>()) {
        let a = psd(kind, n, seed);
        let b = psd(kind, n, seed);
        prop_assert_eq!(a.to_row_major(), b.to_row_major());
        prop_assert!(a.min_eigenvalue() >= -1e-12 * a.norm2().max(1.0));
    }
}
