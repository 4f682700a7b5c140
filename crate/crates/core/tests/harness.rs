use nalgebra::DVector;
use specshort::harness::{run_suite, SuiteConfig};
use specshort::linalg::projection_meet;
use specshort::shorted::short_schur;
use specshort::spectral_short::{spectral_short_closed, spectral_short_iterative, DEFAULT_K_MAX};
use specshort::{Subspace, SymMatrix, Tolerances};

fn config(trials: usize) -> SuiteConfig {
    SuiteConfig { dims: vec![2, 3, 5, 8], trials, seed: 42, ..SuiteConfig::default() }
}

#[test]
fn reports_are_deterministic() {
    let a = run_suite(&config(6));
    let b = run_suite(&config(6));
    assert_eq!(a, b);
    assert!(a.passed(), "{a:#?}");
}

#[test]
fn thread_count_does_not_change_the_report() {
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = single.install(|| run_suite(&config(5)));
    let b = many.install(|| run_suite(&config(5)));
    assert_eq!(a, b);
}

#[test]
fn different_seeds_draw_different_instances() {
    let a = run_suite(&config(3));
    let b = run_suite(&SuiteConfig { seed: 43, ..config(3) });
    let worst = |r: &specshort::harness::VerificationReport| r.theorems.iter().map(|t| t.worst_residual).collect::<Vec<_>>();
    assert_ne!(worst(&a), worst(&b));
}

#[test]
fn zero_trials_give_an_empty_passing_report() {
    let r = run_suite(&config(0));
    assert!(r.passed());
    assert_eq!(r.theorems.len(), 15);
    assert!(r.theorems.iter().chain(&r.properties).all(|t| t.failures == 0 && t.worst_residual == 0.0));
}

#[test]
fn zero_tolerance_records_a_failing_seed() {
    let mut c = config(4);
    c.overrides.insert("T4".into(), 0.0);
    let r = run_suite(&c);
    let t4 = r.theorem("T4").unwrap();
    assert!(t4.failures > 0);
    assert!(t4.failing_seed.is_some() && t4.failing_dim.is_some());
    assert!(t4.checks.iter().all(|check| check.tolerance == 0.0));
    assert_eq!(r.total_failures, t4.failures);
}

#[test]
fn check_level_override_only_touches_that_check() {
    let mut c = config(2);
    c.overrides.insert("T8.sqrt".into(), 0.5);
    let r = run_suite(&c);
    let t8 = r.theorem("T8").unwrap();
    for check in &t8.checks {
        assert_eq!(check.tolerance, if check.name == "sqrt" { 0.5 } else { 1e-8 });
    }
}

#[test]
fn negative_controls_are_detected() {
    let r = run_suite(&config(0));
    assert_eq!(r.negative_controls.len(), 3);
    assert!(r.negative_controls.iter().all(|c| c.detected), "{:#?}", r.negative_controls);
}

#[test]
fn intersection_inequality_is_reported_without_gating() {
    let r = run_suite(&config(8));
    let p4 = r.theorem("P4").unwrap();
    assert!(!p4.gating);
    assert!(r.passed());
}

#[test]
fn intersection_inequality_counterexample() {
    let tol = Tolerances::default();
    let a = SymMatrix::diag(&[1.0, 2.0, 3.0]);
    let v = |x: [f64; 3]| DVector::from_column_slice(&x);
    let s = Subspace::span_of(3, &[v([0.0, 1.0, 1.0]), v([1.0, -1.0, 1.0])], tol.orth_tol).unwrap();
    let t = Subspace::span_of(3, &[v([0.0, 1.0, 1.0]), v([1.0, 0.0, 0.0])], tol.orth_tol).unwrap();
    let xi = v([0.0, 1.0, 1.0]) / 2f64.sqrt();
    let meet = projection_meet(&s, &t, &tol).unwrap();
    assert!(meet.projection_distance(&Subspace::line(&xi).unwrap()) < 1e-14);

    let lhs = spectral_short_closed(&a, &meet, &tol).unwrap().value;
    let sigma = short_schur(&a, &s, &tol).unwrap().value;
    let rhs = spectral_short_closed(&sigma, &t, &tol).unwrap().value;
    let rhs_iterative = spectral_short_iterative(&sigma, &t, DEFAULT_K_MAX, &tol).unwrap().value;

    let expected_rhs = (37.0 - 73f64.sqrt()) / 18.0;
    assert!((lhs.quad(&xi) - 2.0).abs() < 1e-13);
    assert!((rhs.quad(&xi) - expected_rhs).abs() < 1e-12);
    assert!((rhs_iterative.quad(&xi) - expected_rhs).abs() < 1e-6);
    assert!(lhs.quad(&xi) - rhs.quad(&xi) > 0.4);
}
