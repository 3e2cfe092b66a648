//! Integration tests for contour counting, power sums, error constants and location.

use num_complex::Complex64;
use qnm_core::resonance_finder::*;
use qnm_core::QnmError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn quadratic_two_zeros_symmetric() {
    let f = AnalyticFn(|s: Complex64| s * s - 1.0);
    let r = count_zeros(&ContourSpec::circle(c(0.0, 0.0), 2.0), &f, 2).unwrap();
    assert_eq!(r.winding, 2);
    assert!((r.n_quadrature - 2.0).abs() < 1e-8);
    assert!(r.power_sums[1].norm() < 1e-8, "S1 = {}", r.power_sums[1]);
    assert!((r.power_sums[2] - 2.0).norm() < 1e-6, "S2 = {}", r.power_sums[2]);
}

#[test]
fn quadratic_single_zero() {
    let f = AnalyticFn(|s: Complex64| s * s - 1.0);
    let r = count_zeros(&ContourSpec::circle(c(1.0, 0.0), 0.5), &f, 1).unwrap();
    assert_eq!(r.winding, 1);
    assert!((r.power_sums[1] - 1.0).norm() < 1e-8, "S1 = {}", r.power_sums[1]);
}

#[test]
fn locate_two_roots() {
    let (a, b) = (c(0.3, 0.1), c(0.0, -0.2));
    let f = AnalyticFn(move |s: Complex64| (s - a) * (s - b));
    let z = locate(&ContourSpec::circle(c(0.0, 0.0), 1.0), &f, 12, &[]).unwrap();
    assert_eq!(z.len(), 2);
    let mut found: Vec<Complex64> = z.iter().map(|l| l.sigma).collect();
    found.sort_by(|x, y| x.im.partial_cmp(&y.im).unwrap());
    assert!((found[0] - b).norm() < 1e-8 && (found[1] - a).norm() < 1e-8, "{found:?}");
}

#[test]
fn zero_on_subdivision_line_is_recovered() {
    // the first split of the unit circle's bounding box passes through Re σ = 0.0246
    let a = c(0.0246, 0.3);
    let b = c(-0.5, -0.0342);
    let f = AnalyticFn(move |s: Complex64| (s - a) * (s - b));
    let z = locate(&ContourSpec::circle(c(0.0, 0.0), 1.0), &f, 12, &[]).unwrap();
    assert_eq!(z.len(), 2);
    for root in [a, b] {
        assert!(z.iter().any(|l| (l.sigma - root).norm() < 1e-8), "{root} not in {z:?}");
    }
}

#[test]
fn empty_region() {
    let f = AnalyticFn(|s: Complex64| s - 5.0);
    let z = locate(&ContourSpec::circle(c(0.0, 0.0), 1.0), &f, 8, &[]).unwrap();
    assert!(z.is_empty());
    assert_eq!(count_zeros(&ContourSpec::circle(c(0.0, 0.0), 1.0), &f, 0).unwrap().winding, 0);
}

#[test]
fn zero_on_contour_is_rejected() {
    let f = AnalyticFn(|s: Complex64| s - 1.0);
    let e = count_zeros(&ContourSpec::circle(c(0.0, 0.0), 1.0), &f, 0).unwrap_err();
    assert!(matches!(e, QnmError::NearZeroOnContour { .. }), "{e:?}");
}

#[test]
fn contour_validation() {
    let ok = ContourSpec::circle(c(0.0, 0.0), 0.1);
    assert!(ok.validate(&[-0.5]).is_ok());
    assert!(matches!(ok.validate(&[-0.05]), Err(QnmError::StripCollision { .. })));
    assert!(ok.with_nodes(31).validate(&[]).is_err());
    assert!(ok.with_nodes(16).validate(&[]).is_err());
    let mut m = ok;
    m.margin = 0.5;
    assert!(m.validate(&[-0.55]).is_err());
    assert!((ok.resolved_delta_prime(&[-0.5]) - 0.2).abs() < 1e-15);
}

#[test]
fn quadrature_agrees_with_winding_and_contours_agree() {
    let zs = [c(0.1, 0.05), c(-0.2, 0.1), c(0.05, -0.3)];
    let f = AnalyticFn(move |s: Complex64| zs.iter().map(|z| s - z).product::<Complex64>() * (s * 0.3).exp());
    let circ = count_zeros(&ContourSpec::circle(c(0.0, 0.0), 0.6).with_nodes(64), &f, 1).unwrap();
    let rect = count_zeros(&ContourSpec::rectangle(c(-0.5, -0.5), c(0.4, 0.3)).with_nodes(512), &f, 1).unwrap();
    assert_eq!(circ.winding, 3);
    assert_eq!(rect.winding, 3);
    assert!((circ.n_quadrature - 3.0).abs() < 0.1);
    assert!((rect.n_quadrature - 3.0).abs() < 0.1);
    let s1: Complex64 = zs.iter().sum();
    // central differences at h = length/(8n) limit S1 for non-polynomial D
    assert!((circ.power_sums[1] - s1).norm() < 1e-4);
    assert!((rect.power_sums[1] - s1).norm() < 1e-3);
}

#[test]
fn error_constants_exact_and_power_scaling() {
    let f = AnalyticFn(|s: Complex64| s - 0.1);
    let contour = ContourSpec::circle(c(0.2, 0.1), 0.5);
    let r = count_report(&contour, &f, &[], 3).unwrap();
    assert_eq!(r.c_r, 0.0);
    assert!(r.certified);

    struct Budgeted;
    impl DetEvaluator for Budgeted {
        fn evaluate(&self, s: Complex64) -> qnm_core::Result<DetPoint> {
            Ok(DetPoint { value: s - 0.1, dfrak: 1e-6, k_trace: 0.5 })
        }
    }
    let r = count_report(&contour, &Budgeted, &[], 3).unwrap();
    assert!(r.c_r > 0.0);
    let modulus = contour.modulus();
    for n in 0..=3 {
        assert!((r.c_tilde_r[n] / r.c_r - modulus.powi(n as i32)).abs() < 1e-14 * modulus.powi(n as i32).max(1.0));
    }
    struct Blowup;
    impl DetEvaluator for Blowup {
        fn evaluate(&self, s: Complex64) -> qnm_core::Result<DetPoint> {
            Ok(DetPoint { value: s - 0.1, dfrak: 0.04, k_trace: 0.0 })
        }
    }
    let small = ContourSpec::circle(c(0.1, 0.0), 0.3);
    assert!(matches!(count_report(&small, &Blowup, &[], 1), Err(QnmError::BudgetBlowup { .. }) | Err(QnmError::NearZeroOnContour { .. })));
}

#[test]
fn randomized_counts_and_locations() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let n = rng.random_range(1..5);
        let roots: Vec<Complex64> = (0..n).map(|_| c(rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8))).collect();
        let outside = c(2.0, 0.3);
        let rr = roots.clone();
        let f = AnalyticFn(move |s: Complex64| rr.iter().map(|z| s - z).product::<Complex64>() * (s - outside));
        let contour = ContourSpec::circle(c(0.0, 0.0), 1.2);
        let cnt = count_zeros(&contour, &f, 1).unwrap();
        assert_eq!(cnt.winding, n as i64);
        let z = locate(&contour, &f, 16, &[]).unwrap();
        assert_eq!(z.len(), n);
        for root in &roots {
            assert!(z.iter().any(|l| (l.sigma - root).norm() < 1e-8), "{root} not found in {z:?}");
        }
    }
}

#[test]
fn conjugation_symmetric_pairs() {
    // D(−σ̄) = conj D(σ) ⇒ zeros come in pairs σ, −σ̄
    let z0 = c(0.3, -0.1);
    let f = AnalyticFn(move |s: Complex64| (s - z0) * (s + z0.conj()));
    let z = locate(&ContourSpec::circle(c(0.0, 0.0), 1.0), &f, 10, &[]).unwrap();
    assert_eq!(z.len(), 2);
    assert!((z[0].sigma + z[1].sigma.conj()).norm() < 1e-6);
}

#[test]
fn locate_refuses_strip_crossing() {
    let f = AnalyticFn(|s: Complex64| s - c(0.0, 0.05));
    let e = locate(&ContourSpec::circle(c(0.0, 0.0), 0.2), &f, 8, &[-0.1]).unwrap_err();
    assert!(matches!(e, QnmError::StripCollision { .. }));
    let z = locate(&ContourSpec::circle(c(0.0, 0.0), 0.2), &f, 8, &[-0.25]).unwrap();
    assert_eq!(z.len(), 1);
    assert!((z[0].sigma - c(0.0, 0.05)).norm() < 1e-10);
}
