//! Oracle tests of the geometry module: horizon structure, chart changes,
//! potentials and rescaling.

use num_complex::Complex64;
use qnm_core::geometry::*;
use qnm_core::QnmError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Componentwise tolerance of the chart-change check.
const CHART_TOL: f64 = 1e-10;

fn kerr_newman_like() -> SpacetimeParams {
    SpacetimeParams { mass: 1.0, lambda_cc: 0.04, a: 0.1, charge: 0.1, alpha: 0.01, q_field: 0.0, m_field: 0.0 }
}

fn jacobian_star(bl: &InverseMetric, tp: f64, pp: f64) -> [[f64; 4]; 4] {
    // t* = t − T(r), φ* = φ − Φ(r): dt* = dt − T′dr, dφ* = dφ − Φ′dr
    let j = [[1.0, -tp, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, -pp, 0.0, 1.0]];
    let mut out = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut s = 0.0;
            for c in 0..4 {
                for d in 0..4 {
                    s += j[a][c] * j[b][d] * bl.g[c][d];
                }
            }
            out[a][b] = s;
        }
    }
    out
}

#[test]
fn star_chart_is_jacobian_pushforward_of_boyer_lindquist() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for params in [kerr_newman_like(), SpacetimeParams::new(1.0, 0.04)] {
        let h = solve_horizons(&params).unwrap();
        for gauge in [
            StarGauge::default_bump(&params, &h).unwrap(),
            StarGauge::with_mollifier(&params, &h, Mollifier::Polynomial).unwrap(),
        ] {
            for _ in 0..100 {
                let r = h.r_minus + h.width() * rng.random_range(0.02..0.98);
                let th = rng.random_range(0.05..3.09);
                let bl = inverse_metric(&ChartPoint { chart: Chart::BoyerLindquist, r, angular: [th, 0.3] }, &params, &h, &gauge).unwrap();
                let st = inverse_metric(&ChartPoint { chart: Chart::StarEquatorial, r, angular: [th, 0.3] }, &params, &h, &gauge).unwrap();
                let pushed = jacobian_star(&bl, gauge.t_prime(r), gauge.phi_prime(r));
                for a in 0..4 {
                    for b in 0..4 {
                        let scale = 1.0 + pushed[a][b].abs();
                        assert!(
                            (pushed[a][b] - st.g[a][b]).abs() < CHART_TOL * scale,
                            "component ({a},{b}) at r={r}, θ={th}: {} vs {}",
                            pushed[a][b],
                            st.g[a][b]
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn pole_chart_matches_equatorial_chart_change() {
    // g^{x*x*} = (∂x/∂θ)² g^{θθ} + (∂x/∂φ*)² g^{φ*φ*}, etc.
    let params = kerr_newman_like();
    let h = solve_horizons(&params).unwrap();
    let gauge = StarGauge::default_bump(&params, &h).unwrap();
    let l1 = 1.0 + params.lambda();
    let kn = params.kappa(1.0) / l1;
    for &(r, th, ph) in &[(3.0, 0.4, 0.2), (5.5, 0.9, 1.3), (h.r_minus + 0.01, 0.2, -0.7)] {
        let st = inverse_metric(&ChartPoint { chart: Chart::StarEquatorial, r, angular: [th, ph] }, &params, &h, &gauge).unwrap();
        let pb = kn * ph;
        let (x, y) = (th.sin() * pb.cos(), th.sin() * pb.sin());
        let pc = inverse_metric(&ChartPoint { chart: Chart::PoleNorth, r, angular: [x, y] }, &params, &h, &gauge).unwrap();
        let xt = th.cos() * pb.cos();
        let yt = th.cos() * pb.sin();
        let xp = -kn * y;
        let yp = kn * x;
        let gxx = xt * xt * st.g[2][2] + xp * xp * st.g[3][3];
        let gxy = xt * yt * st.g[2][2] + xp * yp * st.g[3][3];
        let gyy = yt * yt * st.g[2][2] + yp * yp * st.g[3][3];
        let gtx = xp * st.g[0][3];
        let gry = yp * st.g[1][3];
        for (a, b) in [(gxx, pc.g[2][2]), (gxy, pc.g[2][3]), (gyy, pc.g[3][3]), (gtx, pc.g[0][2]), (gry, pc.g[1][3])] {
            assert!((a - b).abs() < 1e-11 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }
}

#[test]
fn pole_values_at_the_pole() {
    let params = kerr_newman_like();
    let h = solve_horizons(&params).unwrap();
    let gauge = StarGauge::default_bump(&params, &h).unwrap();
    let k0 = params.kappa(1.0);
    let pc = inverse_metric(&ChartPoint { chart: Chart::PoleNorth, r: 4.0, angular: [0.0, 0.0] }, &params, &h, &gauge).unwrap();
    assert!((pc.g_scaled[2][2] + k0).abs() < 1e-13);
    assert!((pc.g_scaled[3][3] + k0).abs() < 1e-13);
    assert_eq!(pc.g_scaled[2][3], 0.0);
    assert!(inverse_metric(&ChartPoint { chart: Chart::PoleNorth, r: 4.0, angular: [0.8, 0.7] }, &params, &h, &gauge).is_err());
}

#[test]
fn star_and_pole_components_finite_at_horizons_and_stable() {
    let params = kerr_newman_like();
    let h = solve_horizons(&params).unwrap();
    for gauge in [StarGauge::default_bump(&params, &h).unwrap(), StarGauge::with_mollifier(&params, &h, Mollifier::Polynomial).unwrap()] {
        for (rh, sgn) in [(h.r_minus, 1.0), (h.r_plus, -1.0)] {
            for chart in [Chart::StarEquatorial, Chart::PoleNorth, Chart::PoleSouth] {
                let ang = if chart == Chart::StarEquatorial { [1.0, 0.0] } else { [0.2, 0.1] };
                let at = inverse_metric(&ChartPoint { chart, r: rh, angular: ang }, &params, &h, &gauge).unwrap();
                let mut prev: Option<[[f64; 4]; 4]> = None;
                for k in 4..8 {
                    let eps = h.width() * 2f64.powi(-(k * 4));
                    let g = inverse_metric(&ChartPoint { chart, r: rh + sgn * eps, angular: ang }, &params, &h, &gauge).unwrap().g;
                    for a in 0..4 {
                        for b in 0..4 {
                            assert!(g[a][b].is_finite());
                            assert!((g[a][b] - at.g[a][b]).abs() < 1e-3 * (1.0 + at.g[a][b].abs()));
                            if let Some(p) = prev {
                                // differences shrink under refinement
                                assert!((g[a][b] - at.g[a][b]).abs() <= (p[a][b] - at.g[a][b]).abs() + 1e-14);
                            }
                        }
                    }
                    prev = Some(g);
                }
            }
        }
    }
}

#[test]
fn boyer_lindquist_spherical_case() {
    let params = SpacetimeParams::new(1.0, 0.04);
    let h = solve_horizons(&params).unwrap();
    let gauge = StarGauge::default_bump(&params, &h).unwrap();
    let r = 4.0;
    let g = inverse_metric(&ChartPoint { chart: Chart::BoyerLindquist, r, angular: [1.0, 0.0] }, &params, &h, &gauge).unwrap();
    assert_eq!(g.g[0][3], 0.0);
    assert!((g.g[1][1] + params.mu(r) / (r * r)).abs() < 1e-14);
    assert!(matches!(
        inverse_metric(&ChartPoint { chart: Chart::BoyerLindquist, r: h.r_minus, angular: [1.0, 0.0] }, &params, &h, &gauge),
        Err(QnmError::ChartDomainError(_))
    ));
}

#[test]
fn schwarzschild_limit_of_surface_gravity() {
    // κ₋ → 1/(4M) with O(Λ) error; |κ₊|/√Λ → 1/√3 (de Sitter value) monotonically
    let limit = 1.0 / 3f64.sqrt();
    let mut last_gap = f64::INFINITY;
    for lam in [1e-2, 1e-3, 1e-4] {
        let h = solve_horizons(&SpacetimeParams::new(1.0, lam)).unwrap();
        assert!((h.kappa_minus - 0.25).abs() < 1.5 * lam);
        let gap = (h.kappa_plus.abs() / lam.sqrt() - limit).abs();
        assert!(gap < last_gap);
        last_gap = gap;
    }
    assert!(last_gap < 0.01);
}

#[test]
fn validation_examples() {
    let p = kerr_newman_like();
    let h = solve_horizons(&p).unwrap();
    let rep = validate_assumptions(&p, &h).unwrap();
    assert!(rep.passed && rep.min_kappa > 0.0 && rep.surface_gravity_signs_ok);
    let zero_alpha = SpacetimeParams { alpha: 0.0, ..p };
    let h0 = solve_horizons(&zero_alpha).unwrap();
    assert!((validate_assumptions(&zero_alpha, &h0).unwrap().min_omega - 1.0).abs() < 1e-15);
    // αr₊ ≥ 1 violates Ω > 0 at (r₊, θ = 0)
    let mut bad = zero_alpha;
    bad.alpha = 1.0 / h0.r_plus * 1.05;
    if let Ok(hb) = solve_horizons(&bad) {
        match validate_assumptions(&bad, &hb) {
            Err(QnmError::AssumptionViolated { theta, r, .. }) => {
                assert!(theta.abs() < 1e-6);
                assert!((r - hb.r_plus).abs() < 1e-6 * hb.r_plus);
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }
}

#[test]
fn kappa_tilde_examples() {
    let p = SpacetimeParams { alpha: 0.0, ..kerr_newman_like() };
    assert!((kappa_tilde(&p, Pole::North, 1.0) + p.lambda()).abs() < 1e-15);
    let q = kerr_newman_like();
    let expect = 2.0 * q.alpha * q.mass - (q.alpha.powi(2) * (q.a * q.a + q.charge.powi(2) * (1.0 + q.lambda()).powi(2)) + q.lambda());
    assert!((kappa_tilde(&q, Pole::North, 0.0) - expect).abs() < 1e-15);
}

#[test]
fn potential_examples() {
    let p = SpacetimeParams { charge: 0.2, ..SpacetimeParams::new(1.0, 0.04) };
    let h = solve_horizons(&p).unwrap();
    let g = StarGauge::default_bump(&p, &h).unwrap();
    let pc = potential(&ChartPoint { chart: Chart::StarEquatorial, r: 4.0, angular: [0.7, 0.0] }, &p, &g).unwrap();
    assert_eq!(pc.a_phi, 0.0);
    assert!((pc.a_t + 0.2 / 4.0).abs() < 1e-15);
    let rot = SpacetimeParams { a: 0.3, ..p };
    let hr = solve_horizons(&rot).unwrap();
    let gr = StarGauge::default_bump(&rot, &hr).unwrap();
    let eq = potential(&ChartPoint { chart: Chart::StarEquatorial, r: 4.0, angular: [std::f64::consts::FRAC_PI_2, 0.0] }, &rot, &gr).unwrap();
    assert!((eq.a_t + 0.2 / 4.0).abs() < 1e-15);
    // residual A_r − R′ is finite at r₋ and equals A_t·(−c₋) there (a = 0)
    let near = |eps: f64| {
        let r = h.r_minus + eps;
        let c = potential(&ChartPoint { chart: Chart::StarEquatorial, r, angular: [0.7, 0.0] }, &p, &g).unwrap();
        c.a_r.unwrap() - g.r_prime(r)
    };
    let limit = -p.charge / h.r_minus * -g.c_minus(h.r_minus);
    assert!((near(1e-7) - limit).abs() < 1e-5);
    let at = potential(&ChartPoint { chart: Chart::StarEquatorial, r: h.r_minus, angular: [0.7, 0.0] }, &p, &g).unwrap();
    assert!(at.a_r.is_none());
    assert!((at.a_r_residual - limit).abs() < 1e-14);
    // pole-chart potential finite at the pole
    let pole = potential(&ChartPoint { chart: Chart::PoleNorth, r: 4.0, angular: [0.0, 0.0] }, &rot, &gr).unwrap();
    assert_eq!(pole.a_xstar, Some(0.0));
}

#[test]
fn rescaling_examples() {
    let p = SpacetimeParams { mass: 2.0, lambda_cc: 1e-26, a: 0.3, charge: 0.4, alpha: 1e-14, q_field: 0.5, m_field: 1e-13 };
    let (pp, s) = rescale(&p, Complex64::new(1e-13, -1e-14));
    assert!((pp.mass - 2e-13).abs() < 1e-27);
    assert!((pp.q_field * pp.charge - p.q_field * p.charge).abs() < 1e-15);
    assert!((s - Complex64::new(1.0, -0.1)).norm() < 1e-12);
    assert_eq!(pp.lambda_cc, 1.0);
}
