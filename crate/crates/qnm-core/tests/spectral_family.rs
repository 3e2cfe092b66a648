//! Integration tests for the spectral family: boundary coefficients, indicial
//! polynomials, strips, the collocation pencil and the two-chart fields.

use num_complex::Complex64;
use qnm_core::geometry::{solve_horizons, Chart, SpacetimeParams};
use qnm_core::numerics::central_derivative;
use qnm_core::spectral_family::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn sds() -> SpacetimeParams {
    SpacetimeParams::new(1.0, 0.04)
}

fn kndsc() -> SpacetimeParams {
    let mut p = SpacetimeParams::new(1.0, 0.04);
    p.a = 0.3;
    p.charge = 0.2;
    p.alpha = 0.01;
    p.q_field = 0.15;
    p.m_field = 0.1;
    p
}

fn knds_no_accel() -> SpacetimeParams {
    let mut p = kndsc();
    p.alpha = 0.0;
    p
}

#[test]
fn sector_validation() {
    assert!(SectorConfig::default().validate().is_ok());
    assert!(SectorConfig::default().trace_class_ok());
    let bad = SectorConfig { n_depth: 2, n_prime: 2, ..Default::default() };
    assert!(bad.validate().is_err());
    let ok_not_tc = SectorConfig { n_depth: 3, n_prime: 1, ..Default::default() };
    assert!(ok_not_tc.validate().is_ok());
    assert!(!ok_not_tc.trace_class_ok());
    let cfg: SectorConfig = serde_json::from_str(r#"{"ell": 2, "N": 7, "N_prime": 2}"#).unwrap();
    assert_eq!(cfg.ell, 2);
    assert!(cfg.trace_class_ok());
    assert!(serde_json::from_str::<SectorConfig>(r#"{"bogus": 1}"#).is_err());
}

#[test]
fn a_at_horizon_is_mu_prime() {
    for p in [sds(), kndsc()] {
        let fam = SpectralFamily::new(&p, SectorConfig::with_ell(1)).unwrap();
        let h = fam.horizons().clone();
        for (hz, r) in [(Horizon::Minus, h.r_minus), (Horizon::Plus, h.r_plus)] {
            for chart in [Chart::StarEquatorial, Chart::PoleNorth] {
                let ang = if chart == Chart::StarEquatorial { [1.1, 0.0] } else { [0.2, -0.1] };
                let co = fam.coefficients(chart, hz, 0.0, ang, Complex64::new(0.3, -0.1)).unwrap();
                let want = p.mu_prime(r).abs();
                assert!((co.a - want).abs() < 1e-12 * want, "{hz:?} {chart:?}: {} vs {want}", co.a);
                assert!(co.a > 0.0);
            }
        }
    }
}

#[test]
fn b0_matches_closed_form_and_is_theta_independent() {
    let p = kndsc();
    let fam = SpectralFamily::new(&p, SectorConfig::with_ell(2)).unwrap();
    let h = fam.horizons().clone();
    let sigma = Complex64::new(0.4, -0.05);
    let l1 = 1.0 + p.lambda();
    for (hz, r) in [(Horizon::Minus, h.r_minus), (Horizon::Plus, h.r_plus)] {
        let a0 = p.mu_prime(r).abs();
        let mut first = None;
        for k in 1..12 {
            let th = 0.25 * k as f64;
            let z = th.cos();
            let rho2 = r * r + p.a * p.a * z * z;
            let s2 = th.sin().powi(2);
            let closed = -(2.0 / a0)
                * (l1 * (r * r + p.a * p.a) * (sigma - p.q_field * p.charge * r / rho2)
                    + p.a * l1 * (2.0 + p.q_field * p.charge * r * p.a * s2 / rho2));
            let co = fam.coefficients(Chart::StarEquatorial, hz, 0.0, [th, 0.0], sigma).unwrap();
            let ratio = co.b / co.a;
            assert!((ratio - closed).norm() < 1e-10 * closed.norm(), "{hz:?} θ={th}: {ratio} vs {closed}");
            assert!((fam.boundary_b0(hz, sigma) / a0 - closed).norm() < 1e-12 * closed.norm());
            assert_eq!(co.c, Complex64::new(0.0, 0.0), "c(0) must vanish equatorially");
            let f = *first.get_or_insert(co.b);
            assert!((co.b - f).norm() < 1e-10 * f.norm());
        }
    }
}

#[test]
fn b0_schwarzschild_de_sitter_form() {
    let p = sds();
    let fam = SpectralFamily::new(&p, SectorConfig::default()).unwrap();
    let h = fam.horizons().clone();
    let sigma = Complex64::new(0.7, 0.2);
    for (hz, r) in [(Horizon::Minus, h.r_minus), (Horizon::Plus, h.r_plus)] {
        let mut vals = Vec::new();
        for k in 1..20 {
            let th = std::f64::consts::PI * k as f64 / 20.0;
            vals.push(fam.coefficients(Chart::StarEquatorial, hz, 0.0, [th, 0.0], sigma).unwrap().b);
        }
        let want = -2.0 * r * r * sigma;
        for v in &vals {
            assert!((v - want).norm() < 1e-10 * want.norm(), "{v} vs {want}");
            assert!((v - vals[0]).norm() < 1e-12 * want.norm());
        }
    }
}

#[test]
fn coefficients_polynomial_in_sigma() {
    let p = kndsc();
    let fam = SpectralFamily::new(&p, SectorConfig::with_ell(1)).unwrap();
    let s = [Complex64::new(0.1, -0.2), Complex64::new(-0.4, 0.3), Complex64::new(0.9, 0.05), Complex64::new(0.35, -0.6)];
    for (chart, ang) in [(Chart::StarEquatorial, [0.9, 0.0]), (Chart::PoleSouth, [0.3, 0.25])] {
        for hz in [Horizon::Minus, Horizon::Plus] {
            let co: Vec<_> = s.iter().map(|&x| fam.coefficients(chart, hz, 0.7, ang, x).unwrap()).collect();
            // b affine: linear interpolation through s0, s1 reproduces s3
            let lin = co[0].b + (co[1].b - co[0].b) * (s[3] - s[0]) / (s[1] - s[0]);
            assert!((lin - co[3].b).norm() < 1e-12 * (1.0 + co[3].b.norm()), "{chart:?} b: {lin} vs {}", co[3].b);
            // c quadratic: Lagrange through s0, s1, s2 reproduces s3
            let mut quad = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                let mut l = Complex64::new(1.0, 0.0);
                for j in 0..3 {
                    if i != j {
                        l *= (s[3] - s[j]) / (s[i] - s[j]);
                    }
                }
                quad += co[i].c * l;
            }
            assert!((quad - co[3].c).norm() < 1e-12 * (1.0 + co[3].c.norm()), "{chart:?} c: {quad} vs {}", co[3].c);
        }
    }
}

#[test]
fn pole_coefficients_elliptic() {
    let p = kndsc();
    let fam = SpectralFamily::new(&p, SectorConfig::default()).unwrap();
    for chart in [Chart::PoleNorth, Chart::PoleSouth] {
        for &(x, y) in &[(0.0, 0.0), (0.3, -0.2), (-0.5, 0.4)] {
            let co = fam.coefficients(chart, Horizon::Minus, 0.5, [x, y], Complex64::new(0.2, 0.0)).unwrap();
            let det = co.slash_a[0] * co.slash_a[1] - 0.25 * co.breve_g_xy * co.breve_g_xy;
            assert!(co.slash_a[0] > 0.0 && co.slash_a[1] > 0.0 && det > 0.0);
        }
    }
    assert!(matches!(
        fam.coefficients(Chart::PoleNorth, Horizon::Minus, 0.5, [0.8, 0.7], Complex64::new(0.0, 0.0)),
        Err(qnm_core::QnmError::ChartDomainError(_))
    ));
}

#[test]
fn indicial_factorization_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let a0 = Complex64::new(rng.random_range(0.1..3.0), rng.random_range(-1.0..1.0));
        let b0 = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let ind = IndicialPolynomial {
            a0,
            b0,
            c0: Complex64::new(0.0, 0.0),
            k: rng.random_range(1..5) as f64,
            l: rng.random_range(-1.0..1.0),
            j: rng.random_range(1..5),
        };
        let xi = Complex64::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        let z = xi - I * (ind.k + ind.l + ind.j as f64);
        let want = a0 * z * (z + b0 / a0);
        let scale = 1.0 + a0.norm() * z.norm() * (z.norm() + (b0 / a0).norm());
        assert!((indicial_poly(&ind, xi) - want).norm() <= 1e-12 * scale);
        // shift identity 𝔭_{k,l,j} = 𝔭_{k+j−1,l} (the two-index family is the j = 1 member)
        let sh = ind.shifted_order();
        assert!((indicial_poly(&sh, xi) - indicial_poly(&ind, xi)).norm() <= 1e-12 * scale);
    }
}

#[test]
fn indicial_reference_value() {
    let ind = IndicialPolynomial {
        a0: Complex64::new(1.0, 0.0),
        b0: Complex64::new(0.0, -2.0),
        c0: Complex64::new(0.0, 0.0),
        k: 1.0,
        l: -0.5,
        j: 1,
    };
    // (−i/2)² + (−4i)(−i/2) − (i·(−2i) + 1) = −1/4 − 2 − 3
    let v = indicial_poly(&ind, Complex64::new(0.0, 0.0));
    assert!((v - Complex64::new(-5.25, 0.0)).norm() < 1e-14);
    // j = 1 with c0 ≠ 0 is the j = 0 polynomial evaluated at ξ − i
    let ind1 = IndicialPolynomial { c0: Complex64::new(0.3, 0.1), ..ind };
    let ind0 = IndicialPolynomial { j: 0, ..ind1 };
    let xi = Complex64::new(0.7, -0.2);
    assert!((indicial_poly(&ind1, xi) - indicial_poly(&ind0, xi - I)).norm() < 1e-14);
}

#[test]
fn strips_examples() {
    let h = solve_horizons(&sds()).unwrap();
    let (km, kp) = (h.kappa_minus, h.kappa_plus.abs());
    let s = critical_strips(&h, &SectorConfig::default());
    let mut want = vec![-km / 2.0, -kp / 2.0];
    want.sort_by(|a, b| a.total_cmp(b));
    assert_eq!(s.len(), 2);
    for (a, b) in s.iter().zip(&want) {
        assert!((a - b).abs() < 1e-15);
    }
    let s2 = critical_strips(&h, &SectorConfig { k: 2, n_prime: 2, n_depth: 4, ..Default::default() });
    let mut want2 = vec![-1.5 * km, -1.5 * kp, -2.5 * km, -2.5 * kp];
    want2.sort_by(|a, b| a.total_cmp(b));
    for (a, b) in s2.iter().zip(&want2) {
        assert!((a - b).abs() < 1e-15);
    }
    assert!(sigma_admissible(Complex64::new(0.3, 0.0), &s, 1e-6));
    assert!(!sigma_admissible(Complex64::new(0.3, s[0]), &s, 1e-6));
    let sig = Complex64::new(0.0, s[1] + 0.01);
    for m1 in [0.02, 0.009, 0.005] {
        if sigma_admissible(sig, &s, m1) {
            assert!(sigma_admissible(sig, &s, m1 / 2.0));
        }
    }
}

#[test]
fn indicial_real_root_iff_on_strip() {
    let p = SpacetimeParams { charge: 0.3, q_field: 0.4, a: 0.2, ..sds() };
    let fam = SpectralFamily::new(&p, SectorConfig::with_ell(1)).unwrap();
    let h = fam.horizons().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 0..50 {
        let hz = if n % 2 == 0 { Horizon::Minus } else { Horizon::Plus };
        let k = 1 + (n % 3) as u32;
        let j = 1 + (n % 2) as u32;
        let strip = -(k as f64 - 0.5 + j as f64 - 1.0) * hz.kappa(&h);
        let on = n % 4 < 2;
        let im = if on { strip } else { strip + rng.random_range(0.05..0.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 } };
        let sigma = Complex64::new(rng.random_range(-1.0..1.0), im);
        // two-index 𝔭_{σ,K,l} is the j = 1 member: 𝔭_{σ,k−1+j−1,−1/2} = 𝔭_{σ,k−1+j−1,−1/2,1}
        let ind = fam.indicial(hz, sigma, k - 1 + j - 1, -0.5, 1);
        let roots = ind.roots();
        let has_real = roots.iter().any(|r| r.im.abs() < 1e-10);
        assert_eq!(has_real, on, "n={n} σ={sigma} roots={roots:?}");
        for r in roots {
            assert!(indicial_poly(&ind, r).norm() < 1e-10 * (1.0 + ind.b0.norm() * r.norm()));
        }
    }
}

/// Reference value of P_σ(f(r)g(θ)) from the pointwise divergence-form expansion.
fn pointwise(fam: &SpectralFamily, r: f64, th: f64, sigma: Complex64, f: &dyn Fn(f64) -> Complex64, g: &dyn Fn(f64) -> Complex64) -> Complex64 {
    let lo = fam.local_operator(Chart::StarEquatorial, r, [th, 0.0], sigma).unwrap();
    let hr = 1e-3;
    let f0 = f(r);
    let f1 = central_derivative(f, r, hr);
    let f2 = central_derivative(|x| central_derivative(f, x, hr), r, hr);
    let g0 = g(th);
    let g1 = central_derivative(g, th, 1e-3);
    let g2 = central_derivative(|x| central_derivative(g, x, 1e-3), th, 1e-3);
    // D = −i∂
    lo.second[0][0] * (-f2 * g0) + 2.0 * lo.second[0][1] * (-f1 * g1) + lo.second[1][1] * (-f0 * g2)
        + lo.first[0] * (-I * f1 * g0)
        + lo.first[1] * (-I * f0 * g1)
        + lo.zeroth * f0 * g0
}

fn check_collocation_against_pointwise(p: SpacetimeParams, ell: i32, tol: f64) {
    let fam = SpectralFamily::new(&p, SectorConfig::with_ell(ell)).unwrap();
    let disc = fam.discretize(CollocationGrid { n_r: 40, n_z: 6 }).unwrap();
    let (an, as_) = fam.sector().angular_exponents(&p);
    let f = |r: f64| Complex64::new((0.3 * r).cos(), 0.2 * (0.5 * r).sin());
    let gz = move |z: f64| (1.0 - z).powf(an) * (1.0 + z).powf(as_) * Complex64::new(1.0 + 0.5 * z - 0.3 * z * z * z, 0.2 * z * z);
    let g = move |th: f64| gz(th.cos());
    let sigma = Complex64::new(0.31, -0.07);
    let v = disc.sample(|r, z| f(r) * gz(z));
    let out = disc.apply(sigma, &v).unwrap();
    let nz = disc.grid.n_z;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (i, &r) in disc.r_nodes.iter().enumerate() {
        for (j, &z) in disc.z_nodes.iter().enumerate() {
            let want = pointwise(&fam, r, z.acos(), sigma, &f, &g);
            worst = worst.max((out[i * nz + j] - want).norm());
            scale = scale.max(want.norm());
        }
    }
    assert!(worst < tol * scale, "collocation vs pointwise: {worst:e} (scale {scale:e})");
}

#[test]
fn separated_operator_spherical() {
    // a = α = 0: collocation agrees with the pointwise expansion, and P(fY)/Y is z-independent
    let p = SpacetimeParams { charge: 0.3, q_field: 0.2, m_field: 0.1, ..sds() };
    check_collocation_against_pointwise(p, 0, 1e-8);
    check_collocation_against_pointwise(p, 2, 1e-8);
    let fam = SpectralFamily::new(&p, SectorConfig::with_ell(1)).unwrap();
    let disc = fam.discretize(CollocationGrid { n_r: 40, n_z: 6 }).unwrap();
    // Y_2^1 ∝ z√(1−z²)
    let f = |r: f64| Complex64::new((0.2 * r).sin() + 1.0, 0.1 * r);
    let v = disc.sample(|r, z| f(r) * z * (1.0 - z * z).sqrt());
    let out = disc.apply(Complex64::new(0.2, -0.01), &v).unwrap();
    let nz = disc.grid.n_z;
    for i in 0..disc.r_nodes.len() {
        let z0 = disc.z_nodes[0];
        let ref_ratio = out[i * nz] / (z0 * (1.0 - z0 * z0).sqrt());
        for j in 1..nz {
            let z = disc.z_nodes[j];
            let ratio = out[i * nz + j] / (z * (1.0 - z * z).sqrt());
            assert!((ratio - ref_ratio).norm() < 1e-8 * (1.0 + ref_ratio.norm()), "separation fails at r node {i}");
        }
    }
}

#[test]
fn collocation_matches_divergence_form_general() {
    // rotating, charged, accelerating: checks every first- and zeroth-order term of the pencil
    check_collocation_against_pointwise(kndsc(), 0, 1e-8);
    check_collocation_against_pointwise(kndsc(), 1, 1e-8);
    check_collocation_against_pointwise(kndsc(), -2, 1e-8);
}

#[test]
fn apply_constant_and_linearity() {
    let p = SpacetimeParams { a: 0.2, ..sds() };
    let fam = SpectralFamily::new(&p, SectorConfig::default()).unwrap();
    let disc = fam.discretize(CollocationGrid { n_r: 16, n_z: 4 }).unwrap();
    let caps = PoleCaps::new(fam.sector(), 8).unwrap();
    let one = DualChartField::from_profile(&disc, &caps, &p, 0, |_, _| Complex64::new(1.0, 0.0));
    let out = apply_p(&one, &fam, &disc, &caps, Complex64::new(0.0, 0.0)).unwrap();
    let mx = out.eq_data.iter().chain(&out.pole_n).chain(&out.pole_s).fold(0.0f64, |m, z| m.max(z.norm()));
    assert!(mx < 1e-9, "P₀1 = {mx:e}");
    let u = DualChartField::from_profile(&disc, &caps, &p, 0, |r, z| Complex64::new(r.sin(), z));
    let v = DualChartField::from_profile(&disc, &caps, &p, 0, |r, z| Complex64::new(z * z, r.cos()));
    let s = Complex64::new(0.3, -0.1);
    let puv = apply_p(&u.add(&v), &fam, &disc, &caps, s).unwrap();
    let pu = apply_p(&u, &fam, &disc, &caps, s).unwrap();
    let pv = apply_p(&v, &fam, &disc, &caps, s).unwrap();
    let sum = pu.add(&pv);
    for (a, b) in puv.eq_data.iter().zip(&sum.eq_data).chain(puv.pole_n.iter().zip(&sum.pole_n)) {
        assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()));
    }
}

#[test]
fn hermitian_symmetry_real_sigma() {
    let p = sds();
    let fam = SpectralFamily::new(&p, SectorConfig::default()).unwrap();
    let disc = fam.discretize(CollocationGrid { n_r: 96, n_z: 6 }).unwrap();
    let h = fam.horizons().clone();
    let (lo, hi) = (h.r_minus + 0.2 * h.width(), h.r_minus + 0.8 * h.width());
    let bump = move |r: f64| {
        if r <= lo || r >= hi {
            0.0
        } else {
            let t = (r - lo) / (hi - lo);
            (-1.0 / (t * (1.0 - t))).exp() * 50.0
        }
    };
    let u = disc.sample(|r, z| Complex64::new(bump(r) * (1.0 + z), bump(r) * r.sin() * 0.3));
    let v = disc.sample(|r, z| Complex64::new(bump(r) * r.cos(), bump(r) * z * z));
    let sigma = Complex64::new(0.37, 0.0);
    let pv = disc.apply(sigma, &v).unwrap();
    let pu = disc.apply(sigma.conj(), &u).unwrap();
    let lhs = disc.inner(&u, &pv);
    let rhs = disc.inner(&pu, &v);
    assert!((lhs - rhs).norm() < 1e-8 * lhs.norm().max(1.0), "{lhs} vs {rhs}");
}

#[test]
fn chart_agreement_on_overlap() {
    let p = knds_no_accel();
    for ell in [0, 1, -2] {
        let fam = SpectralFamily::new(&p, SectorConfig::with_ell(ell)).unwrap();
        let disc = fam.discretize(CollocationGrid { n_r: 16, n_z: 12 }).unwrap();
        // z = √(1 − x² − y²) is analytic only up to the unit circle, so the cap square needs a fine grid
        let caps = PoleCaps::new(fam.sector(), 36).unwrap();
        let (an, as_) = fam.sector().angular_exponents(&p);
        let prof = move |r: f64, z: f64| {
            (1.0 - z).powf(an) * (1.0 + z).powf(as_) * Complex64::new((0.4 * r).cos() + z, 0.3 * z * z * r.sin())
        };
        let field = DualChartField::from_profile(&disc, &caps, &p, ell, prof);
        assert!(field.overlap_mismatch(&disc, &p, fam.sector()) < 1e-10);
        let out = apply_p(&field, &fam, &disc, &caps, Complex64::new(0.25, -0.05)).unwrap();
        let scale = out.eq_data.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let mism = out.overlap_mismatch(&disc, &p, fam.sector());
        assert!(mism < 1e-7 * scale, "ℓ={ell}: mismatch {mism:e} vs scale {scale:e}");
    }
}

#[test]
fn gluing_partition() {
    let s = SectorConfig::default();
    for k in 0..=2000 {
        let z = -1.0 + 2.0 * k as f64 / 2000.0;
        let w = gluing_weights(&s, z);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        assert!(w.iter().all(|&x| (0.0..=1.0).contains(&x)));
        let th = z.acos();
        if th >= s.pole_cap {
            assert_eq!(w[0], 0.0);
        }
        if th <= s.pole_blend {
            assert_eq!(w[0], 1.0);
        }
        if std::f64::consts::PI - th >= s.pole_cap {
            assert_eq!(w[3], 0.0);
        }
    }
    // cap support lies inside x² + y² < 1
    assert!(s.pole_cap.sin() < 1.0);
}

#[test]
fn resolution_errors() {
    let fam = SpectralFamily::new(&sds(), SectorConfig::default()).unwrap();
    assert!(matches!(fam.discretize(CollocationGrid { n_r: 2, n_z: 4 }), Err(qnm_core::QnmError::ResolutionError(_))));
    let disc = fam.discretize(CollocationGrid { n_r: 8, n_z: 2 }).unwrap();
    assert!(matches!(disc.apply(Complex64::new(0.0, 0.0), &[Complex64::new(0.0, 0.0); 3]), Err(qnm_core::QnmError::ResolutionError(_))));
    assert!(PoleCaps::new(fam.sector(), 2).is_err());
}

#[test]
fn pencil_finds_known_resonances() {
    // q = m = 0: σ = 0 is an exact resonance of the discrete pencil (constants are annihilated)
    let fam = SpectralFamily::new(&sds(), SectorConfig::default()).unwrap();
    let disc = fam.discretize(CollocationGrid { n_r: 12, n_z: 2 }).unwrap();
    let m = disc.matrix(Complex64::new(0.0, 0.0));
    let ones = nalgebra::DVector::from_element(disc.dim(), Complex64::new(1.0, 0.0));
    assert!((m * ones).norm() < 1e-10);
}
