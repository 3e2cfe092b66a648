//! Spacetime geometry of accelerating, rotating, charged black holes in de Sitter space.
//!
//! The module holds the physical parameters, solves the quartic horizon
//! function μ(r) for the event/cosmological horizon pair (r₋, r₊), evaluates
//! the inverse metric in three charts (Boyer–Lindquist, the horizon-regular
//! `*`-chart and the pole charts), the electromagnetic potential, and the
//! gauge functions T, Φ, R that make the `*`-chart smooth across both horizons.
//!
//! Conventions: signature (+,−,−,−), λ = Λa²/3, e² = Q²(1+λ)², and
//!
//! ```text
//! μ(r) = (r²+a²)(1 − Λr²/3) + (−2Mr + e²)(1 − α²r²)
//! κ(θ) = 1 − 2αM cosθ + (α²(a²+e²) + λ) cos²θ
//! Ω    = 1 − αr cosθ,          ρ² = r² + a² cos²θ.
//! ```
//!
//! All `*`-chart quantities are evaluated through algebraically regularized
//! forms (the 1/μ singularities of T′, Φ′, R′ cancel identically), so they are
//! finite and smooth on the closed interval [r₋, r₊].

use crate::error::{QnmError, Result};
use crate::numerics::{integrate, smooth_step};
use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Newton polishing iterations for the quartic roots.
pub const ROOT_POLISH_ITERS: usize = 60;
/// Relative imaginary part below which a companion eigenvalue is treated as real.
pub const REAL_ROOT_TOL: f64 = 1e-6;
/// Simple-root tolerance: |∂_rμ(r±)| must exceed this times the derivative scale.
pub const SIMPLE_ROOT_TOL: f64 = 1e-8;
/// Grid size of [`validate_assumptions`] in each direction.
pub const VALIDATION_GRID: usize = 400;
/// Default mollifier thresholds as fractions of r₊ − r₋.
pub const DEFAULT_R1_FRAC: f64 = 0.3;
/// Default upper mollifier threshold fraction.
pub const DEFAULT_R2_FRAC: f64 = 0.7;
/// Panels of the composite Gauss–Legendre rule used to integrate T′, Φ′, R′.
const GAUGE_QUAD_PANELS: usize = 64;

/// Physical parameters of the black hole and of the Klein–Gordon field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpacetimeParams {
    /// Mass M (> 0).
    #[serde(rename = "M")]
    pub mass: f64,
    /// Cosmological constant Λ (> 0).
    #[serde(rename = "Lambda")]
    pub lambda_cc: f64,
    /// Angular momentum per unit mass.
    #[serde(default)]
    pub a: f64,
    /// Black-hole charge Q.
    #[serde(rename = "Q", default)]
    pub charge: f64,
    /// Acceleration α.
    #[serde(default)]
    pub alpha: f64,
    /// Field charge q.
    #[serde(default)]
    pub q_field: f64,
    /// Field mass m (≥ 0).
    #[serde(default)]
    pub m_field: f64,
}

impl SpacetimeParams {
    /// Schwarzschild–de Sitter-type parameters with everything else zero.
    pub fn new(mass: f64, lambda_cc: f64) -> Self {
        SpacetimeParams { mass, lambda_cc, a: 0.0, charge: 0.0, alpha: 0.0, q_field: 0.0, m_field: 0.0 }
    }

    /// Full validation: M > 0, Λ > 0, m ≥ 0 and all entries finite.
    pub fn validate(&self) -> Result<()> {
        self.validate_finite()?;
        if self.mass <= 0.0 {
            return Err(QnmError::invalid("M", "mass must be positive"));
        }
        if self.m_field < 0.0 {
            return Err(QnmError::invalid("m_field", "field mass must be non-negative"));
        }
        Ok(())
    }

    /// Minimal validation used by the horizon solver: finite entries and Λ > 0.
    pub fn validate_finite(&self) -> Result<()> {
        let all = [self.mass, self.lambda_cc, self.a, self.charge, self.alpha, self.q_field, self.m_field];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(QnmError::invalid("params", "all parameters must be finite"));
        }
        if self.lambda_cc <= 0.0 {
            return Err(QnmError::invalid("Lambda", "cosmological constant must be positive"));
        }
        Ok(())
    }

    /// λ = Λa²/3 (derived, never stored).
    pub fn lambda(&self) -> f64 {
        self.lambda_cc * self.a * self.a / 3.0
    }

    /// e² = Q²(1+λ)².
    pub fn e2(&self) -> f64 {
        let l = 1.0 + self.lambda();
        self.charge * self.charge * l * l
    }

    /// Coefficients `[c₀, c₁, c₂, c₃, c₄]` of μ(r) = Σ cᵢ rⁱ.
    pub fn quartic(&self) -> [f64; 5] {
        let lam = self.lambda();
        let e2 = self.e2();
        let al2 = self.alpha * self.alpha;
        [
            self.a * self.a + e2,
            -2.0 * self.mass,
            1.0 - lam - e2 * al2,
            2.0 * self.mass * al2,
            -self.lambda_cc / 3.0,
        ]
    }

    /// μ(r) from the expanded quartic.
    pub fn mu(&self, r: f64) -> f64 {
        let c = self.quartic();
        (((c[4] * r + c[3]) * r + c[2]) * r + c[1]) * r + c[0]
    }

    /// ∂_rμ(r).
    pub fn mu_prime(&self, r: f64) -> f64 {
        let c = self.quartic();
        ((4.0 * c[4] * r + 3.0 * c[3]) * r + 2.0 * c[2]) * r + c[1]
    }

    /// ∂²_rμ(r).
    pub fn mu_second(&self, r: f64) -> f64 {
        let c = self.quartic();
        (12.0 * c[4] * r + 6.0 * c[3]) * r + 2.0 * c[2]
    }

    /// Coefficient α²(a²+e²) + λ of cos²θ in κ.
    pub fn kappa_quadratic(&self) -> f64 {
        self.alpha * self.alpha * (self.a * self.a + self.e2()) + self.lambda()
    }

    /// κ as a function of z = cosθ.
    pub fn kappa(&self, z: f64) -> f64 {
        1.0 - 2.0 * self.alpha * self.mass * z + self.kappa_quadratic() * z * z
    }

    /// ∂_zκ.
    pub fn kappa_dz(&self, z: f64) -> f64 {
        -2.0 * self.alpha * self.mass + 2.0 * self.kappa_quadratic() * z
    }

    /// Ω = 1 − αr cosθ.
    pub fn omega(&self, r: f64, z: f64) -> f64 {
        1.0 - self.alpha * r * z
    }

    /// ρ² = r² + a²cos²θ.
    pub fn rho2(&self, r: f64, z: f64) -> f64 {
        r * r + self.a * self.a * z * z
    }
}

/// Pole selector for the pole charts and κ̃.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pole {
    /// θ = 0.
    North,
    /// θ = π.
    South,
}

/// κ̃_N(θ) = (κ(θ) − κ(0))/sin²θ or κ̃_S(θ) = (κ(θ) − κ(π))/sin²θ in series-safe form.
pub fn kappa_tilde(params: &SpacetimeParams, pole: Pole, cos_theta: f64) -> f64 {
    let am = 2.0 * params.alpha * params.mass;
    let k2 = params.kappa_quadratic();
    match pole {
        Pole::North => am / (1.0 + cos_theta) - k2,
        Pole::South => -am / (1.0 - cos_theta) - k2,
    }
}

/// Roots of μ, the selected horizon pair and the surface gravities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonData {
    /// Sorted real roots of μ.
    pub roots: Vec<f64>,
    /// All four (complex) roots; the first two are r₋ and r₊.
    pub complex_roots: [Complex64; 4],
    /// Event horizon radius.
    pub r_minus: f64,
    /// Cosmological horizon radius.
    pub r_plus: f64,
    /// κ₋ = ∂_rμ(r₋)/(2(1+λ)(r₋²+a²)) > 0.
    pub kappa_minus: f64,
    /// κ₊ = ∂_rμ(r₊)/(2(1+λ)(r₊²+a²)) < 0.
    pub kappa_plus: f64,
    /// Leading coefficient c₄ = −Λ/3.
    pub leading: f64,
}

impl HorizonData {
    /// r₊ − r₋.
    pub fn width(&self) -> f64 {
        self.r_plus - self.r_minus
    }

    /// The factor −c₄(r − r₃)(r − r₄) collecting the two roots outside the pair (> 0 on [r₋, r₊]).
    pub fn mu_mid(&self, r: f64) -> f64 {
        let z = Complex64::new(r, 0.0);
        (-self.leading * (z - self.complex_roots[2]) * (z - self.complex_roots[3])).re
    }

    /// μ(r) = (r − r₋)(r₊ − r)·mu_mid(r), accurate near both horizons.
    pub fn mu(&self, r: f64) -> f64 {
        (r - self.r_minus) * (self.r_plus - r) * self.mu_mid(r)
    }

    /// μ₋(ρ₋) = μ(r₋+ρ₋)/ρ₋.
    pub fn mu_factor_minus(&self, rho: f64) -> f64 {
        let r = self.r_minus + rho;
        (self.r_plus - r) * self.mu_mid(r)
    }

    /// μ₊(ρ₊) = μ(r₊−ρ₊)/ρ₊.
    pub fn mu_factor_plus(&self, rho: f64) -> f64 {
        let r = self.r_plus - rho;
        (r - self.r_minus) * self.mu_mid(r)
    }
}

fn horner_c(c: &[f64; 5], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(c[4], 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for k in (0..4).rev() {
        d = d * z + p;
        p = p * z + c[k];
    }
    (p, d)
}

/// Scale of ∂_rμ used by the simple-root test: Σ i|cᵢ||r|^{i−1}.
fn derivative_scale(c: &[f64; 5], r: f64) -> f64 {
    (1..5).map(|i| i as f64 * c[i].abs() * r.abs().powi(i as i32 - 1)).sum()
}

/// All four roots of the quartic via companion-matrix eigenvalues and Newton polishing.
pub fn quartic_roots(c: &[f64; 5]) -> [Complex64; 4] {
    let mut comp = Matrix4::<f64>::zeros();
    for i in 1..4 {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..4 {
        comp[(i, 3)] = -c[i] / c[4];
    }
    let ev = comp.complex_eigenvalues();
    let mut roots = [Complex64::new(0.0, 0.0); 4];
    for (k, z0) in ev.iter().enumerate() {
        let mut z = Complex64::new(z0.re, z0.im);
        for _ in 0..ROOT_POLISH_ITERS {
            let (p, d) = horner_c(c, z);
            if d.norm() == 0.0 {
                break;
            }
            let step = p / d;
            z -= step;
            if step.norm() <= 1e-16 * (1.0 + z.norm()) {
                break;
            }
        }
        if z.im.abs() <= REAL_ROOT_TOL * (1.0 + z.norm()) {
            z.im = 0.0;
        }
        roots[k] = z;
    }
    roots
}

/// Solves μ = 0 and selects the largest pair of simple positive roots with μ > 0 between them.
pub fn solve_horizons(params: &SpacetimeParams) -> Result<HorizonData> {
    params.validate_finite()?;
    let c = params.quartic();
    let roots = quartic_roots(&c);
    let mut real: Vec<f64> = roots.iter().filter(|z| z.im == 0.0).map(|z| z.re).collect();
    real.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rscale = roots.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1e-300);
    let positive: Vec<f64> = real.iter().copied().filter(|&r| r > 1e-9 * rscale).collect();
    let mut pair = None;
    for i in (1..positive.len()).rev() {
        let (lo, hi) = (positive[i - 1], positive[i]);
        if hi - lo <= 1e-12 * rscale {
            // coincident roots: a multiple root, tested for degeneracy below
            pair = Some((lo, hi));
            break;
        }
        if params.mu(0.5 * (lo + hi)) > 0.0 {
            pair = Some((lo, hi));
            break;
        }
    }
    let (r_minus, r_plus) = pair.ok_or_else(|| {
        QnmError::NoHorizonPair(format!(
            "positive real roots {:?} bound no interval where μ > 0",
            positive
        ))
    })?;
    for r in [r_minus, r_plus] {
        let d = params.mu_prime(r).abs();
        let tol = SIMPLE_ROOT_TOL * derivative_scale(&c, r);
        if d < tol {
            return Err(QnmError::DegenerateRoot { r, derivative: d, tolerance: tol });
        }
    }
    // order complex roots: r₋, r₊, then the remaining two
    let mut used = [false; 4];
    let mut ordered = [Complex64::new(0.0, 0.0); 4];
    for (slot, target) in [r_minus, r_plus].iter().enumerate() {
        let idx = (0..4)
            .filter(|&k| !used[k])
            .min_by(|&i, &j| {
                (roots[i] - target).norm().partial_cmp(&(roots[j] - target).norm()).unwrap()
            })
            .unwrap();
        used[idx] = true;
        ordered[slot] = Complex64::new(*target, 0.0);
    }
    let mut slot = 2;
    for k in 0..4 {
        if !used[k] {
            ordered[slot] = roots[k];
            slot += 1;
        }
    }
    let lam1 = 1.0 + params.lambda();
    let a2 = params.a * params.a;
    let mut h = HorizonData {
        roots: real,
        complex_roots: ordered,
        r_minus,
        r_plus,
        kappa_minus: 0.0,
        kappa_plus: 0.0,
        leading: c[4],
    };
    let dmu_minus = (r_plus - r_minus) * h.mu_mid(r_minus);
    let dmu_plus = -(r_plus - r_minus) * h.mu_mid(r_plus);
    h.kappa_minus = dmu_minus / (2.0 * lam1 * (r_minus * r_minus + a2));
    h.kappa_plus = dmu_plus / (2.0 * lam1 * (r_plus * r_plus + a2));
    Ok(h)
}

/// Outcome of [`validate_assumptions`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Both Ω > 0 and κ > 0 hold everywhere on the sampled set.
    pub passed: bool,
    /// Minimum of Ω found.
    pub min_omega: f64,
    /// (r, θ) of the Ω minimum.
    pub min_omega_at: (f64, f64),
    /// Minimum of κ found.
    pub min_kappa: f64,
    /// θ of the κ minimum.
    pub min_kappa_at: f64,
    /// Signs of the surface gravities are κ₋ > 0 > κ₊.
    pub surface_gravity_signs_ok: bool,
}

fn refine_min<F: Fn(f64, f64) -> f64>(f: &F, r0: f64, t0: f64, dr: f64, dt: f64, bounds: (f64, f64, f64, f64)) -> (f64, f64, f64) {
    // one bisection-style refinement pass: shrinking local grids around the sampled minimum
    let (mut r, mut t, mut best) = (r0, t0, f(r0, t0));
    let (mut hr, mut ht) = (dr, dt);
    for _ in 0..30 {
        for i in -2i32..=2 {
            for j in -2i32..=2 {
                let rr = (r + i as f64 * hr * 0.5).clamp(bounds.0, bounds.1);
                let tt = (t + j as f64 * ht * 0.5).clamp(bounds.2, bounds.3);
                let v = f(rr, tt);
                if v < best {
                    best = v;
                    r = rr;
                    t = tt;
                }
            }
        }
        hr *= 0.5;
        ht *= 0.5;
    }
    (best, r, t)
}

/// Checks Ω > 0 and κ > 0 on [r₋, r₊] × [0, π] by a dense grid plus local refinement.
pub fn validate_assumptions(params: &SpacetimeParams, horizons: &HorizonData) -> Result<ValidationReport> {
    let n = VALIDATION_GRID;
    let (rm, rp) = (horizons.r_minus, horizons.r_plus);
    let om = |r: f64, t: f64| params.omega(r, t.cos());
    let ka = |_r: f64, t: f64| params.kappa(t.cos());
    let mut best_o = (f64::INFINITY, rm, 0.0);
    let mut best_k = (f64::INFINITY, rm, 0.0);
    for i in 0..n {
        let r = rm + (rp - rm) * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let t = std::f64::consts::PI * j as f64 / (n - 1) as f64;
            let o = om(r, t);
            if o < best_o.0 {
                best_o = (o, r, t);
            }
            let k = ka(r, t);
            if k < best_k.0 {
                best_k = (k, r, t);
            }
        }
    }
    let dr = (rp - rm) / (n - 1) as f64;
    let dt = std::f64::consts::PI / (n - 1) as f64;
    let bounds = (rm, rp, 0.0, std::f64::consts::PI);
    let ro = refine_min(&om, best_o.1, best_o.2, dr, dt, bounds);
    let rk = refine_min(&ka, best_k.1, best_k.2, dr, dt, bounds);
    let report = ValidationReport {
        passed: ro.0 > 0.0 && rk.0 > 0.0,
        min_omega: ro.0,
        min_omega_at: (ro.1, ro.2),
        min_kappa: rk.0,
        min_kappa_at: rk.2,
        surface_gravity_signs_ok: horizons.kappa_minus > 0.0 && horizons.kappa_plus < 0.0,
    };
    if ro.0 <= 0.0 {
        return Err(QnmError::AssumptionViolated { which: "Omega > 0".into(), minimum: ro.0, r: ro.1, theta: ro.2 });
    }
    if rk.0 <= 0.0 {
        return Err(QnmError::AssumptionViolated { which: "kappa > 0".into(), minimum: rk.0, r: rk.1, theta: rk.2 });
    }
    Ok(report)
}

/// Shape of the mollifier ϖ that switches the `*`-chart speeds from the r₋ to the r₊ form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mollifier {
    /// ϖ = 1 on r ≤ r₁, 0 on r ≥ r₂, `exp(−1/t)` smooth step in between.
    Bump { r1: f64, r2: f64 },
    /// Analytic cubic ϖ = (1−t)²(1+2t), t = (r−r₋)/(r₊−r₋): flat to second order at both horizons.
    Polynomial,
}

/// Gauge data of the horizon-regular `*`-chart.
#[derive(Debug, Clone, PartialEq)]
pub struct StarGauge {
    params: SpacetimeParams,
    horizons: HorizonData,
    /// 𝔠 with 𝔠⁻² = max μ on (r₋, r₊).
    pub frak_c: f64,
    /// 𝔯 = argmax μ.
    pub frak_r: f64,
    /// Mollifier shape.
    pub mollifier: Mollifier,
    /// μ(r) − μ(𝔯) = (r − 𝔯)² q₂(r): coefficients [e₀ r², e₁ r, e₂].
    q2: [f64; 3],
}

/// Builds the `*`-chart gauge with the `exp(−1/t)` mollifier on thresholds r₁ < r₂.
pub fn star_gauge(params: &SpacetimeParams, horizons: &HorizonData, r1: f64, r2: f64) -> Result<StarGauge> {
    if !(horizons.r_minus < r1 && r1 < r2 && r2 < horizons.r_plus) {
        return Err(QnmError::invalid("r1/r2", "need r₋ < r₁ < r₂ < r₊"));
    }
    StarGauge::with_mollifier(params, horizons, Mollifier::Bump { r1, r2 })
}

impl StarGauge {
    /// Default gauge: bump mollifier on r₁ = r₋ + 0.3(r₊−r₋), r₂ = r₋ + 0.7(r₊−r₋).
    pub fn default_bump(params: &SpacetimeParams, horizons: &HorizonData) -> Result<Self> {
        let w = horizons.width();
        star_gauge(
            params,
            horizons,
            horizons.r_minus + DEFAULT_R1_FRAC * w,
            horizons.r_minus + DEFAULT_R2_FRAC * w,
        )
    }

    /// Gauge with an arbitrary mollifier.
    pub fn with_mollifier(params: &SpacetimeParams, horizons: &HorizonData, mollifier: Mollifier) -> Result<Self> {
        let (rm, rp) = (horizons.r_minus, horizons.r_plus);
        // argmax of μ: sample then Newton on μ′
        let mut best = (f64::NEG_INFINITY, rm);
        for i in 1..400 {
            let r = rm + (rp - rm) * i as f64 / 400.0;
            let v = horizons.mu(r);
            if v > best.0 {
                best = (v, r);
            }
        }
        let mut r = best.1;
        for _ in 0..50 {
            let step = params.mu_prime(r) / params.mu_second(r);
            let next = (r - step).clamp(rm, rp);
            if (next - r).abs() < 1e-15 * r.abs() {
                r = next;
                break;
            }
            r = next;
        }
        let mu_max = horizons.mu(r);
        if mu_max <= 0.0 {
            return Err(QnmError::NoHorizonPair("μ has no positive maximum between the horizons".into()));
        }
        let c = params.quartic();
        let mut p = [c[4], c[3], c[2], c[1], c[0] - params.mu(r)];
        // two synthetic divisions by (x − 𝔯)
        for k in 1..5 {
            p[k] += r * p[k - 1];
        }
        let mut s = [p[0], p[1], p[2], p[3]];
        for k in 1..4 {
            s[k] += r * s[k - 1];
        }
        Ok(StarGauge {
            params: *params,
            horizons: horizons.clone(),
            frak_c: 1.0 / mu_max.sqrt(),
            frak_r: r,
            mollifier,
            q2: [s[0], s[1], s[2]],
        })
    }

    /// Parameters this gauge was built for.
    pub fn params(&self) -> &SpacetimeParams {
        &self.params
    }

    /// Horizon data this gauge was built for.
    pub fn horizons(&self) -> &HorizonData {
        &self.horizons
    }

    /// μ from the factored form.
    pub fn mu(&self, r: f64) -> f64 {
        self.horizons.mu(r)
    }

    /// ν(r) = ±√(1 − μ𝔠²), positive for r < 𝔯, negative beyond.
    pub fn nu(&self, r: f64) -> f64 {
        let q = (self.q2[0] * r + self.q2[1]) * r + self.q2[2];
        (self.frak_r - r) * self.frak_c * (-q).max(0.0).sqrt()
    }

    fn t_of(&self, r: f64) -> f64 {
        (r - self.horizons.r_minus) / self.horizons.width()
    }

    /// (ϖ, 1 − ϖ), each computed without cancellation.
    pub fn varpi_pair(&self, r: f64) -> (f64, f64) {
        match self.mollifier {
            Mollifier::Bump { r1, r2 } => {
                let s = smooth_step((r - r1) / (r2 - r1));
                (1.0 - s, s)
            }
            Mollifier::Polynomial => {
                let t = self.t_of(r);
                ((1.0 - t) * (1.0 - t) * (1.0 + 2.0 * t), t * t * (3.0 - 2.0 * t))
            }
        }
    }

    /// Mollifier ϖ(r).
    pub fn varpi(&self, r: f64) -> f64 {
        self.varpi_pair(r).0
    }

    /// ϖ(1−ϖ)/μ in regular form (finite at both horizons).
    pub fn varpi_over_mu(&self, r: f64) -> f64 {
        match self.mollifier {
            Mollifier::Bump { .. } => {
                let (w, wc) = self.varpi_pair(r);
                if w == 0.0 || wc == 0.0 {
                    0.0
                } else {
                    w * wc / self.mu(r)
                }
            }
            Mollifier::Polynomial => {
                let t = self.t_of(r);
                let l = self.horizons.width();
                t * (1.0 - t) * (1.0 + 2.0 * t) * (3.0 - 2.0 * t) / (l * l * self.horizons.mu_mid(r))
            }
        }
    }

    /// c₋(r) = (−1 + ν)/μ = −𝔠²/(1 + ν) (the branch whose numerator vanishes at r₋).
    pub fn c_minus(&self, r: f64) -> f64 {
        -self.frak_c * self.frak_c / (1.0 + self.nu(r))
    }

    /// c₋ϖ in regular form (finite at r₊ where c₋ alone blows up).
    pub fn c_minus_varpi(&self, r: f64) -> f64 {
        let (w, _) = self.varpi_pair(r);
        if w == 0.0 {
            return 0.0;
        }
        match self.mollifier {
            Mollifier::Bump { .. } => w * self.c_minus(r),
            Mollifier::Polynomial => {
                if r < self.frak_r {
                    w * self.c_minus(r)
                } else {
                    let t = self.t_of(r);
                    let l = self.horizons.width();
                    -(1.0 - t) * (1.0 + 2.0 * t) * (1.0 - self.nu(r)) / (l * l * t * self.horizons.mu_mid(r))
                }
            }
        }
    }

    /// d(r) = −c₋ϖ + ν(1−ϖ): the regular part of T′ (T′ = H(1−2ϖ)/μ + d).
    pub fn d(&self, r: f64) -> f64 {
        let (_, wc) = self.varpi_pair(r);
        -self.c_minus_varpi(r) + self.nu(r) * wc
    }

    /// H = (1+λ)(r²+a²).
    pub fn h(&self, r: f64) -> f64 {
        (1.0 + self.params.lambda()) * (r * r + self.params.a * self.params.a)
    }

    /// A = a(1+λ).
    pub fn a_rot(&self) -> f64 {
        self.params.a * (1.0 + self.params.lambda())
    }

    /// c₊(r) = −(2H/μ + c₋)ϖ + ν(1−ϖ) (singular at r₋ where ϖ = 1; used for r > r₁).
    pub fn c_plus(&self, r: f64) -> f64 {
        let (w, wc) = self.varpi_pair(r);
        -2.0 * self.h(r) * w / self.mu(r) - self.c_minus_varpi(r) + self.nu(r) * wc
    }

    /// c̃₋ ≡ 0.
    pub fn ctilde_minus(&self, _r: f64) -> f64 {
        0.0
    }

    /// c̃₊(r) = −2a(1+λ)ϖ/μ.
    pub fn ctilde_plus(&self, r: f64) -> f64 {
        -2.0 * self.a_rot() * self.varpi(r) / self.mu(r)
    }

    /// (1 − 2ϖ) without cancellation.
    pub fn one_minus_two_varpi(&self, r: f64) -> f64 {
        let (w, wc) = self.varpi_pair(r);
        wc - w
    }

    /// T′(r): the `−` form −(H/μ + c₋) for r ≤ r₁ and the `+` form H/μ + c₊ beyond (they agree where ϖ = 1).
    pub fn t_prime(&self, r: f64) -> f64 {
        self.h(r) * self.one_minus_two_varpi(r) / self.mu(r) + self.d(r)
    }

    /// Φ′(r) = a(1+λ)(1 − 2ϖ)/μ.
    pub fn phi_prime(&self, r: f64) -> f64 {
        self.a_rot() * self.one_minus_two_varpi(r) / self.mu(r)
    }

    /// R′(r) = Qr(1+λ)(2ϖ − 1)/μ: removes the singular radial part of A_r at both horizons.
    pub fn r_prime(&self, r: f64) -> f64 {
        -self.params.charge * r * (1.0 + self.params.lambda()) * self.one_minus_two_varpi(r) / self.mu(r)
    }

    fn integral_from_frak_r<F: Fn(f64) -> f64>(&self, f: F, r: f64) -> f64 {
        if !(r > self.horizons.r_minus && r < self.horizons.r_plus) {
            return f64::NAN;
        }
        integrate(f, self.frak_r, r, GAUGE_QUAD_PANELS, 10)
    }

    /// T(r) with T(𝔯) = 0 (interior points only).
    pub fn t_fn(&self, r: f64) -> f64 {
        self.integral_from_frak_r(|s| self.t_prime(s), r)
    }

    /// Φ(r) with Φ(𝔯) = 0.
    pub fn phi_fn(&self, r: f64) -> f64 {
        self.integral_from_frak_r(|s| self.phi_prime(s), r)
    }

    /// R(r) with R(𝔯) = 0.
    pub fn r_fn(&self, r: f64) -> f64 {
        self.integral_from_frak_r(|s| self.r_prime(s), r)
    }
}

/// Coordinate chart of a [`ChartPoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    /// (t, r, θ, φ).
    BoyerLindquist,
    /// (t*, r, θ, φ*).
    StarEquatorial,
    /// (t*, r, x*, y*) around θ = 0.
    PoleNorth,
    /// (t*, r, x*, y*) around θ = π.
    PoleSouth,
}

/// A point in one of the charts; `angular` is (θ, φ) or (x*, y*).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    /// Chart of the point.
    pub chart: Chart,
    /// Radius.
    pub r: f64,
    /// (θ, φ) for BL/STAR_EQ, (x*, y*) for the pole charts.
    pub angular: [f64; 2],
}

impl ChartPoint {
    /// cosθ of the point (pole charts: ±√(1 − x² − y²)).
    pub fn cos_theta(&self) -> f64 {
        match self.chart {
            Chart::BoyerLindquist | Chart::StarEquatorial => self.angular[0].cos(),
            Chart::PoleNorth => (1.0 - self.angular[0].powi(2) - self.angular[1].powi(2)).max(0.0).sqrt(),
            Chart::PoleSouth => -(1.0 - self.angular[0].powi(2) - self.angular[1].powi(2)).max(0.0).sqrt(),
        }
    }
}

/// Inverse metric in a chart: `g` and the rescaled `G = Ω⁻²ρ²g`, coordinates in `coords` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseMetric {
    /// Chart of the components.
    pub chart: Chart,
    /// Coordinate names, in index order.
    pub coords: [String; 4],
    /// g^{ab}.
    pub g: [[f64; 4]; 4],
    /// Ω⁻²ρ² g^{ab}.
    pub g_scaled: [[f64; 4]; 4],
}

fn sym(m: &mut [[f64; 4]; 4], i: usize, j: usize, v: f64) {
    m[i][j] = v;
    m[j][i] = v;
}

/// The rescaled `*`-chart components Ω⁻²ρ²g in (t*, r, θ, φ*) order at (r, z = cosθ), regular form.
///
/// `sin2` is sin²θ; the φ*φ* entry is returned without its (1+λ)²/(κ sin²θ) pole term when
/// `drop_pole_term` is set (the pole charts assemble it in series-safe form).
pub fn star_scaled_components(gauge: &StarGauge, r: f64, z: f64, sin2: f64, drop_pole_term: bool) -> [[f64; 4]; 4] {
    let p = gauge.params();
    let l1 = 1.0 + p.lambda();
    let kap = p.kappa(z);
    let h = gauge.h(r);
    let ar = gauge.a_rot();
    let w = gauge.varpi(r);
    let pm = gauge.varpi_over_mu(r);
    let d = gauge.d(r);
    let mu = gauge.mu(r);
    let omw = gauge.one_minus_two_varpi(r);
    let mut g = [[0.0; 4]; 4];
    sym(&mut g, 0, 0, 4.0 * h * h * pm + 2.0 * h * d * (2.0 * w - 1.0) - mu * d * d - l1 * l1 * p.a * p.a * sin2 / kap);
    sym(&mut g, 0, 1, h * omw + mu * d);
    sym(&mut g, 0, 3, 4.0 * h * ar * pm + ar * d * (2.0 * w - 1.0) - p.a * l1 * l1 / kap);
    sym(&mut g, 1, 1, -mu);
    sym(&mut g, 1, 3, ar * omw);
    sym(&mut g, 2, 2, -kap);
    let pole = if drop_pole_term { 0.0 } else { l1 * l1 / (kap * sin2) };
    sym(&mut g, 3, 3, 4.0 * ar * ar * pm - pole);
    g
}

fn horizon_range_check(h: &HorizonData, r: f64) -> Result<()> {
    let tol = 1e-12 * h.r_plus;
    if !(r >= h.r_minus - tol && r <= h.r_plus + tol) {
        return Err(QnmError::ChartDomainError(format!("r = {r} outside [r₋, r₊] = [{}, {}]", h.r_minus, h.r_plus)));
    }
    Ok(())
}

/// Inverse metric components of the requested chart at `point`.
pub fn inverse_metric(point: &ChartPoint, params: &SpacetimeParams, horizons: &HorizonData, gauge: &StarGauge) -> Result<InverseMetric> {
    let r = point.r;
    let l1 = 1.0 + params.lambda();
    let a = params.a;
    let mut gs = [[0.0; 4]; 4];
    let coords: [&str; 4];
    let z = point.cos_theta();
    match point.chart {
        Chart::BoyerLindquist => {
            coords = ["t", "r", "theta", "phi"];
            let mu = horizons.mu(r);
            let s2 = point.angular[0].sin().powi(2);
            if mu.abs() <= 1e-14 * horizons.r_plus.powi(2) || !(mu > 0.0) {
                return Err(QnmError::ChartDomainError(format!("Boyer–Lindquist chart is singular at r = {r} (μ = {mu:e})")));
            }
            if s2 < 1e-28 {
                return Err(QnmError::ChartDomainError("Boyer–Lindquist chart is singular at the poles".into()));
            }
            let kap = params.kappa(z);
            let r2a2 = r * r + a * a;
            sym(&mut gs, 0, 0, -l1 * l1 * (mu * a * a * s2 - r2a2 * r2a2 * kap) / (mu * kap));
            sym(&mut gs, 0, 3, -a * l1 * l1 * (mu - r2a2 * kap) / (mu * kap));
            sym(&mut gs, 3, 3, -l1 * l1 * (mu - a * a * kap * s2) / (mu * kap * s2));
            sym(&mut gs, 1, 1, -mu);
            sym(&mut gs, 2, 2, -kap);
        }
        Chart::StarEquatorial => {
            coords = ["t*", "r", "theta", "phi*"];
            horizon_range_check(horizons, r)?;
            let s2 = point.angular[0].sin().powi(2);
            if s2 < 1e-28 {
                return Err(QnmError::ChartDomainError("equatorial *-chart is singular at the poles; use a pole chart".into()));
            }
            gs = star_scaled_components(gauge, r, z, s2, false);
        }
        Chart::PoleNorth | Chart::PoleSouth => {
            coords = ["t*", "r", "x*", "y*"];
            horizon_range_check(horizons, r)?;
            let (x, y) = (point.angular[0], point.angular[1]);
            if x * x + y * y >= 1.0 {
                return Err(QnmError::ChartDomainError(format!("pole chart needs x*² + y*² < 1, got {}", x * x + y * y)));
            }
            gs = pole_scaled_components(gauge, point.chart, r, x, y);
        }
    }
    let omega = params.omega(r, z);
    let rho2 = params.rho2(r, z);
    let mut g = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            g[i][j] = gs[i][j] * omega * omega / rho2;
        }
    }
    Ok(InverseMetric { chart: point.chart, coords: coords.map(String::from), g, g_scaled: gs })
}

/// Rescaled pole-chart components Ω⁻²ρ²g in (t*, r, x*, y*) order, series-safe at x* = y* = 0.
pub fn pole_scaled_components(gauge: &StarGauge, chart: Chart, r: f64, x: f64, y: f64) -> [[f64; 4]; 4] {
    let p = gauge.params();
    let s2 = x * x + y * y;
    let (z, pole) = match chart {
        Chart::PoleSouth => (-(1.0 - s2).max(0.0).sqrt(), Pole::South),
        _ => ((1.0 - s2).max(0.0).sqrt(), Pole::North),
    };
    let l1 = 1.0 + p.lambda();
    let k0 = p.kappa(if pole == Pole::North { 1.0 } else { -1.0 });
    let kn = k0 / l1;
    let kap = p.kappa(z);
    let kt = kappa_tilde(p, pole, z);
    let st = star_scaled_components(gauge, r, z, s2, true);
    // st[3][3] = −(μc̃² + 2a(1+λ)c̃) in regular form
    let ang = -st[3][3];
    let common = (kap * kap - (kap + k0) * kt) / kap;
    let mut g = [[0.0; 4]; 4];
    sym(&mut g, 0, 0, st[0][0]);
    sym(&mut g, 0, 1, st[0][1]);
    sym(&mut g, 1, 1, st[1][1]);
    sym(&mut g, 0, 2, -y * kn * st[0][3]);
    sym(&mut g, 0, 3, x * kn * st[0][3]);
    sym(&mut g, 1, 2, -y * kn * st[1][3]);
    sym(&mut g, 1, 3, x * kn * st[1][3]);
    sym(&mut g, 2, 2, -k0 * k0 / kap + x * x * common - kn * kn * ang * y * y);
    sym(&mut g, 3, 3, -k0 * k0 / kap + y * y * common - kn * kn * ang * x * x);
    sym(&mut g, 2, 3, x * y * (common + kn * kn * ang));
    g
}

/// Electromagnetic potential components in the various charts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialComponents {
    /// A_t = −Qr/ρ².
    pub a_t: f64,
    /// A_φ = Qra sin²θ/ρ².
    pub a_phi: f64,
    /// A_{t*} = A_t.
    pub a_tstar: f64,
    /// A_r = A_t T′ + A_φ Φ′ (singular at r±; `None` there).
    pub a_r: Option<f64>,
    /// Residual A_r − R′ after the gauge subtraction (finite on [r₋, r₊]).
    pub a_r_residual: f64,
    /// A_{φ*} = A_φ.
    pub a_phistar: f64,
    /// A_{x*} (pole charts only).
    pub a_xstar: Option<f64>,
    /// A_{y*} (pole charts only).
    pub a_ystar: Option<f64>,
}

/// Potential components at a chart point.
pub fn potential(point: &ChartPoint, params: &SpacetimeParams, gauge: &StarGauge) -> Result<PotentialComponents> {
    let h = gauge.horizons();
    let r = point.r;
    let z = point.cos_theta();
    let rho2 = params.rho2(r, z);
    let q = params.charge;
    let (s2, pole) = match point.chart {
        Chart::BoyerLindquist | Chart::StarEquatorial => {
            horizon_range_check(h, r)?;
            (point.angular[0].sin().powi(2), false)
        }
        Chart::PoleNorth | Chart::PoleSouth => {
            horizon_range_check(h, r)?;
            let s2 = point.angular[0].powi(2) + point.angular[1].powi(2);
            if s2 >= 1.0 {
                return Err(QnmError::ChartDomainError("pole chart needs x*² + y*² < 1".into()));
            }
            (s2, true)
        }
    };
    let a_t = -q * r / rho2;
    let a_phi = q * r * params.a * s2 / rho2;
    let interior = h.mu(r) > 1e-14 * h.r_plus.powi(2);
    let a_r = if interior { Some(a_t * gauge.t_prime(r) + a_phi * gauge.phi_prime(r)) } else { None };
    let (ax, ay) = if pole {
        let k0 = params.kappa(if point.chart == Chart::PoleNorth { 1.0 } else { -1.0 });
        let f = q * r * params.a / rho2 * (1.0 + params.lambda()) / k0;
        (Some(-f * point.angular[1]), Some(f * point.angular[0]))
    } else {
        (None, None)
    };
    Ok(PotentialComponents {
        a_t,
        a_phi,
        a_tstar: a_t,
        a_r,
        a_r_residual: a_t * gauge.d(r),
        a_phistar: a_phi,
        a_xstar: ax,
        a_ystar: ay,
    })
}

/// Rescaled parameters and frequency: lengths × √Λ, inverse lengths ÷ √Λ, Λ̃ = 1.
pub fn rescale(params: &SpacetimeParams, sigma: Complex64) -> (SpacetimeParams, Complex64) {
    let s = params.lambda_cc.sqrt();
    (
        SpacetimeParams {
            mass: params.mass * s,
            lambda_cc: 1.0,
            a: params.a * s,
            charge: params.charge * s,
            alpha: params.alpha / s,
            q_field: params.q_field / s,
            m_field: params.m_field / s,
        },
        sigma / s,
    )
}

/// Coordinate part of the rescaling: (t̃, r̃) = √Λ (t, r).
pub fn rescale_coordinates(params: &SpacetimeParams, t: f64, r: f64) -> (f64, f64) {
    let s = params.lambda_cc.sqrt();
    (t * s, r * s)
}
