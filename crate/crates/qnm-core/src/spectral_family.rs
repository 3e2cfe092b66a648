//! The harmonic spectral family P_σ of the charged Klein–Gordon operator in the
//! horizon-regular `*`-chart.
//!
//! With the mode ansatz `e^{−iσt* − iℓφ*}` and the scaled inverse metric
//! G = Ω⁻²ρ²g, the operator multiplied by ρ²/Ω² is the divergence form
//!
//! ```text
//! P_σ v = (Ω²/w) Σ ∂̃_a (w Ω⁻² G^{ab} ∂̃_b v) + m²ρ²Ω⁻² v,   ∂̃ = ∂ − iqA,
//! ```
//!
//! with ∂̃_{t*} = −iS, S = σ + qA_t, ∂̃_{φ*} = −iL, L = ℓ + qA_φ, and the angular
//! weight w = sinθ (equatorial chart) or 1/cosθ (pole charts). The radial
//! component of the potential is the finite residual Ã = A_r − R′ left by the
//! gauge transformation.
//!
//! This module provides
//! * the pointwise expansion of P_σ in D = −i∂ form ([`local_operator`]) and
//!   the boundary form ρ±⁻¹(a(ρD_ρ)² + bρD_ρ + c) + 𝒫̸ ([`assemble_coefficients`]);
//! * indicial polynomials and the critical strips;
//! * the collocation pencil P_h(σ) = P0 + σP1 + σ²P2 on a Chebyshev × Gauss
//!   grid ([`DiscreteFamily`]), and the two-chart field representation
//!   ([`DualChartField`]) with the pole-cap operator.

use crate::error::{QnmError, Result};
use crate::geometry::{
    pole_scaled_components, solve_horizons, star_scaled_components, Chart, HorizonData, Mollifier, Pole,
    SpacetimeParams, StarGauge,
};
use crate::numerics::{
    barycentric_weights, central_derivative, cheb_diff, cheb_nodes, clenshaw_curtis_weights, gauss_legendre,
    interpolation_row, lagrange_diff_matrix, smooth_step, FD_REL_STEP,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative finite-difference step in the angular coordinates (radians or x*, y*).
pub const ANGULAR_FD_STEP: f64 = 1e-3;

/// Smallest admissible collocation sizes (radial intervals, angular nodes).
pub const MIN_RADIAL_INTERVALS: usize = 4;
/// Smallest admissible number of Gauss nodes in cosθ.
pub const MIN_ANGULAR_NODES: usize = 2;

/// Default pole-cap angle θ_cap: caps cover θ < θ_cap around each pole.
pub const DEFAULT_POLE_CAP: f64 = PI / 3.0;
/// Default inner angle of the gluing ramp: φ_N ≡ 1 for θ ≤ this value.
pub const DEFAULT_POLE_BLEND: f64 = PI / 6.0;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Which horizon a boundary-defining function ρ± = |r − r±| refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Horizon {
    /// The black-hole horizon r₋ (ρ₋ = r − r₋).
    Minus,
    /// The cosmological horizon r₊ (ρ₊ = r₊ − r).
    Plus,
}

impl Horizon {
    /// dr/dρ: +1 at r₋, −1 at r₊.
    pub fn orientation(self) -> f64 {
        match self {
            Horizon::Minus => 1.0,
            Horizon::Plus => -1.0,
        }
    }

    /// Radius of the point at distance `rho` from this horizon.
    pub fn radius(self, horizons: &HorizonData, rho: f64) -> f64 {
        match self {
            Horizon::Minus => horizons.r_minus + rho,
            Horizon::Plus => horizons.r_plus - rho,
        }
    }

    /// Surface gravity magnitude |κ±|.
    pub fn kappa(self, horizons: &HorizonData) -> f64 {
        match self {
            Horizon::Minus => horizons.kappa_minus.abs(),
            Horizon::Plus => horizons.kappa_plus.abs(),
        }
    }
}

fn default_l_weight() -> f64 {
    -0.5
}
fn default_depth() -> u32 {
    4
}
fn default_depth_prime() -> u32 {
    1
}
fn default_epsilon() -> f64 {
    0.5
}
fn default_rho0() -> f64 {
    0.25
}
fn default_rho0p() -> f64 {
    0.45
}
fn default_cap() -> f64 {
    DEFAULT_POLE_CAP
}
fn default_blend() -> f64 {
    DEFAULT_POLE_BLEND
}
fn default_k() -> u32 {
    1
}

/// Sector and parametrix bookkeeping shared by all downstream modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorConfig {
    /// Azimuthal harmonic ℓ.
    #[serde(default)]
    pub ell: i32,
    /// Sobolev order k ≥ 1.
    #[serde(default = "default_k")]
    pub k: u32,
    /// Weight l (fixed at −1/2).
    #[serde(default = "default_l_weight")]
    pub l_weight: f64,
    /// Fiber-correction depth N.
    #[serde(rename = "N", default = "default_depth")]
    pub n_depth: u32,
    /// Basis-correction depth N′.
    #[serde(rename = "N_prime", default = "default_depth_prime")]
    pub n_prime: u32,
    /// ε > 0 in the modified fiber denominator.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Shift C ≥ 0 of the +ρC variant.
    #[serde(rename = "C_shift", default)]
    pub c_shift: f64,
    /// ρ₀ of the radial cutoff χ, as a fraction of r₊ − r₋.
    #[serde(default = "default_rho0")]
    pub rho0_frac: f64,
    /// ρ₀′ of the radial cutoff χ, as a fraction of r₊ − r₋.
    #[serde(default = "default_rho0p")]
    pub rho0p_frac: f64,
    /// Pole-cap angle θ_cap (cap radius sin θ_cap in x*, y*).
    #[serde(default = "default_cap")]
    pub pole_cap: f64,
    /// Inner angle of the gluing ramp.
    #[serde(default = "default_blend")]
    pub pole_blend: f64,
}

impl Default for SectorConfig {
    fn default() -> Self {
        SectorConfig {
            ell: 0,
            k: default_k(),
            l_weight: default_l_weight(),
            n_depth: default_depth(),
            n_prime: default_depth_prime(),
            epsilon: default_epsilon(),
            c_shift: 0.0,
            rho0_frac: default_rho0(),
            rho0p_frac: default_rho0p(),
            pole_cap: default_cap(),
            pole_blend: default_blend(),
        }
    }
}

impl SectorConfig {
    /// Sector ℓ with all other entries at their defaults.
    pub fn with_ell(ell: i32) -> Self {
        SectorConfig { ell, ..Default::default() }
    }

    /// Checks the structural constraints (N > 2(N′−1), k ≥ 1, ε > 0, C ≥ 0, cutoffs ordered).
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(QnmError::invalid("k", "Sobolev order must be at least 1"));
        }
        if self.n_prime < 1 {
            return Err(QnmError::invalid("N_prime", "need N′ ≥ 1"));
        }
        if self.n_depth <= 2 * (self.n_prime - 1) {
            return Err(QnmError::invalid("N", format!("need N > 2(N′−1); got N = {}, N′ = {}", self.n_depth, self.n_prime)));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(QnmError::invalid("epsilon", "need ε > 0"));
        }
        if !(self.c_shift >= 0.0) || !self.c_shift.is_finite() {
            return Err(QnmError::invalid("C_shift", "need C ≥ 0"));
        }
        if (self.l_weight + 0.5).abs() > 1e-15 {
            return Err(QnmError::invalid("l_weight", "the weight is fixed at −1/2"));
        }
        if !(0.0 < self.rho0_frac && self.rho0_frac < self.rho0p_frac && self.rho0p_frac < 0.5) {
            return Err(QnmError::invalid("rho0", "need 0 < ρ₀ < ρ₀′ < (r₊−r₋)/2"));
        }
        if !(0.0 < self.pole_blend && self.pole_blend < self.pole_cap && self.pole_cap < PI / 2.0) {
            return Err(QnmError::invalid("pole_cap", "need 0 < blend < θ_cap < π/2"));
        }
        Ok(())
    }

    /// Whether (N, N′) satisfies the trace-class conditions N ≥ 3N′−2 and N − 2(N′−1) > 3.
    pub fn trace_class_ok(&self) -> bool {
        let (n, np) = (self.n_depth as i64, self.n_prime as i64);
        n >= 3 * np - 2 && n - 2 * (np - 1) > 3
    }

    /// Angular exponents (α_N, α_S) of the regularizing factor (1−z)^{α_N}(1+z)^{α_S}.
    pub fn angular_exponents(&self, params: &SpacetimeParams) -> (f64, f64) {
        let l1 = 1.0 + params.lambda();
        let m = self.ell.unsigned_abs() as f64;
        (l1 * m / (2.0 * params.kappa(1.0)), l1 * m / (2.0 * params.kappa(-1.0)))
    }
}

/// Coefficients of the boundary form ρ±⁻¹(a(ρD_ρ)² + bρD_ρ + c) + 𝒫̸ at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorCoefficients {
    /// Chart of the angular coordinates.
    pub chart: Chart,
    /// Horizon the radial coordinate ρ refers to.
    pub horizon: Horizon,
    /// ρ±.
    pub rho: f64,
    /// Angular coordinates (θ, ·) or (x*, y*).
    pub angular: [f64; 2],
    /// a = μ±(ρ).
    pub a: f64,
    /// First-order radial coefficient b.
    pub b: Complex64,
    /// Zeroth-order coefficient c (vanishes at ρ = 0 in the equatorial chart).
    pub c: Complex64,
    /// Angular principal coefficients: (κ, 0) equatorial, (𝒶̸_x, 𝒶̸_y) pole.
    pub slash_a: [f64; 2],
    /// Angular first-order coefficients: (𝒷̸_θ, 0) or (𝒷̸_x, 𝒷̸_y).
    pub slash_b: [Complex64; 2],
    /// Coefficient of D_x D_y in the pole charts (0 equatorially).
    pub breve_g_xy: f64,
    /// Coefficients of D_ρ D_x and D_ρ D_y (pole charts, nonzero only for a ≠ 0).
    pub radial_angular: [f64; 2],
}

impl OperatorCoefficients {
    /// c − a(k + l + ε)²-style shift: returns the coefficients with c replaced by c − a·s².
    pub fn shifted(&self, s: f64) -> Self {
        let mut out = *self;
        out.c -= self.a * s * s;
        out
    }
}

/// Pointwise expansion Σ M_ij D_iD_j + Σ F_j D_j + Z in spatial coordinates
/// (r, θ) equatorially or (r, x*, y*) in a pole chart; `second` is symmetric
/// (the D_iD_j and D_jD_i terms are both counted).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalOperator {
    /// Number of spatial coordinates (2 or 3).
    pub dim: usize,
    /// Principal coefficients M_ij.
    pub second: [[f64; 3]; 3],
    /// First-order coefficients F_j.
    pub first: [Complex64; 3],
    /// Zeroth-order coefficient Z.
    pub zeroth: Complex64,
}

/// Spatial data of the divergence form at one point, in (t, r, u₁, u₂) order.
struct PointData {
    g: [[f64; 4]; 4],
    /// A_i for the spatial slots and −iΛ multipliers for the cyclic ones.
    pot: [f64; 4],
    /// Λ_t = S and Λ_φ = L (complex because σ is).
    lam: [Complex64; 4],
    weight: f64,
    omega: f64,
    rho2: f64,
}

/// Spectral family on a fixed spacetime, gauge and sector.
#[derive(Debug, Clone)]
pub struct SpectralFamily {
    gauge: StarGauge,
    sector: SectorConfig,
}

impl SpectralFamily {
    /// Family with the analytic polynomial mollifier (the discretization default).
    pub fn new(params: &SpacetimeParams, sector: SectorConfig) -> Result<Self> {
        params.validate()?;
        sector.validate()?;
        let h = solve_horizons(params)?;
        let gauge = StarGauge::with_mollifier(params, &h, Mollifier::Polynomial)?;
        Ok(SpectralFamily { gauge, sector })
    }

    /// Family with an explicit gauge.
    pub fn with_gauge(gauge: StarGauge, sector: SectorConfig) -> Result<Self> {
        sector.validate()?;
        Ok(SpectralFamily { gauge, sector })
    }

    /// Spacetime parameters.
    pub fn params(&self) -> &SpacetimeParams {
        self.gauge.params()
    }

    /// Horizon data.
    pub fn horizons(&self) -> &HorizonData {
        self.gauge.horizons()
    }

    /// Gauge.
    pub fn gauge(&self) -> &StarGauge {
        &self.gauge
    }

    /// Sector.
    pub fn sector(&self) -> &SectorConfig {
        &self.sector
    }

    fn point_data(&self, chart: Chart, r: f64, u: [f64; 2], sigma: Complex64) -> PointData {
        let p = self.params();
        let q = p.q_field;
        match chart {
            Chart::PoleNorth | Chart::PoleSouth => {
                let (x, y) = (u[0], u[1]);
                let s2 = x * x + y * y;
                let z0 = (1.0 - s2).max(0.0).sqrt();
                let z = if chart == Chart::PoleNorth { z0 } else { -z0 };
                let g = pole_scaled_components(&self.gauge, chart, r, x, y);
                let rho2 = p.rho2(r, z);
                let a_t = -p.charge * r / rho2;
                let k0 = p.kappa(if chart == Chart::PoleNorth { 1.0 } else { -1.0 });
                let f = p.charge * r * p.a / rho2 * (1.0 + p.lambda()) / k0;
                PointData {
                    g,
                    pot: [0.0, a_t * self.gauge.d(r), -f * y, f * x],
                    lam: [sigma + q * a_t, c(0.0), c(0.0), c(0.0)],
                    weight: 1.0 / z0,
                    omega: p.omega(r, z),
                    rho2,
                }
            }
            _ => {
                let th = u[0];
                let z = th.cos();
                let s2 = th.sin().powi(2);
                let g = star_scaled_components(&self.gauge, r, z, s2, false);
                let rho2 = p.rho2(r, z);
                let a_t = -p.charge * r / rho2;
                let a_phi = p.charge * r * p.a * s2 / rho2;
                PointData {
                    g,
                    pot: [0.0, a_t * self.gauge.d(r), 0.0, 0.0],
                    lam: [sigma + q * a_t, c(0.0), c(0.0), c(self.sector.ell as f64 + q * a_phi)],
                    weight: th.sin(),
                    omega: p.omega(r, z),
                    rho2,
                }
            }
        }
    }

    /// Pointwise D-form expansion of P_σ at (r, angular) in `chart`.
    ///
    /// Coefficient derivatives are taken by eighth-order central differences;
    /// this is the reference evaluation the collocation assembly is tested against.
    pub fn local_operator(&self, chart: Chart, r: f64, angular: [f64; 2], sigma: Complex64) -> Result<LocalOperator> {
        let pole = matches!(chart, Chart::PoleNorth | Chart::PoleSouth);
        if chart == Chart::BoyerLindquist {
            return Err(QnmError::ChartDomainError("the spectral family lives on the *-charts".into()));
        }
        if pole {
            if angular[0].powi(2) + angular[1].powi(2) >= 1.0 {
                return Err(QnmError::ChartDomainError("pole chart needs x*² + y*² < 1".into()));
            }
        } else if angular[0].sin().abs() < 1e-8 {
            return Err(QnmError::ChartDomainError("equatorial chart is singular at the poles".into()));
        }
        let q = self.params().q_field;
        let m2 = self.params().m_field.powi(2);
        // spatial slots in the (t, r, u1, u2) ordering; cyclic ones carry Λ
        let spatial: &[usize] = if pole { &[1, 2, 3] } else { &[1, 2] };
        let cyclic: &[usize] = if pole { &[0] } else { &[0, 3] };
        let hr = FD_REL_STEP * self.horizons().width();
        let steps = [0.0, hr, ANGULAR_FD_STEP, ANGULAR_FD_STEP];
        let at = |s: usize, t: f64| -> PointData {
            let mut rr = r;
            let mut uu = angular;
            match s {
                1 => rr += t,
                2 => uu[0] += t,
                3 => uu[1] += t,
                _ => {}
            }
            self.point_data(chart, rr, uu, sigma)
        };
        let d0 = self.point_data(chart, r, angular, sigma);
        let pre = d0.omega * d0.omega / d0.weight;
        let mut out = LocalOperator { dim: spatial.len(), second: [[0.0; 3]; 3], first: [c(0.0); 3], zeroth: c(0.0) };
        // B^j = V^j − 2i Σ_κ G^{κj} Λ_κ,   V^j = (Ω²/w) Σ_i ∂_i(wΩ⁻²G^{ij})
        let mut bvec = [c(0.0); 4];
        for &j in spatial {
            let mut v = c(0.0);
            for &i in spatial {
                v += central_derivative(
                    |t| {
                        let d = at(i, t);
                        c(d.weight / (d.omega * d.omega) * d.g[i][j])
                    },
                    0.0,
                    steps[i],
                );
            }
            let mut b = v * pre;
            for &k in cyclic {
                b -= 2.0 * I * d0.g[k][j] * d0.lam[k];
            }
            bvec[j] = b;
        }
        // Z = −i(Ω²/w) Σ_i Σ_κ ∂_i(wΩ⁻²G^{iκ}Λ_κ) − Σ G^{κκ′}Λ_κΛ_κ′ + m²ρ²Ω⁻²
        let mut z = c(m2 * d0.rho2 / (d0.omega * d0.omega));
        for &i in spatial {
            let div = central_derivative(
                |t| {
                    let d = at(i, t);
                    let mut s = c(0.0);
                    for &k in cyclic {
                        s += d.lam[k] * d.g[i][k];
                    }
                    s * (d.weight / (d.omega * d.omega))
                },
                0.0,
                steps[i],
            );
            z -= I * pre * div;
        }
        for &k in cyclic {
            for &l in cyclic {
                z -= d0.g[k][l] * d0.lam[k] * d0.lam[l];
            }
        }
        // G^{ij}∂̃_i∂̃_j = −G^{ij}(D_i − qA_i)(D_j − qA_j), B^j ∂̃_j = iB^j(D_j − qA_j)
        for (a, &i) in spatial.iter().enumerate() {
            for (b, &j) in spatial.iter().enumerate() {
                out.second[a][b] = -d0.g[i][j];
            }
        }
        for (b, &j) in spatial.iter().enumerate() {
            let mut f = I * bvec[j];
            for &i in spatial {
                f += 2.0 * q * d0.g[i][j] * d0.pot[i];
            }
            out.first[b] = f;
            z -= I * q * bvec[j] * d0.pot[j];
        }
        if q != 0.0 {
            for &i in spatial {
                for &j in spatial {
                    let da = central_derivative(|t| c(at(i, t).pot[j]), 0.0, steps[i]);
                    z += d0.g[i][j] * (-I * q * da - q * q * d0.pot[i] * d0.pot[j]);
                }
            }
        }
        out.zeroth = z;
        Ok(out)
    }

    /// Boundary-form coefficients at distance ρ from `horizon` (see [`assemble_coefficients`]).
    pub fn coefficients(&self, chart: Chart, horizon: Horizon, rho: f64, angular: [f64; 2], sigma: Complex64) -> Result<OperatorCoefficients> {
        let h = self.horizons();
        if !(rho >= 0.0) || rho > h.width() {
            return Err(QnmError::ChartDomainError(format!("ρ = {rho} outside [0, r₊ − r₋]")));
        }
        let r = horizon.radius(h, rho);
        let loc = self.local_operator(chart, r, angular, sigma)?;
        let s = horizon.orientation();
        let mu_pm = match horizon {
            Horizon::Minus => h.mu_factor_minus(rho),
            Horizon::Plus => h.mu_factor_plus(rho),
        };
        // M_rr D_r² = μ± ρ⁻¹[(ρD_ρ)² + iρD_ρ];  F_r D_r = s F_r D_ρ
        let b = I * mu_pm + s * loc.first[0];
        let cc = loc.zeroth * rho;
        let pole = loc.dim == 3;
        Ok(OperatorCoefficients {
            chart,
            horizon,
            rho,
            angular,
            a: mu_pm,
            b,
            c: cc,
            slash_a: if pole { [loc.second[1][1], loc.second[2][2]] } else { [loc.second[1][1], 0.0] },
            slash_b: if pole { [loc.first[1], loc.first[2]] } else { [loc.first[1], c(0.0)] },
            breve_g_xy: if pole { 2.0 * loc.second[1][2] } else { 0.0 },
            radial_angular: if pole { [2.0 * s * loc.second[0][1], 2.0 * s * loc.second[0][2]] } else { [0.0, 0.0] },
        })
    }

    /// Closed-form b(0)/a(0) = b0/a0 at a horizon (θ-independent).
    pub fn boundary_b0(&self, horizon: Horizon, sigma: Complex64) -> Complex64 {
        let p = self.params();
        let h = self.horizons();
        let r = horizon.radius(h, 0.0);
        let l1 = 1.0 + p.lambda();
        // (1+λ)(r²+a²)S + a(1+λ)L with the potential terms combined: −qQr(1+λ)
        -2.0 * (l1 * (r * r + p.a * p.a) * sigma + p.a * l1 * self.sector.ell as f64 - p.q_field * p.charge * r * l1)
    }

    /// Indicial polynomial 𝔭_{σ,k,l,j} at `horizon`.
    pub fn indicial(&self, horizon: Horizon, sigma: Complex64, k: u32, l: f64, j: u32) -> IndicialPolynomial {
        let h = self.horizons();
        let r = horizon.radius(h, 0.0);
        IndicialPolynomial {
            a0: c(self.params().mu_prime(r).abs()),
            b0: self.boundary_b0(horizon, sigma),
            c0: c(0.0),
            k: k as f64,
            l,
            j,
        }
    }

    /// Collocation discretization of the pencil on `grid`.
    pub fn discretize(&self, grid: CollocationGrid) -> Result<DiscreteFamily> {
        DiscreteFamily::new(self, grid)
    }
}

/// Boundary-form coefficients a, b, c, 𝒶̸, 𝒷̸ at distance `rho` from `horizon`.
///
/// σ enters polynomially: b is affine and c quadratic in σ.
pub fn assemble_coefficients(
    chart: Chart,
    gauge: &StarGauge,
    sector: &SectorConfig,
    horizon: Horizon,
    rho: f64,
    angular: [f64; 2],
    sigma: Complex64,
) -> Result<OperatorCoefficients> {
    SpectralFamily::with_gauge(gauge.clone(), *sector)?.coefficients(chart, horizon, rho, angular, sigma)
}

/// Indicial polynomial 𝔭_{σ,k,l,j}(ξ) = 𝔭_{σ,k,l}(ξ − ij).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicialPolynomial {
    /// a(0).
    pub a0: Complex64,
    /// b(0).
    pub b0: Complex64,
    /// c(0).
    pub c0: Complex64,
    /// Sobolev order k (real so that shifted orders k − 1/2 can be represented).
    pub k: f64,
    /// Weight l.
    pub l: f64,
    /// Correction level j.
    pub j: u32,
}

impl IndicialPolynomial {
    /// ξ_{k,l} = ξ − i(k + l).
    pub fn xi_kl(&self, xi: Complex64) -> Complex64 {
        xi - I * (self.k + self.l)
    }

    /// The same polynomial written as a two-index member 𝔭_{σ,k+j−1,l} (the two-index family is j = 1).
    pub fn shifted_order(&self) -> IndicialPolynomial {
        IndicialPolynomial { k: self.k + self.j as f64 - 1.0, j: 1, ..*self }
    }

    /// The two complex roots in ξ.
    pub fn roots(&self) -> [Complex64; 2] {
        // a0 ζ² + (b0 − 2ij a0) ζ + (c0 − j(ib0 + j a0)) = 0 in ζ = ξ_{k,l}
        let jf = self.j as f64;
        let a = self.a0;
        let b = self.b0 - 2.0 * I * jf * self.a0;
        let cc = self.c0 - jf * (I * self.b0 + jf * self.a0);
        let disc = (b * b - 4.0 * a * cc).sqrt();
        let shift = I * (self.k + self.l);
        [(-b + disc) / (2.0 * a) + shift, (-b - disc) / (2.0 * a) + shift]
    }
}

/// 𝔭(ξ) = a0ξ_{k,l}² + (b0 − 2ij·a0)ξ_{k,l} − j(i·b0 + j·a0) + c0.
pub fn indicial_poly(ind: &IndicialPolynomial, xi: Complex64) -> Complex64 {
    let z = ind.xi_kl(xi);
    let jf = ind.j as f64;
    ind.a0 * z * z + (ind.b0 - 2.0 * I * jf * ind.a0) * z - jf * (I * ind.b0 + jf * ind.a0) + ind.c0
}

/// The 2N′ forbidden imaginary parts −(k − 1/2 + j − 1)|κ±|, j = 1..N′, sorted ascending.
pub fn critical_strips(horizons: &HorizonData, sector: &SectorConfig) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * sector.n_prime as usize);
    for j in 1..=sector.n_prime {
        let s = sector.k as f64 + sector.l_weight + j as f64 - 1.0;
        v.push(-s * horizons.kappa_minus.abs());
        v.push(-s * horizons.kappa_plus.abs());
    }
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// True iff Im σ is farther than `margin` from every strip value.
pub fn sigma_admissible(sigma: Complex64, strips: &[f64], margin: f64) -> bool {
    strips.iter().all(|s| (sigma.im - s).abs() > margin)
}

/// Sizes of the equatorial collocation grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollocationGrid {
    /// Number of Chebyshev intervals in r (n_r + 1 Lobatto nodes on [r₋, r₊]).
    pub n_r: usize,
    /// Number of Gauss–Legendre nodes in z = cosθ.
    pub n_z: usize,
}

impl Default for CollocationGrid {
    fn default() -> Self {
        CollocationGrid { n_r: 32, n_z: 6 }
    }
}

/// Collocation pencil P_h(σ) = P0 + σP1 + σ²P2 acting on w = v/Φ_ℓ, where
/// Φ_ℓ = (1−z)^{α_N}(1+z)^{α_S} carries the pole behaviour of the sector.
///
/// Unknowns are ordered `i·n_z + j` with `i` the radial and `j` the angular index.
#[derive(Debug, Clone)]
pub struct DiscreteFamily {
    /// Grid sizes.
    pub grid: CollocationGrid,
    /// Radial nodes (descending from r₊ to r₋).
    pub r_nodes: Vec<f64>,
    /// Clenshaw–Curtis weights for ∫ dr on the radial nodes.
    pub r_weights: Vec<f64>,
    /// Gauss nodes in z (ascending).
    pub z_nodes: Vec<f64>,
    /// Gauss weights in z.
    pub z_weights: Vec<f64>,
    /// Φ_ℓ at the z nodes.
    pub phi_ell: Vec<f64>,
    /// σ⁰ part.
    pub p0: DMatrix<Complex64>,
    /// σ¹ part.
    pub p1: DMatrix<Complex64>,
    /// σ² part.
    pub p2: DMatrix<Complex64>,
    /// Radial differentiation matrix (d/dr).
    pub dr: DMatrix<f64>,
    /// Angular differentiation matrix (d/dz) on the Gauss nodes.
    pub dz: DMatrix<f64>,
}

struct NodeCoefficients {
    rr: Complex64,
    r0: Complex64,
    r1: Complex64,
    zz: Complex64,
    z: Complex64,
    c0: Complex64,
    c1: Complex64,
    c2: Complex64,
}

impl DiscreteFamily {
    fn new(fam: &SpectralFamily, grid: CollocationGrid) -> Result<Self> {
        if grid.n_r < MIN_RADIAL_INTERVALS || grid.n_z < MIN_ANGULAR_NODES {
            return Err(QnmError::ResolutionError(format!(
                "collocation grid {}×{} below the minimum {}×{}",
                grid.n_r, grid.n_z, MIN_RADIAL_INTERVALS, MIN_ANGULAR_NODES
            )));
        }
        let h = fam.horizons();
        let (rm, width) = (h.r_minus, h.width());
        let x = cheb_nodes(grid.n_r);
        let r_nodes: Vec<f64> = x.iter().map(|&t| rm + 0.5 * width * (1.0 + t)).collect();
        let r_weights: Vec<f64> = clenshaw_curtis_weights(grid.n_r).iter().map(|w| w * 0.5 * width).collect();
        let dr = cheb_diff(grid.n_r) * (2.0 / width);
        let drr = &dr * &dr;
        let (z_nodes, z_weights) = gauss_legendre(grid.n_z);
        let dz = lagrange_diff_matrix(&z_nodes);
        let dzz = &dz * &dz;
        let (an, as_) = fam.sector.angular_exponents(fam.params());
        let phi_ell: Vec<f64> = z_nodes.iter().map(|&z| (1.0 - z).powf(an) * (1.0 + z).powf(as_)).collect();
        let nr = grid.n_r + 1;
        let nz = grid.n_z;
        let n = nr * nz;
        let mut p0 = DMatrix::<Complex64>::zeros(n, n);
        let mut p1 = DMatrix::<Complex64>::zeros(n, n);
        let mut p2 = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..nr {
            for j in 0..nz {
                let nc = node_coefficients(fam, r_nodes[i], z_nodes[j], (an, as_));
                let row = i * nz + j;
                for ip in 0..nr {
                    let col = ip * nz + j;
                    p0[(row, col)] += nc.rr * drr[(i, ip)] + nc.r0 * dr[(i, ip)];
                    p1[(row, col)] += nc.r1 * dr[(i, ip)];
                }
                for jp in 0..nz {
                    let col = i * nz + jp;
                    p0[(row, col)] += nc.zz * dzz[(j, jp)] + nc.z * dz[(j, jp)];
                }
                p0[(row, row)] += nc.c0;
                p1[(row, row)] += nc.c1;
                p2[(row, row)] += nc.c2;
            }
        }
        Ok(DiscreteFamily { grid, r_nodes, r_weights, z_nodes, z_weights, phi_ell, p0, p1, p2, dr, dz })
    }

    /// Number of unknowns.
    pub fn dim(&self) -> usize {
        self.p0.nrows()
    }

    /// P_h(σ) = P0 + σP1 + σ²P2.
    pub fn matrix(&self, sigma: Complex64) -> DMatrix<Complex64> {
        &self.p0 + &self.p1 * sigma + &self.p2 * (sigma * sigma)
    }

    /// d/dσ P_h(σ) = P1 + 2σP2.
    pub fn derivative(&self, sigma: Complex64) -> DMatrix<Complex64> {
        &self.p1 + &self.p2 * (2.0 * sigma)
    }

    /// Applies P_σ to a physical sector profile v sampled on the grid (v = Φ_ℓ w).
    pub fn apply(&self, sigma: Complex64, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim() {
            return Err(QnmError::ResolutionError(format!("field has {} samples, grid needs {}", v.len(), self.dim())));
        }
        let nz = self.grid.n_z;
        let w = nalgebra::DVector::from_iterator(v.len(), v.iter().enumerate().map(|(k, x)| x / self.phi_ell[k % nz]));
        let out = self.matrix(sigma) * w;
        Ok(out.iter().enumerate().map(|(k, x)| x * self.phi_ell[k % nz]).collect())
    }

    /// Samples a profile f(r, z) on the grid.
    pub fn sample<F: Fn(f64, f64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.dim());
        for &r in &self.r_nodes {
            for &z in &self.z_nodes {
                out.push(f(r, z));
            }
        }
        out
    }

    /// Discrete L²(dr dz) inner product ⟨u, v⟩ = Σ w ū v.
    pub fn inner(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let nz = self.grid.n_z;
        u.iter()
            .zip(v)
            .enumerate()
            .map(|(k, (a, b))| a.conj() * b * (self.r_weights[k / nz] * self.z_weights[k % nz]))
            .sum()
    }
}

/// Explicit collocation coefficients of the operator on w = v/Φ_ℓ at (r, z), split by σ-power.
fn node_coefficients(fam: &SpectralFamily, r: f64, z: f64, (an, as_): (f64, f64)) -> NodeCoefficients {
    let p = fam.params();
    let gauge = fam.gauge();
    let q = p.q_field;
    let ell = fam.sector.ell as f64;
    let s2 = 1.0 - z * z;
    let g = star_scaled_components(gauge, r, z, s2, false);
    let mu = gauge.mu(r);
    let om = p.omega(r, z);
    let om_r = -p.alpha * z;
    let om_z = -p.alpha * r;
    let rho2 = p.rho2(r, z);
    let a_t = -p.charge * r / rho2;
    let a_phi = p.charge * r * p.a * s2 / rho2;
    let lsec = ell + q * a_phi;
    let hstep = FD_REL_STEP * fam.horizons().width();
    let dr = |f: &dyn Fn(f64) -> f64| central_derivative(|t| c(f(r + t)), 0.0, hstep).re;
    let atil = a_t * gauge.d(r);
    let atil_r = dr(&|rr| -p.charge * rr / p.rho2(rr, z) * gauge.d(rr));
    let gtr = g[0][1];
    let gtr_r = dr(&|rr| gauge.h(rr) * gauge.one_minus_two_varpi(rr) + gauge.mu(rr) * gauge.d(rr));
    let x0_of = |rr: f64| {
        let gg = star_scaled_components(gauge, rr, z, s2, false);
        let rh = p.rho2(rr, z);
        q * (-p.charge * rr / rh) * gg[0][1] + gg[1][3] * (ell + q * p.charge * rr * p.a * s2 / rh)
    };
    let x0 = x0_of(r);
    let x0_r = dr(&x0_of);
    // Ω²∂_r(μΩ⁻²) = μ′ − 2μΩ_r/Ω
    let om2e_r = p.mu_prime(r) - 2.0 * mu * om_r / om;
    let kap = p.kappa(z);
    let f = kap * s2 / (om * om);
    let f_z = (p.kappa_dz(z) * s2 - 2.0 * z * kap) / (om * om) - 2.0 * kap * s2 * om_z / om.powi(3);
    let beta = -an / (1.0 - z) + as_ / (1.0 + z);
    let beta_z = -an / (1.0 - z).powi(2) - as_ / (1.0 + z).powi(2);
    let om2 = om * om;
    let qa = q * a_t;
    let rr = c(-mu);
    let r0 = c(-om2e_r) + 2.0 * I * q * atil * mu - 2.0 * I * x0;
    let r1 = -2.0 * I * gtr;
    let zz = c(-om2 * f);
    let zc = c(-om2 * (2.0 * f * beta + f_z));
    let mut c0 = I * q * atil * om2e_r + I * q * atil_r * mu + c(q * q * atil * atil * mu);
    c0 += c(-om2 * (f * (beta_z + beta * beta) + f_z * beta));
    c0 += -I * x0_r - 2.0 * q * atil * x0 + 2.0 * I * (om_r / om) * x0;
    c0 -= c(g[0][0] * qa * qa + 2.0 * g[0][3] * qa * lsec + g[3][3] * lsec * lsec);
    c0 += c(p.m_field.powi(2) * rho2 / om2);
    let c1 = -I * gtr_r - 2.0 * q * atil * gtr + 2.0 * I * (om_r / om) * gtr - 2.0 * g[0][0] * qa - 2.0 * g[0][3] * lsec;
    let c2 = c(-g[0][0]);
    NodeCoefficients { rr, r0, r1, zz, z: zc, c0, c1, c2 }
}

/// Partition-of-unity weights (φ_N, φ_E, φ_E′, φ_S) at z = cosθ.
///
/// φ_N ≡ 1 for θ ≤ blend and vanishes for θ ≥ θ_cap (so it is supported inside
/// the cap x*² + y*² < sin²θ_cap < 1); φ_E, φ_E′ split the remainder at the equator.
pub fn gluing_weights(sector: &SectorConfig, z: f64) -> [f64; 4] {
    let th = z.clamp(-1.0, 1.0).acos();
    let ramp = |t: f64| 1.0 - smooth_step((t - sector.pole_blend) / (sector.pole_cap - sector.pole_blend));
    let n = ramp(th);
    let s = ramp(PI - th);
    if z >= 0.0 {
        [n, 1.0 - n, 0.0, 0.0]
    } else {
        [0.0, 0.0, 1.0 - s, s]
    }
}

/// A sector field stored in both chart families: an equatorial grid of the
/// profile v(r, z) (for the factor e^{−iℓφ*}) and two pole caps holding
/// U(r, x*, y*) on tensor Chebyshev grids of the square inscribed in the cap disk.
#[derive(Debug, Clone)]
pub struct DualChartField {
    /// Sector ℓ.
    pub ell: i32,
    /// Equatorial samples in the [`DiscreteFamily`] ordering.
    pub eq_data: Vec<Complex64>,
    /// Chebyshev nodes of the cap square, in x* (and y*).
    pub cap_nodes: Vec<f64>,
    /// North-cap samples, index (i_r, i_x, i_y) → (i_r·m + i_x)·m + i_y.
    pub pole_n: Vec<Complex64>,
    /// South-cap samples, same layout.
    pub pole_s: Vec<Complex64>,
}

/// Pole-cap discretization: Chebyshev grid in r (shared with the equatorial grid) × square in (x*, y*).
#[derive(Debug, Clone)]
pub struct PoleCaps {
    /// Half-side of the square: sin(θ_cap)/√2.
    pub half_side: f64,
    /// Nodes in x* (and y*), descending.
    pub nodes: Vec<f64>,
    /// Differentiation matrix on `nodes`.
    pub d: DMatrix<f64>,
}

impl PoleCaps {
    /// Square cap grid with `m` Chebyshev intervals per side.
    pub fn new(sector: &SectorConfig, m: usize) -> Result<Self> {
        if m < 4 {
            return Err(QnmError::ResolutionError("pole cap needs at least 4 intervals per side".into()));
        }
        let half_side = sector.pole_cap.sin() / 2f64.sqrt();
        let nodes: Vec<f64> = cheb_nodes(m).iter().map(|t| t * half_side).collect();
        let d = cheb_diff(m) * (1.0 / half_side);
        Ok(PoleCaps { half_side, nodes, d })
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }
}

/// Azimuthal factor e^{−iℓφ*} at pole-chart coordinates (φ̄ = atan2(y, x) = κ(pole)/(1+λ)·φ*).
fn cap_phase(params: &SpacetimeParams, pole: Pole, ell: i32, x: f64, y: f64) -> Complex64 {
    let k0 = params.kappa(if pole == Pole::North { 1.0 } else { -1.0 });
    let kn = k0 / (1.0 + params.lambda());
    let phibar = if x == 0.0 && y == 0.0 { 0.0 } else { y.atan2(x) };
    (-I * (ell as f64) * phibar / kn).exp()
}

impl DualChartField {
    /// Fills both chart families from a profile v(r, z).
    pub fn from_profile<F: Fn(f64, f64) -> Complex64>(disc: &DiscreteFamily, caps: &PoleCaps, params: &SpacetimeParams, ell: i32, f: F) -> Self {
        let eq_data = disc.sample(&f);
        let m = caps.len();
        let mut pole_n = Vec::with_capacity(disc.r_nodes.len() * m * m);
        let mut pole_s = Vec::with_capacity(disc.r_nodes.len() * m * m);
        for &r in &disc.r_nodes {
            for &x in &caps.nodes {
                for &y in &caps.nodes {
                    let z = (1.0 - x * x - y * y).sqrt();
                    pole_n.push(f(r, z) * cap_phase(params, Pole::North, ell, x, y));
                    pole_s.push(f(r, -z) * cap_phase(params, Pole::South, ell, x, y));
                }
            }
        }
        DualChartField { ell, eq_data, cap_nodes: caps.nodes.clone(), pole_n, pole_s }
    }

    /// Pointwise sum of two fields on the same grids.
    pub fn add(&self, other: &DualChartField) -> DualChartField {
        let zip = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
        DualChartField {
            ell: self.ell,
            eq_data: zip(&self.eq_data, &other.eq_data),
            cap_nodes: self.cap_nodes.clone(),
            pole_n: zip(&self.pole_n, &other.pole_n),
            pole_s: zip(&self.pole_s, &other.pole_s),
        }
    }

    /// Equatorial profile interpolated (in z) at a cap point, multiplied by the azimuthal phase.
    pub fn equatorial_at_cap(&self, disc: &DiscreteFamily, params: &SpacetimeParams, pole: Pole, i_r: usize, x: f64, y: f64) -> Complex64 {
        let nz = disc.grid.n_z;
        let z0 = (1.0 - x * x - y * y).sqrt();
        let z = if pole == Pole::North { z0 } else { -z0 };
        let w: Vec<Complex64> = (0..nz).map(|j| self.eq_data[i_r * nz + j] / disc.phi_ell[j]).collect();
        let bw = barycentric_weights(&disc.z_nodes);
        let row = interpolation_row(&disc.z_nodes, &bw, z);
        let wi: Complex64 = row.iter().zip(&w).map(|(a, b)| b * *a).sum();
        let (an, as_) = SectorConfig::with_ell(self.ell).angular_exponents(params);
        let fam_exp = (1.0 - z).max(0.0).powf(an) * (1.0 + z).max(0.0).powf(as_);
        wi * fam_exp * cap_phase(params, pole, self.ell, x, y)
    }

    /// Largest mismatch between the cap data and the equatorial data on the overlap
    /// (cap points with blend ≤ θ ≤ θ_cap).
    pub fn overlap_mismatch(&self, disc: &DiscreteFamily, params: &SpacetimeParams, sector: &SectorConfig) -> f64 {
        let m = self.cap_nodes.len();
        let mut worst = 0.0f64;
        for (pole, data) in [(Pole::North, &self.pole_n), (Pole::South, &self.pole_s)] {
            for i_r in 0..disc.r_nodes.len() {
                for (ix, &x) in self.cap_nodes.iter().enumerate() {
                    for (iy, &y) in self.cap_nodes.iter().enumerate() {
                        let th = (x * x + y * y).sqrt().asin();
                        if th < sector.pole_blend || th > sector.pole_cap {
                            continue;
                        }
                        let e = self.equatorial_at_cap(disc, params, pole, i_r, x, y);
                        worst = worst.max((e - data[(i_r * m + ix) * m + iy]).norm());
                    }
                }
            }
        }
        worst
    }
}

/// Applies P_σ chartwise: collocation on the equatorial grid and the divergence
/// form with tensor Chebyshev differentiation on each pole cap.
pub fn apply_p(field: &DualChartField, fam: &SpectralFamily, disc: &DiscreteFamily, caps: &PoleCaps, sigma: Complex64) -> Result<DualChartField> {
    if field.ell != fam.sector.ell {
        return Err(QnmError::ModeError(format!("field sector ℓ = {} but family sector ℓ = {}", field.ell, fam.sector.ell)));
    }
    let eq = disc.apply(sigma, &field.eq_data)?;
    let pn = apply_pole(fam, disc, caps, Chart::PoleNorth, &field.pole_n, sigma)?;
    let ps = apply_pole(fam, disc, caps, Chart::PoleSouth, &field.pole_s, sigma)?;
    Ok(DualChartField { ell: field.ell, eq_data: eq, cap_nodes: field.cap_nodes.clone(), pole_n: pn, pole_s: ps })
}

/// Divergence-form pole-chart operator on a cap grid.
pub fn apply_pole(fam: &SpectralFamily, disc: &DiscreteFamily, caps: &PoleCaps, chart: Chart, u: &[Complex64], sigma: Complex64) -> Result<Vec<Complex64>> {
    let nr = disc.r_nodes.len();
    let m = caps.len();
    if u.len() != nr * m * m {
        return Err(QnmError::ResolutionError(format!("cap field has {} samples, grid needs {}", u.len(), nr * m * m)));
    }
    let idx = |i: usize, a: usize, b: usize| (i * m + a) * m + b;
    let deriv = |f: &[Complex64], axis: usize| -> Vec<Complex64> {
        let mut out = vec![c(0.0); f.len()];
        for i in 0..nr {
            for a in 0..m {
                for b in 0..m {
                    let mut s = c(0.0);
                    match axis {
                        0 => {
                            for k in 0..nr {
                                s += f[idx(k, a, b)] * disc.dr[(i, k)];
                            }
                        }
                        1 => {
                            for k in 0..m {
                                s += f[idx(i, k, b)] * caps.d[(a, k)];
                            }
                        }
                        _ => {
                            for k in 0..m {
                                s += f[idx(i, a, k)] * caps.d[(b, k)];
                            }
                        }
                    }
                    out[idx(i, a, b)] = s;
                }
            }
        }
        out
    };
    let n = u.len();
    let mut data = Vec::with_capacity(n);
    for i in 0..nr {
        for a in 0..m {
            for b in 0..m {
                data.push(fam.point_data(chart, disc.r_nodes[i], [caps.nodes[a], caps.nodes[b]], sigma));
            }
        }
    }
    let q = fam.params().q_field;
    let m2 = fam.params().m_field.powi(2);
    let mut fj: Vec<Vec<Complex64>> = (0..3).map(|ax| deriv(u, ax)).collect();
    for (ax, f) in fj.iter_mut().enumerate() {
        for k in 0..n {
            f[k] -= I * q * data[k].pot[ax + 1] * u[k];
        }
    }
    let mut result: Vec<Complex64> = (0..n)
        .map(|k| {
            let d = &data[k];
            let s = d.lam[0];
            let mut t = -I * s * d.g[0][0] * u[k] * (-I) * s;
            for j in 0..3 {
                t += -I * s * d.g[0][j + 1] * fj[j][k];
            }
            t + m2 * d.rho2 / (d.omega * d.omega) * u[k]
        })
        .collect();
    for i in 0..3 {
        let flux: Vec<Complex64> = (0..n)
            .map(|k| {
                let d = &data[k];
                let w = d.weight / (d.omega * d.omega);
                let mut s = -I * d.g[i + 1][0] * d.lam[0] * u[k];
                for j in 0..3 {
                    s += d.g[i + 1][j + 1] * fj[j][k];
                }
                s * w
            })
            .collect();
        let div = deriv(&flux, i);
        for k in 0..n {
            let d = &data[k];
            let pre = d.omega * d.omega / d.weight;
            result[k] += pre * (div[k] - I * q * d.pot[i + 1] * flux[k]);
        }
    }
    Ok(result)
}
