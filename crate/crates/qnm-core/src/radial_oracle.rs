//! Independent resonance oracle for the spherically symmetric case (a = α = 0).
//!
//! Separating u = r⁻¹ψ(x) Y_{l}(θ, φ) e^{−iσt} in the Regge–Wheeler coordinate
//! dx/dr = 1/f, f = μ/r², gives
//!
//! ```text
//! ψ″ + ((σ − qQ/r)² − V(r)) ψ = 0,   V = f (l(l+1)/r² + f′/r + m²).
//! ```
//!
//! The Jost solutions e_± behave like free outgoing waves e^{±iσ±x} at the
//! two ends (σ± = σ − qQ/r±); their Wronskian W = e₊e₋′ − e₊′e₋ vanishes
//! exactly at the resonances above the upper critical strip.
//!
//! Integration runs in x with the state (Re ψ, Im ψ, Re ψ′, Im ψ′, y), where
//! y = ln((r − r₋)/(r₊ − r)) is advanced alongside so that r and the
//! distances to both horizons are available without cancellation.

use crate::error::{QnmError, Result};
use crate::geometry::{solve_horizons, HorizonData, SpacetimeParams};
use crate::resonance_finder::{locate, ContourSpec, DetEvaluator, DetPoint, LocatedZero};
use num_complex::Complex64;
use ode_solvers::{Dop853, OutputType, System, Vector5};
use serde::{Deserialize, Serialize};

/// Relative tolerance of the adaptive integrator.
pub const ODE_RTOL: f64 = 1e-11;
/// Absolute tolerance of the adaptive integrator (relative to the solution scale, which is O(1) at the start).
pub const ODE_ATOL: f64 = 1e-13;
/// Tail cut: the end points ±X are chosen so that the effective potential is below this fraction of its maximum.
pub const TAIL_FRACTION: f64 = 1e-12;
/// Safety margin on the validity half-plane Im σ > −min κ·(1 − margin).
pub const STRIP_SAFETY: f64 = 0.02;
/// Default bound on the tail potential at the end points.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-8;
/// Newton tolerance of the tortoise inversion (in y).
pub const TORTOISE_TOL: f64 = 1e-13;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which Jost solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JostSide {
    /// e₋ ∼ e^{−iσ₋x} as x → −∞ (towards r₋).
    Minus,
    /// e₊ ∼ e^{+iσ₊x} as x → +∞ (towards r₊).
    Plus,
}

#[derive(Debug, Clone)]
enum Model {
    Spacetime { params: SpacetimeParams, horizons: HorizonData, x_shift: f64 },
    Free,
}

/// The separated radial problem for one spherical-harmonic index.
#[derive(Debug, Clone)]
pub struct RadialProblem {
    model: Model,
    /// Spherical-harmonic index l_sph.
    pub l_sph: u32,
    /// Constant added to the electric phase φ_q (gauge-covariance checks).
    pub phase_shift: f64,
    /// Largest tail potential |U(±X)| accepted at the matching end points.
    pub tail_tolerance: f64,
}

/// A point of the radial domain, parameterized by y = ln((r − r₋)/(r₊ − r)).
#[derive(Debug, Clone, Copy)]
struct RadialPoint {
    r: f64,
    /// r − r₋.
    dm: f64,
    /// r₊ − r.
    dp: f64,
}

/// Value of W at one σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WronskianSample {
    /// Frequency.
    pub sigma: Complex64,
    /// W = e₊e₋′ − e₊′e₋.
    #[serde(rename = "W")]
    pub w: Complex64,
    /// Integration span [−X₋, X₊].
    pub integration_span: [f64; 2],
    /// Size of the neglected tail (effective potential at the end points).
    pub tail_estimate: f64,
    /// Matching point.
    pub x0: f64,
}

fn logistic_pair(y: f64) -> (f64, f64) {
    // (e^y/(1+e^y), 1/(1+e^y)) without overflow
    if y >= 0.0 {
        let e = (-y).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = y.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    }
}

/// ln(1 + e^y), overflow-free.
fn softplus(y: f64) -> f64 {
    if y > 0.0 {
        y + (-y).exp().ln_1p()
    } else {
        y.exp().ln_1p()
    }
}

impl RadialProblem {
    /// Spherically symmetric spacetime problem; requires a = α = 0.
    pub fn new(params: &SpacetimeParams, l_sph: u32) -> Result<Self> {
        params.validate()?;
        if params.a != 0.0 || params.alpha != 0.0 {
            return Err(QnmError::invalid("a/alpha", "the radial oracle needs a = α = 0"));
        }
        let horizons = solve_horizons(params)?;
        let mut p = RadialProblem {
            model: Model::Spacetime { params: *params, horizons, x_shift: 0.0 },
            l_sph,
            phase_shift: 0.0,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
        };
        // put x = 0 at the maximum of f
        let y_peak = p.y_of_max_f();
        let shift = p.x_of_y(y_peak);
        if let Model::Spacetime { x_shift, .. } = &mut p.model {
            *x_shift = shift;
        }
        Ok(p)
    }

    /// The free problem V ≡ 0, φ_q ≡ 0 on the whole line.
    pub fn free() -> Self {
        RadialProblem { model: Model::Free, l_sph: 0, phase_shift: 0.0, tail_tolerance: DEFAULT_TAIL_TOLERANCE }
    }

    /// Horizon data (None for the free problem).
    pub fn horizons(&self) -> Option<&HorizonData> {
        match &self.model {
            Model::Spacetime { horizons, .. } => Some(horizons),
            Model::Free => None,
        }
    }

    fn point(&self, y: f64) -> RadialPoint {
        match &self.model {
            Model::Spacetime { horizons, .. } => {
                let l = horizons.width();
                let (a, b) = logistic_pair(y);
                let dm = l * a;
                let dp = l * b;
                let r = if y < 0.0 { horizons.r_minus + dm } else { horizons.r_plus - dp };
                RadialPoint { r, dm, dp }
            }
            Model::Free => RadialPoint { r: 1.0, dm: 1.0, dp: 1.0 },
        }
    }

    /// f = μ/r² at the point.
    fn f_at(&self, pt: &RadialPoint) -> f64 {
        match &self.model {
            Model::Spacetime { horizons, .. } => pt.dm * pt.dp * horizons.mu_mid(pt.r) / (pt.r * pt.r),
            Model::Free => 0.0,
        }
    }

    /// f(r) = μ(r)/r².
    pub fn f(&self, r: f64) -> f64 {
        match &self.model {
            Model::Spacetime { horizons, .. } => horizons.mu(r) / (r * r),
            Model::Free => 0.0,
        }
    }

    fn potential_at(&self, pt: &RadialPoint) -> f64 {
        match &self.model {
            Model::Spacetime { params, horizons, .. } => {
                let r = pt.r;
                let mm = horizons.mu_mid(r);
                let mm_r = (-horizons.leading
                    * (2.0 * Complex64::new(r, 0.0) - horizons.complex_roots[2] - horizons.complex_roots[3]))
                    .re;
                let mu = pt.dm * pt.dp * mm;
                let mu_r = (pt.dp - pt.dm) * mm + pt.dm * pt.dp * mm_r;
                let f = mu / (r * r);
                let fp = mu_r / (r * r) - 2.0 * mu / (r * r * r);
                let l = self.l_sph as f64;
                f * (l * (l + 1.0) / (r * r) + fp / r + params.m_field.powi(2))
            }
            Model::Free => 0.0,
        }
    }

    /// Effective potential V(r).
    pub fn potential(&self, r: f64) -> f64 {
        match &self.model {
            Model::Spacetime { horizons, .. } => {
                let pt = RadialPoint { r, dm: r - horizons.r_minus, dp: horizons.r_plus - r };
                self.potential_at(&pt)
            }
            Model::Free => 0.0,
        }
    }

    /// Electric phase φ_q(r) = qQ/r (plus the gauge shift).
    pub fn phase(&self, r: f64) -> f64 {
        match &self.model {
            Model::Spacetime { params, .. } => params.q_field * params.charge / r + self.phase_shift,
            Model::Free => self.phase_shift,
        }
    }

    /// σ± = σ − φ_q(r±), the asymptotic wave numbers.
    pub fn asymptotic_frequency(&self, side: JostSide, sigma: Complex64) -> Complex64 {
        match (&self.model, side) {
            (Model::Spacetime { horizons, .. }, JostSide::Minus) => sigma - self.phase(horizons.r_minus),
            (Model::Spacetime { horizons, .. }, JostSide::Plus) => sigma - self.phase(horizons.r_plus),
            (Model::Free, _) => sigma - self.phase_shift,
        }
    }

    fn kappa(&self, side: JostSide) -> f64 {
        match (&self.model, side) {
            (Model::Spacetime { horizons, .. }, JostSide::Minus) => horizons.kappa_minus.abs(),
            (Model::Spacetime { horizons, .. }, JostSide::Plus) => horizons.kappa_plus.abs(),
            (Model::Free, _) => 1.0,
        }
    }

    /// Tortoise coordinate as a function of y (additive constant fixed at construction).
    fn x_of_y(&self, y: f64) -> f64 {
        match &self.model {
            Model::Spacetime { params, horizons, x_shift } => {
                let lw = horizons.width().ln();
                let sp = softplus(y);
                let rr = horizons.complex_roots;
                let c4 = params.quartic()[4];
                let pt = self.point(y);
                let mut x = 0.0;
                for k in 0..4 {
                    let mut dmu = Complex64::new(c4, 0.0);
                    for j in 0..4 {
                        if j != k {
                            dmu *= rr[k] - rr[j];
                        }
                    }
                    let ak = rr[k] * rr[k] / dmu;
                    let log = match k {
                        0 => Complex64::new(lw + y - sp, 0.0),
                        1 => Complex64::new(lw - sp, 0.0),
                        _ => (Complex64::new(pt.r, 0.0) - rr[k]).ln(),
                    };
                    x += (ak * log).re;
                }
                x - x_shift
            }
            Model::Free => y,
        }
    }

    /// dx/dy = r²/((r₊ − r₋)·mu_mid(r)).
    fn dxdy(&self, y: f64) -> f64 {
        match &self.model {
            Model::Spacetime { horizons, .. } => {
                let pt = self.point(y);
                pt.r * pt.r / (horizons.width() * horizons.mu_mid(pt.r))
            }
            Model::Free => 1.0,
        }
    }

    fn y_of_max_f(&self) -> f64 {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in -400..=400 {
            let y = i as f64 * 0.05;
            let f = self.f_at(&self.point(y));
            if f > best.0 {
                best = (f, y);
            }
        }
        best.1
    }

    /// Regge–Wheeler coordinate x(r).
    pub fn x_of_r(&self, r: f64) -> Result<f64> {
        match &self.model {
            Model::Spacetime { horizons, .. } => {
                if !(r > horizons.r_minus && r < horizons.r_plus) {
                    return Err(QnmError::ChartDomainError(format!("r = {r} outside (r₋, r₊)")));
                }
                Ok(self.x_of_y(((r - horizons.r_minus) / (horizons.r_plus - r)).ln()))
            }
            Model::Free => Ok(r),
        }
    }

    /// Inverse tortoise map in the y variable (Newton on the partial-fraction form).
    fn y_of_x(&self, x: f64) -> f64 {
        if let Model::Free = self.model {
            return x;
        }
        // asymptotic initial guess y ≈ 2κ±x at the ends
        let mut y = if x > 0.0 { 2.0 * self.kappa(JostSide::Plus) * x } else { 2.0 * self.kappa(JostSide::Minus) * x };
        for _ in 0..200 {
            let dy = (self.x_of_y(y) - x) / self.dxdy(y);
            let step = dy.clamp(-5.0, 5.0);
            y -= step;
            if step.abs() < TORTOISE_TOL * (1.0 + y.abs()) {
                break;
            }
        }
        y
    }

    /// r(x).
    pub fn r_of_x(&self, x: f64) -> f64 {
        self.point(self.y_of_x(x)).r
    }

    /// U(x) = V − (σ − φ_q)² + σ±², the part of the equation that decays at the `side` end.
    fn tail_potential(&self, side: JostSide, sigma: Complex64, pt: &RadialPoint) -> Complex64 {
        let s = sigma - self.phase(pt.r);
        let spm = self.asymptotic_frequency(side, sigma);
        self.potential_at(pt) - s * s + spm * spm
    }

    /// Default end points (X₋, X₊) with |V(∓X)| < TAIL_FRACTION·max V.
    pub fn default_span(&self) -> [f64; 2] {
        match &self.model {
            Model::Free => [20.0, 20.0],
            Model::Spacetime { .. } => {
                let vmax = (0..=800)
                    .map(|i| self.potential_at(&self.point(-20.0 + 0.05 * i as f64)).abs())
                    .fold(0.0f64, f64::max)
                    .max(1e-300);
                let q_scale = self.phase_scale();
                let tail = |y: f64| {
                    let pt = self.point(y);
                    let side = if y < 0.0 { JostSide::Minus } else { JostSide::Plus };
                    self.potential_at(&pt).abs() + q_scale * (self.phase(pt.r) - self.phase_end(side)).abs()
                };
                let target = TAIL_FRACTION * vmax;
                let mut out = [0.0; 2];
                for (k, dir) in [(0usize, -1.0f64), (1, 1.0)] {
                    let mut y = dir * 2.0;
                    while tail(y) > target && y.abs() < 700.0 {
                        y += dir * 0.5;
                    }
                    out[k] = self.x_of_y(y).abs();
                }
                out
            }
        }
    }

    fn phase_scale(&self) -> f64 {
        match &self.model {
            Model::Spacetime { params, horizons, .. } => {
                (params.q_field * params.charge).abs() / horizons.r_minus.max(1e-300) + 1.0
            }
            Model::Free => 0.0,
        }
    }

    fn phase_end(&self, side: JostSide) -> f64 {
        match (&self.model, side) {
            (Model::Spacetime { horizons, .. }, JostSide::Minus) => self.phase(horizons.r_minus),
            (Model::Spacetime { horizons, .. }, JostSide::Plus) => self.phase(horizons.r_plus),
            (Model::Free, _) => self.phase_shift,
        }
    }

    /// Checks the validity half-plane Im σ > −min κ·(1 − margin).
    pub fn check_sigma(&self, sigma: Complex64) -> Result<()> {
        if let Model::Spacetime { horizons, .. } = &self.model {
            let kmin = horizons.kappa_minus.abs().min(horizons.kappa_plus.abs());
            if sigma.im <= -kmin * (1.0 - STRIP_SAFETY) {
                return Err(QnmError::invalid(
                    "sigma",
                    format!("Im σ = {} is below the oracle's validity half-plane Im σ > {}", sigma.im, -kmin * (1.0 - STRIP_SAFETY)),
                ));
            }
        }
        Ok(())
    }

    /// Initial data of e_side at the end point (x = ∓X) with one Picard correction of the exponential tail.
    fn initial_data(&self, side: JostSide, sigma: Complex64, x_end: f64, tol: f64) -> Result<(Complex64, Complex64, f64, f64)> {
        let y = self.y_of_x(x_end);
        let pt = self.point(y);
        let u = self.tail_potential(side, sigma, &pt);
        if u.norm() > tol {
            return Err(QnmError::TailError { x: x_end, tail: u.norm(), tolerance: tol });
        }
        let k = self.kappa(side);
        let s = self.asymptotic_frequency(side, sigma);
        // ψ = e^{±isx}(1 + g), g = U/(4κ(κ ∓ ... )): g″ ± 2isg′ = U with U ∝ e^{∓2κx}
        let (phase, g, gp) = match side {
            JostSide::Plus => {
                let g = u / (4.0 * k * (k - I * s));
                ((I * s * x_end).exp(), g, -2.0 * k * g)
            }
            JostSide::Minus => {
                let g = u / (4.0 * k * (k - I * s));
                ((-I * s * x_end).exp(), g, 2.0 * k * g)
            }
        };
        let sgn = if side == JostSide::Plus { 1.0 } else { -1.0 };
        let psi = phase * (1.0 + g);
        let dpsi = phase * (sgn * I * s * (1.0 + g) + gp);
        Ok((psi, dpsi, y, u.norm()))
    }

    /// Integrates e_side from its end point to each target (targets visited in order).
    pub fn jost_solution(&self, side: JostSide, sigma: Complex64, span: [f64; 2], targets: &[f64]) -> Result<Vec<(Complex64, Complex64)>> {
        let x_end = match side {
            JostSide::Minus => -span[0],
            JostSide::Plus => span[1],
        };
        let (psi, dpsi, y0, _) = self.initial_data(side, sigma, x_end, f64::INFINITY)?;
        let mut state = Vector5::new(psi.re, psi.im, dpsi.re, dpsi.im, y0);
        let mut x = x_end;
        let mut out = Vec::with_capacity(targets.len());
        for &t in targets {
            if t != x {
                state = self.integrate(sigma, x, t, state)?;
                x = t;
            }
            out.push((Complex64::new(state[0], state[1]), Complex64::new(state[2], state[3])));
        }
        Ok(out)
    }

    fn integrate(&self, sigma: Complex64, x0: f64, x1: f64, y: Vector5<f64>) -> Result<Vector5<f64>> {
        let scale = (y[0].hypot(y[1]) + y[2].hypot(y[3])).max(1e-300);
        let sys = RadialSystem { problem: self, sigma };
        let mut solver = Dop853::new(sys, x0, x1, (x1 - x0).abs(), y, ODE_RTOL, ODE_ATOL * scale);
        solver.set_output(OutputType::Sparse);
        solver
            .integrate()
            .map_err(|e| QnmError::ResolutionError(format!("radial integration failed: {e}")))?;
        solver
            .y_out()
            .last()
            .copied()
            .ok_or_else(|| QnmError::ResolutionError("radial integration produced no output".into()))
    }

    /// W(σ) = e₊e₋′ − e₊′e₋ evaluated at x0 with the default span.
    pub fn wronskian(&self, sigma: Complex64) -> Result<WronskianSample> {
        self.wronskian_at(sigma, self.default_span(), 0.0)
    }

    /// W(σ) at matching point `x0` on span [−X₋, X₊].
    pub fn wronskian_at(&self, sigma: Complex64, span: [f64; 2], x0: f64) -> Result<WronskianSample> {
        self.check_sigma(sigma)?;
        let tol = self.tail_tolerance;
        let (_, _, _, tm) = self.initial_data(JostSide::Minus, sigma, -span[0], tol)?;
        let (_, _, _, tp) = self.initial_data(JostSide::Plus, sigma, span[1], tol)?;
        let em = self.jost_solution(JostSide::Minus, sigma, span, &[x0])?[0];
        let ep = self.jost_solution(JostSide::Plus, sigma, span, &[x0])?[0];
        Ok(WronskianSample {
            sigma,
            w: ep.0 * em.1 - ep.1 * em.0,
            integration_span: [-span[0], span[1]],
            tail_estimate: tm.max(tp),
            x0,
        })
    }

    /// Wronskians at several matching points (constancy diagnostic).
    pub fn wronskian_profile(&self, sigma: Complex64, span: [f64; 2], points: &[f64]) -> Result<Vec<Complex64>> {
        self.check_sigma(sigma)?;
        let mut sorted: Vec<f64> = points.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let em = self.jost_solution(JostSide::Minus, sigma, span, &sorted)?;
        let rev: Vec<f64> = sorted.iter().rev().copied().collect();
        let mut ep = self.jost_solution(JostSide::Plus, sigma, span, &rev)?;
        ep.reverse();
        Ok(em.iter().zip(&ep).map(|(m, p)| p.0 * m.1 - p.1 * m.0).collect())
    }
}

/// W(σ) as an exact evaluator for the contour engine.
impl DetEvaluator for RadialProblem {
    fn evaluate(&self, sigma: Complex64) -> Result<DetPoint> {
        Ok(DetPoint::exact(self.wronskian(sigma)?.w))
    }
}

/// Zeros of W inside a contour lying strictly above the upper critical strip.
///
/// Counting and subdivision are delegated to [`crate::resonance_finder`] with
/// W as the evaluator; the validity half-plane is checked on the whole region.
pub fn wronskian_zeros(problem: &RadialProblem, contour: &ContourSpec, max_depth: usize) -> Result<Vec<LocatedZero>> {
    let [lo, _] = contour.imag_range();
    problem.check_sigma(Complex64::new(0.0, lo))?;
    locate(contour, problem, max_depth, &[])
}

struct RadialSystem<'a> {
    problem: &'a RadialProblem,
    sigma: Complex64,
}

impl System<f64, Vector5<f64>> for RadialSystem<'_> {
    fn system(&self, _x: f64, y: &Vector5<f64>, dy: &mut Vector5<f64>) {
        let p = self.problem;
        let pt = p.point(y[4]);
        let s = self.sigma - p.phase(pt.r);
        let k2 = s * s - p.potential_at(&pt);
        let psi = Complex64::new(y[0], y[1]);
        let dd = -k2 * psi;
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = dd.re;
        dy[3] = dd.im;
        dy[4] = match &p.model {
            Model::Spacetime { horizons, .. } => horizons.width() * horizons.mu_mid(pt.r) / (pt.r * pt.r),
            Model::Free => 1.0,
        };
    }
}
