//! Argument-principle counting and location of zeros inside closed contours.
//!
//! The engine is generic over a [`DetEvaluator`]: anything that returns a
//! value D(σ) together with a perturbation bound 𝔇(σ) and a trace-norm bound
//! ‖K‖₁. The Fredholm determinant of [`crate::determinant_engine`] and the
//! Wronskian of [`crate::radial_oracle`] both plug in here.
//!
//! * Counting uses continuous argument tracking: the phase increment between
//!   consecutive samples is kept below [`ARG_STEP_MAX`] by adaptive edge
//!   refinement, so the winding number is an exact integer.
//! * Power sums S(Γ, n) = (1/2πi)∮ σⁿ D′/D dσ use trapezoidal quadrature with
//!   central-difference derivatives at step h = |Γ|_len/(8·n_nodes).
//! * Location uses recursive quadrisection until every cell holds at most one
//!   zero, then S(cell, 1) as starting guess and Newton polishing.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QnmError, Result};

/// Minimum number of contour nodes.
pub const MIN_NODES: usize = 32;
/// Default number of contour nodes.
pub const DEFAULT_NODES: usize = 64;
/// Contour guard: a node with |D| < NEAR_ZERO_FACTOR·𝔇 is indistinguishable from a zero.
pub const NEAR_ZERO_FACTOR: f64 = 10.0;
/// Relative guard for exact evaluators (𝔇 = 0): |D| below this fraction of max|D| on Γ.
pub const RELATIVE_ZERO_GUARD: f64 = 1e-12;
/// Largest phase increment accepted between two consecutive samples.
pub const ARG_STEP_MAX: f64 = PI / 4.0;
/// Maximal number of bisections of one contour edge during argument tracking.
pub const MAX_EDGE_REFINEMENT: u32 = 14;
/// Newton polishing stops when the step is below this relative size.
pub const NEWTON_TOL: f64 = 1e-14;
/// Maximal Newton iterations.
pub const NEWTON_MAX_ITERS: usize = 40;
/// Relative offset used to move a subdivision line off a zero.
pub const JITTER_FRACTION: f64 = 1e-3;
/// Number of jitter attempts before a NearZeroOnContour error is propagated.
pub const JITTER_ATTEMPTS: usize = 4;

/// One evaluation of the function whose zeros are sought.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetPoint {
    /// D(σ).
    pub value: Complex64,
    /// Bound 𝔇(σ) on |D(σ) − D_exact(σ)| (0 for exact evaluators).
    pub dfrak: f64,
    /// Bound on ‖K_σ‖₁ entering the global magnitude bound |D| ≤ e^{‖K‖₁}.
    pub k_trace: f64,
}

impl DetPoint {
    /// An exact value with no error budget.
    pub fn exact(value: Complex64) -> Self {
        DetPoint { value, dfrak: 0.0, k_trace: 0.0 }
    }
}

/// A function of σ whose zeros are counted and located.
pub trait DetEvaluator: Sync {
    /// Evaluates D at σ.
    fn evaluate(&self, sigma: Complex64) -> Result<DetPoint>;
}

/// Adapter turning an exact analytic closure into a [`DetEvaluator`].
pub struct AnalyticFn<F>(pub F);

impl<F: Fn(Complex64) -> Complex64 + Sync> DetEvaluator for AnalyticFn<F> {
    fn evaluate(&self, sigma: Complex64) -> Result<DetPoint> {
        Ok(DetPoint::exact((self.0)(sigma)))
    }
}

/// Geometry of a positively oriented contour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ContourShape {
    /// Circle |σ − center| = radius.
    Circle { center: Complex64, radius: f64 },
    /// Axis-parallel rectangle.
    Rectangle { lower_left: Complex64, upper_right: Complex64 },
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

/// A contour together with its discretization and clearance parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourSpec {
    /// Contour geometry.
    pub shape: ContourShape,
    /// Number of quadrature nodes (even, ≥ [`MIN_NODES`]).
    #[serde(default = "default_nodes")]
    pub n_nodes: usize,
    /// Offset δ′ of the enlarged contour Γ′; `None` selects half the strip clearance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_prime: Option<f64>,
    /// Required distance between the closed region and every critical strip.
    #[serde(default)]
    pub margin: f64,
}

impl ContourSpec {
    /// Circle with default discretization.
    pub fn circle(center: Complex64, radius: f64) -> Self {
        ContourSpec { shape: ContourShape::Circle { center, radius }, n_nodes: DEFAULT_NODES, delta_prime: None, margin: 0.0 }
    }

    /// Rectangle with default discretization.
    pub fn rectangle(lower_left: Complex64, upper_right: Complex64) -> Self {
        ContourSpec { shape: ContourShape::Rectangle { lower_left, upper_right }, n_nodes: DEFAULT_NODES, delta_prime: None, margin: 0.0 }
    }

    /// Same contour with `n` nodes.
    pub fn with_nodes(mut self, n: usize) -> Self {
        self.n_nodes = n;
        self
    }

    /// Imaginary extent [min Im σ, max Im σ] of the closed region.
    pub fn imag_range(&self) -> [f64; 2] {
        match self.shape {
            ContourShape::Circle { center, radius } => [center.im - radius, center.im + radius],
            ContourShape::Rectangle { lower_left, upper_right } => [lower_left.im, upper_right.im],
        }
    }

    /// Bounding box (lower-left, upper-right).
    pub fn bounding_box(&self) -> (Complex64, Complex64) {
        match self.shape {
            ContourShape::Circle { center, radius } => (center - Complex64::new(radius, radius), center + Complex64::new(radius, radius)),
            ContourShape::Rectangle { lower_left, upper_right } => (lower_left, upper_right),
        }
    }

    /// Distance between the closed region and the nearest strip (∞ without strips).
    pub fn strip_clearance(&self, strips: &[f64]) -> f64 {
        let [lo, hi] = self.imag_range();
        strips
            .iter()
            .map(|&s| if s < lo { lo - s } else if s > hi { s - hi } else { 0.0 })
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks node count, geometry and strip clearance.
    pub fn validate(&self, strips: &[f64]) -> Result<()> {
        if self.n_nodes < MIN_NODES || self.n_nodes % 2 != 0 {
            return Err(QnmError::invalid("n_nodes", format!("{} must be even and at least {MIN_NODES}", self.n_nodes)));
        }
        match self.shape {
            ContourShape::Circle { center, radius } => {
                if !(radius > 0.0 && radius.is_finite() && center.re.is_finite() && center.im.is_finite()) {
                    return Err(QnmError::invalid("contour", "circle needs a finite center and a positive radius"));
                }
            }
            ContourShape::Rectangle { lower_left, upper_right } => {
                if !(upper_right.re > lower_left.re && upper_right.im > lower_left.im) {
                    return Err(QnmError::invalid("contour", "rectangle corners must be ordered lower-left < upper-right"));
                }
            }
        }
        if let Some(d) = self.delta_prime {
            if !(d > 0.0) {
                return Err(QnmError::invalid("delta_prime", "must be positive"));
            }
        }
        let [lo, hi] = self.imag_range();
        for &s in strips {
            if s >= lo - self.margin && s <= hi + self.margin {
                return Err(QnmError::StripCollision { strip: s });
            }
        }
        Ok(())
    }

    /// Resolved δ′: the configured value or half the strip clearance
    /// (a quarter of the contour diameter when no strip constrains it).
    pub fn resolved_delta_prime(&self, strips: &[f64]) -> f64 {
        if let Some(d) = self.delta_prime {
            return d;
        }
        let clearance = self.strip_clearance(strips);
        if clearance.is_finite() {
            0.5 * clearance
        } else {
            0.25 * self.diameter()
        }
    }

    /// Largest distance across the closed region.
    pub fn diameter(&self) -> f64 {
        match self.shape {
            ContourShape::Circle { radius, .. } => 2.0 * radius,
            ContourShape::Rectangle { lower_left, upper_right } => (upper_right - lower_left).norm(),
        }
    }

    /// Length lg(Γ).
    pub fn length(&self) -> f64 {
        match self.shape {
            ContourShape::Circle { radius, .. } => 2.0 * PI * radius,
            ContourShape::Rectangle { lower_left, upper_right } => 2.0 * ((upper_right.re - lower_left.re) + (upper_right.im - lower_left.im)),
        }
    }

    /// |Γ| = max_{σ∈Γ} |σ|.
    pub fn modulus(&self) -> f64 {
        match self.shape {
            ContourShape::Circle { center, radius } => center.norm() + radius,
            ContourShape::Rectangle { lower_left, upper_right } => [
                lower_left,
                upper_right,
                Complex64::new(lower_left.re, upper_right.im),
                Complex64::new(upper_right.re, lower_left.im),
            ]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max),
        }
    }

    /// Whether σ lies strictly inside Γ.
    pub fn contains(&self, sigma: Complex64) -> bool {
        match self.shape {
            ContourShape::Circle { center, radius } => (sigma - center).norm() < radius,
            ContourShape::Rectangle { lower_left, upper_right } => {
                sigma.re > lower_left.re && sigma.re < upper_right.re && sigma.im > lower_left.im && sigma.im < upper_right.im
            }
        }
    }

    /// The outward offset Γ′ at distance δ.
    pub fn offset(&self, delta: f64) -> ContourSpec {
        let shape = match self.shape {
            ContourShape::Circle { center, radius } => ContourShape::Circle { center, radius: radius + delta },
            ContourShape::Rectangle { lower_left, upper_right } => ContourShape::Rectangle {
                lower_left: lower_left - Complex64::new(delta, delta),
                upper_right: upper_right + Complex64::new(delta, delta),
            },
        };
        ContourShape::into_spec(shape, self)
    }

    /// Point and tangent dσ/dt at parameter t ∈ [0, 1).
    pub fn point(&self, t: f64) -> (Complex64, Complex64) {
        match self.shape {
            ContourShape::Circle { center, radius } => {
                let e = Complex64::from_polar(1.0, 2.0 * PI * t);
                (center + radius * e, Complex64::new(0.0, 2.0 * PI * radius) * e)
            }
            ContourShape::Rectangle { lower_left, upper_right } => {
                let w = upper_right.re - lower_left.re;
                let h = upper_right.im - lower_left.im;
                let per = 2.0 * (w + h);
                let s = t.rem_euclid(1.0) * per;
                if s < w {
                    (lower_left + s, Complex64::new(per, 0.0))
                } else if s < w + h {
                    (Complex64::new(upper_right.re, lower_left.im + (s - w)), Complex64::new(0.0, per))
                } else if s < 2.0 * w + h {
                    (Complex64::new(upper_right.re - (s - w - h), upper_right.im), Complex64::new(-per, 0.0))
                } else {
                    (Complex64::new(lower_left.re, upper_right.im - (s - 2.0 * w - h)), Complex64::new(0.0, -per))
                }
            }
        }
    }

    /// The n_nodes quadrature nodes (σ_i, dσ/dt(t_i)) at t_i = i/n.
    pub fn nodes(&self) -> Vec<(Complex64, Complex64)> {
        (0..self.n_nodes).map(|i| self.point(i as f64 / self.n_nodes as f64)).collect()
    }
}

impl ContourShape {
    fn into_spec(shape: ContourShape, template: &ContourSpec) -> ContourSpec {
        ContourSpec { shape, ..*template }
    }
}

/// One evaluated contour node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSample {
    /// Node position.
    pub sigma: Complex64,
    /// Evaluation at the node.
    pub point: DetPoint,
}

/// Output of [`count_zeros`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    /// Winding number of D along Γ (exact integer).
    pub winding: i64,
    /// Trapezoidal value of (1/2πi)∮ D′/D dσ.
    pub n_quadrature: f64,
    /// Power sums S(Γ, n) for n = 0..=n_max.
    pub power_sums: Vec<Complex64>,
    /// min |D| over the nodes (including refinement points).
    pub min_abs: f64,
    /// max 𝔇 over the nodes.
    pub max_dfrak: f64,
    /// The evaluated nodes.
    pub samples: Vec<ContourSample>,
}

/// Output of [`error_constants`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorConstants {
    /// Count error constant C_R(Γ).
    pub c_r: f64,
    /// Power-sum constants C̃_R(Γ, n) = C_R(Γ)|Γ|ⁿ, n = 0..=n_max.
    pub c_tilde: Vec<f64>,
    /// lg(Γ).
    pub length: f64,
    /// |Γ|.
    pub modulus: f64,
    /// δ′.
    pub delta_prime: f64,
    /// min_Γ |D_R|.
    pub min_det: f64,
    /// max_Γ 𝔇_R.
    pub max_dfrak: f64,
    /// max_Γ′ 𝔇_R.
    pub max_dfrak_prime: f64,
    /// max_Γ′ e^{‖K‖₁}.
    pub max_exp_trace_prime: f64,
}

/// A located zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocatedZero {
    /// Refined position.
    pub sigma: Complex64,
    /// |D| at the refined position.
    pub residual: f64,
    /// Quadrature estimate S(cell, 1) before polishing.
    pub estimate: Complex64,
    /// Subdivision path of the cell, e.g. "0.3.1".
    pub cell_id: String,
    /// Whether the search region was clipped against a critical strip.
    pub clipped: bool,
}

/// Everything `count` and `locate` report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    /// Real-valued count from quadrature.
    pub n_r: f64,
    /// Integer count from argument tracking.
    pub n_r_rounded: i64,
    /// S_R(Γ, n), n = 0..=n_max.
    pub s_r: Vec<Complex64>,
    /// C_R(Γ).
    pub c_r: f64,
    /// C̃_R(Γ, n).
    pub c_tilde_r: Vec<f64>,
    /// |N − N_R| ≤ C_R < 1/2 holds.
    pub certified: bool,
    /// Located zeros (empty for a pure count).
    pub located: Vec<LocatedZero>,
    /// Counting strategy note (winding for N_R, quadrature for S_R).
    pub method: String,
}

fn evaluate_all<E: DetEvaluator + ?Sized>(eval: &E, sigmas: &[Complex64]) -> Result<Vec<DetPoint>> {
    sigmas.par_iter().map(|&s| eval.evaluate(s)).collect()
}

fn near_zero(sigma: Complex64, value: f64, threshold: f64) -> QnmError {
    QnmError::NearZeroOnContour { sigma_re: sigma.re, sigma_im: sigma.im, value, threshold }
}

/// Phase increment arg(b/a) in (−π, π].
fn phase_step(a: Complex64, b: Complex64) -> f64 {
    (b / a).arg()
}

/// Winding number by continuous argument tracking with adaptive edge refinement.
fn track_winding<E: DetEvaluator + ?Sized>(
    contour: &ContourSpec,
    eval: &E,
    samples: &[ContourSample],
    guard: f64,
) -> Result<(i64, f64)> {
    let n = samples.len();
    let mut total = 0.0;
    let mut min_abs = f64::INFINITY;
    for i in 0..n {
        let t0 = i as f64 / n as f64;
        let t1 = (i + 1) as f64 / n as f64;
        let a = samples[i].point.value;
        let b = samples[(i + 1) % n].point.value;
        let (inc, m) = edge_phase(contour, eval, t0, t1, a, b, guard, 0)?;
        total += inc;
        min_abs = min_abs.min(m);
    }
    let w = total / (2.0 * PI);
    let wr = w.round();
    if (w - wr).abs() > 1e-6 {
        return Err(QnmError::invalid("contour", format!("argument tracking did not close: winding {w}")));
    }
    Ok((wr as i64, min_abs))
}

#[allow(clippy::too_many_arguments)]
fn edge_phase<E: DetEvaluator + ?Sized>(
    contour: &ContourSpec,
    eval: &E,
    t0: f64,
    t1: f64,
    a: Complex64,
    b: Complex64,
    guard: f64,
    depth: u32,
) -> Result<(f64, f64)> {
    let m = a.norm().min(b.norm());
    let d = phase_step(a, b);
    if d.abs() <= ARG_STEP_MAX {
        return Ok((d, m));
    }
    let tm = 0.5 * (t0 + t1);
    let (sm, _) = contour.point(tm);
    if depth >= MAX_EDGE_REFINEMENT {
        return Err(near_zero(sm, m, guard));
    }
    let c = eval.evaluate(sm)?.value;
    if c.norm() <= guard || c == Complex64::new(0.0, 0.0) {
        return Err(near_zero(sm, c.norm(), guard));
    }
    let (d1, m1) = edge_phase(contour, eval, t0, tm, a, c, guard, depth + 1)?;
    let (d2, m2) = edge_phase(contour, eval, tm, t1, c, b, guard, depth + 1)?;
    Ok((d1 + d2, m1.min(m2)))
}

/// Counts zeros of D inside Γ and evaluates the power sums S(Γ, n), n ≤ n_max.
pub fn count_zeros<E: DetEvaluator + ?Sized>(contour: &ContourSpec, eval: &E, n_max: usize) -> Result<CountResult> {
    contour.validate(&[])?;
    let nodes = contour.nodes();
    let sigmas: Vec<Complex64> = nodes.iter().map(|n| n.0).collect();
    let points = evaluate_all(eval, &sigmas)?;
    let samples: Vec<ContourSample> = sigmas.iter().zip(&points).map(|(&sigma, &point)| ContourSample { sigma, point }).collect();
    let max_abs = points.iter().map(|p| p.value.norm()).fold(0.0, f64::max);
    let max_dfrak = points.iter().map(|p| p.dfrak).fold(0.0, f64::max);
    let guard = (NEAR_ZERO_FACTOR * max_dfrak).max(RELATIVE_ZERO_GUARD * max_abs);
    for s in &samples {
        let threshold = (NEAR_ZERO_FACTOR * s.point.dfrak).max(RELATIVE_ZERO_GUARD * max_abs);
        if s.point.value.norm() <= threshold || !s.point.value.norm().is_finite() {
            return Err(near_zero(s.sigma, s.point.value.norm(), threshold));
        }
    }
    let (winding, min_abs) = track_winding(contour, eval, &samples, guard)?;

    // derivative by central differences at h = length/(8n)
    let h = contour.length() / (8.0 * contour.n_nodes as f64);
    let shifted: Vec<Complex64> = sigmas.iter().flat_map(|&s| [s + h, s - h]).collect();
    let shifted_vals = evaluate_all(eval, &shifted)?;
    let dt = 1.0 / contour.n_nodes as f64;
    let mut power_sums = vec![Complex64::new(0.0, 0.0); n_max + 1];
    for (i, (sigma, tangent)) in nodes.iter().enumerate() {
        let d = points[i].value;
        let dp = (shifted_vals[2 * i].value - shifted_vals[2 * i + 1].value) / (2.0 * h);
        let g = dp / d * tangent * dt;
        let mut sp = Complex64::new(1.0, 0.0);
        for ps in power_sums.iter_mut() {
            *ps += sp * g;
            sp *= sigma;
        }
    }
    let scale = Complex64::new(0.0, 1.0 / (2.0 * PI));
    for ps in power_sums.iter_mut() {
        *ps *= -scale; // 1/(2πi) = −i/(2π)
    }
    Ok(CountResult { winding, n_quadrature: power_sums[0].re, power_sums, min_abs: min_abs.min(max_abs), max_dfrak, samples })
}

/// Error constants C_R(Γ), C̃_R(Γ, n) from the samples on Γ and on Γ′.
pub fn error_constants(
    contour: &ContourSpec,
    on_gamma: &[ContourSample],
    on_gamma_prime: &[ContourSample],
    delta_prime: f64,
    n_max: usize,
) -> Result<ErrorConstants> {
    let min_det = on_gamma.iter().map(|s| s.point.value.norm()).fold(f64::INFINITY, f64::min);
    let max_dfrak = on_gamma.iter().map(|s| s.point.dfrak).fold(0.0, f64::max);
    let max_dfrak_prime = on_gamma_prime.iter().map(|s| s.point.dfrak).fold(0.0, f64::max);
    let max_exp_trace_prime = on_gamma_prime.iter().map(|s| s.point.k_trace.exp()).fold(0.0, f64::max);
    if !(min_det > max_dfrak) {
        return Err(QnmError::BudgetBlowup { min_det, max_dfrak });
    }
    let length = contour.length();
    let prefactor = length / (2.0 * PI * delta_prime * min_det);
    // an exact evaluation (𝔇 = 0) contributes nothing even when e^{‖K‖₁} overflows
    let lead = if max_dfrak == 0.0 { 0.0 } else { max_exp_trace_prime / (min_det - max_dfrak) * max_dfrak };
    let c_r = prefactor * (lead + max_dfrak_prime);
    let modulus = contour.modulus();
    let c_tilde = (0..=n_max).map(|n| c_r * modulus.powi(n as i32)).collect();
    Ok(ErrorConstants { c_r, c_tilde, length, modulus, delta_prime, min_det, max_dfrak, max_dfrak_prime, max_exp_trace_prime })
}

/// Counts zeros inside Γ and evaluates the error constants (strips checked first).
pub fn count_report<E: DetEvaluator + ?Sized>(contour: &ContourSpec, eval: &E, strips: &[f64], n_max: usize) -> Result<ResonanceReport> {
    contour.validate(strips)?;
    let count = count_zeros(contour, eval, n_max)?;
    let delta_prime = contour.resolved_delta_prime(strips);
    let outer = contour.offset(delta_prime);
    let outer_sigmas: Vec<Complex64> = outer.nodes().iter().map(|n| n.0).collect();
    let outer_points = evaluate_all(eval, &outer_sigmas)?;
    let outer_samples: Vec<ContourSample> =
        outer_sigmas.iter().zip(&outer_points).map(|(&sigma, &point)| ContourSample { sigma, point }).collect();
    let ec = error_constants(contour, &count.samples, &outer_samples, delta_prime, n_max)?;
    Ok(ResonanceReport {
        n_r: count.n_quadrature,
        n_r_rounded: count.winding,
        s_r: count.power_sums,
        c_r: ec.c_r,
        c_tilde_r: ec.c_tilde,
        certified: ec.c_r < 0.5,
        located: Vec::new(),
        method: "N_R by argument tracking (winding); S_R by trapezoidal quadrature of σⁿD′/D".to_string(),
    })
}

struct Cell {
    lo: Complex64,
    hi: Complex64,
    id: String,
    depth: usize,
    count: CountResult,
}

fn rect(lo: Complex64, hi: Complex64, n: usize) -> ContourSpec {
    ContourSpec::rectangle(lo, hi).with_nodes(n)
}

/// Newton polishing with a central-difference derivative; returns the polished point.
fn newton_polish<E: DetEvaluator + ?Sized>(eval: &E, start: Complex64, scale: f64) -> Result<(Complex64, f64)> {
    let mut s = start;
    let mut f = eval.evaluate(s)?.value;
    let h = 1e-5 * scale.max(1e-12);
    for _ in 0..NEWTON_MAX_ITERS {
        if f.norm() == 0.0 {
            break;
        }
        let dp = (eval.evaluate(s + h)?.value - eval.evaluate(s - h)?.value) / (2.0 * h);
        if dp.norm() == 0.0 {
            break;
        }
        let step = f / dp;
        let next = s - step;
        let fnext = eval.evaluate(next)?.value;
        if fnext.norm() > f.norm() && step.norm() > NEWTON_TOL * scale {
            // damped retreat keeps the iteration inside the basin
            let half = s - 0.5 * step;
            let fh = eval.evaluate(half)?.value;
            if fh.norm() >= f.norm() {
                break;
            }
            s = half;
            f = fh;
            continue;
        }
        s = next;
        f = fnext;
        if step.norm() <= NEWTON_TOL * s.norm().max(scale) {
            break;
        }
    }
    Ok((s, f.norm()))
}

/// Splits a cell into four counted children, moving the split point off any
/// zero that lands on a subdivision line.
fn split_cell<E: DetEvaluator + ?Sized>(cell: &Cell, eval: &E, n: usize, parent_count: i64) -> Result<Vec<Cell>> {
    let (lo, hi) = (cell.lo, cell.hi);
    let mut last_err = None;
    for attempt in 0..JITTER_ATTEMPTS {
        // slightly off-center split so symmetric zero sets do not sit on the lines
        let off = 0.0123 + JITTER_FRACTION * attempt as f64 * 7.0;
        let mid = Complex64::new(lo.re + (hi.re - lo.re) * (0.5 + off), lo.im + (hi.im - lo.im) * (0.5 - 1.39 * off));
        let boxes = [
            (lo, mid),
            (Complex64::new(mid.re, lo.im), Complex64::new(hi.re, mid.im)),
            (mid, hi),
            (Complex64::new(lo.re, mid.im), Complex64::new(mid.re, hi.im)),
        ];
        let counts: Result<Vec<CountResult>> = boxes.iter().map(|&(a, b)| count_zeros(&rect(a, b, n), eval, 1)).collect();
        match counts {
            Ok(counts) => {
                let total: i64 = counts.iter().map(|c| c.winding).sum();
                if total != parent_count {
                    last_err = Some(QnmError::invalid("locate", format!("children count {total} differs from parent count {parent_count}")));
                    continue;
                }
                return Ok(boxes
                    .into_iter()
                    .zip(counts)
                    .enumerate()
                    .filter(|(_, (_, c))| c.winding > 0)
                    .map(|(k, ((a, b), count))| Cell { lo: a, hi: b, id: format!("{}.{}", cell.id, k), depth: cell.depth + 1, count })
                    .collect());
            }
            Err(e @ QnmError::NearZeroOnContour { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or(QnmError::DepthExceeded(cell.depth)))
}

/// Locates every zero inside Γ by quadrisection and Newton polishing.
///
/// The search region is the bounding box of Γ clipped against the critical
/// strips; zeros are reported only when they lie inside Γ.
pub fn locate<E: DetEvaluator + ?Sized>(contour: &ContourSpec, eval: &E, max_depth: usize, strips: &[f64]) -> Result<Vec<LocatedZero>> {
    contour.validate(strips)?;
    let total = count_zeros(contour, eval, 1)?.winding;
    if total == 0 {
        return Ok(Vec::new());
    }
    let (mut lo, mut hi) = contour.bounding_box();
    let [ylo, yhi] = contour.imag_range();
    let mut clipped = false;
    for &s in strips {
        if s < ylo && s > lo.im {
            lo.im = 0.5 * (s + ylo);
            clipped = true;
        }
        if s > yhi && s < hi.im {
            hi.im = 0.5 * (s + yhi);
            clipped = true;
        }
    }
    let n = contour.n_nodes.max(MIN_NODES);
    let diam0 = (hi - lo).norm();
    // the root box may be enlarged slightly if a zero sits on its edge
    let mut attempt = 0;
    let root = loop {
        let j = JITTER_FRACTION * diam0 * attempt as f64;
        let (a, b) = (lo - Complex64::new(j, 0.7 * j), hi + Complex64::new(0.6 * j, j));
        match count_zeros(&rect(a, b, n), eval, 1) {
            Ok(count) => break Cell { lo: a, hi: b, id: "0".to_string(), depth: 0, count },
            Err(QnmError::NearZeroOnContour { .. }) if attempt + 1 < JITTER_ATTEMPTS => attempt += 1,
            Err(e) => return Err(e),
        }
    };
    let mut out = Vec::new();
    let mut queue = vec![root];
    while let Some(cell) = queue.pop() {
        let diam = (cell.hi - cell.lo).norm();
        match cell.count.winding {
            w if w <= 0 => {}
            1 => {
                let est = cell.count.power_sums[1];
                let centre = 0.5 * (cell.lo + cell.hi);
                let start = if est.re.is_finite() && est.im.is_finite() { est } else { centre };
                let (sigma, residual) = newton_polish(eval, start, diam)?;
                let tol = 1e-9 * diam;
                let inside = sigma.re >= cell.lo.re - tol
                    && sigma.re <= cell.hi.re + tol
                    && sigma.im >= cell.lo.im - tol
                    && sigma.im <= cell.hi.im + tol;
                let (sigma, residual) = if inside { (sigma, residual) } else { (start, eval.evaluate(start)?.value.norm()) };
                if contour.contains(sigma) {
                    out.push(LocatedZero { sigma, residual, estimate: est, cell_id: cell.id.clone(), clipped });
                }
            }
            w => {
                if cell.depth >= max_depth {
                    return Err(QnmError::DepthExceeded(max_depth));
                }
                let children = split_cell(&cell, eval, n, w)?;
                queue.extend(children);
            }
        }
    }
    out.sort_by(|a, b| a.sigma.re.partial_cmp(&b.sigma.re).unwrap().then(a.sigma.im.partial_cmp(&b.sigma.im).unwrap()));
    Ok(out)
}
